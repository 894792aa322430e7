"""
Статистики ансамбля частиц: моменты облака, условные по фазе версии,
стандартные ошибки по батчам, двумерные гистограммы
"""
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from core.params import Phase


N_BATCHES = 20


@dataclass(frozen=True)
class MomentSummary:
    """Эмпирические моменты выборки (дисперсия с делителем N)"""
    count: int
    mean: float
    variance: float
    skewness: float
    kurtosis: float


@dataclass(frozen=True)
class EnsembleStats:
    """Статистики облака в момент t"""
    count: int
    total: MomentSummary
    free: MomentSummary
    adsorbed: MomentSummary
    y_total: MomentSummary | None = None
    cross_moment: float | None = None
    standard_errors: dict[str, float] = field(default_factory=dict)

    @property
    def centroid(self) -> float:
        """Центр масс Z(t)"""
        return self.total.mean

    @property
    def variance(self) -> float:
        """Эмпирическая дисперсия V(t)"""
        return self.total.variance

    @property
    def skewness(self) -> float:
        return self.total.skewness

    @property
    def kurtosis(self) -> float:
        return self.total.kurtosis

    def by_phase(self, phase: Phase) -> MomentSummary:
        return self.free if phase is Phase.FREE else self.adsorbed


def summarize(values: np.ndarray) -> MomentSummary:
    """
    Моменты выборки

    Суммирование numpy попарное, поэтому результат не зависит от порядка
    сборки блоков при фиксированном порядке частиц.

    Args:
        values: Выборка

    Returns:
        MomentSummary: Число, среднее, дисперсия, асимметрия, эксцесс (не избыточный)
    """
    values = np.asarray(values, dtype=float)
    n = values.size
    if n == 0:
        return MomentSummary(0, math.nan, math.nan, math.nan, math.nan)
    mean = float(np.mean(values))
    variance = float(np.mean((values - mean) ** 2))
    if n < 2 or variance == 0.0:
        return MomentSummary(n, mean, variance, math.nan, math.nan)
    skewness = float(stats.skew(values, bias=True))
    kurtosis = float(stats.kurtosis(values, fisher=False, bias=True))
    return MomentSummary(n, mean, variance, skewness, kurtosis)


def batch_standard_errors(values: np.ndarray, n_batches: int = N_BATCHES) -> dict[str, float]:
    """
    Стандартные ошибки среднего, дисперсии и эксцесса методом батчей

    Args:
        values: Выборка (порядок частиц фиксирован)
        n_batches: Число батчей

    Returns:
        dict: {"mean": ..., "variance": ..., "kurtosis": ...}
    """
    values = np.asarray(values, dtype=float)
    if values.size < 2 * n_batches:
        return {"mean": math.nan, "variance": math.nan, "kurtosis": math.nan}

    batches = np.array_split(values, n_batches)
    means = np.array([b.mean() for b in batches])
    variances = np.array([b.var() for b in batches])
    kurtoses = np.array([stats.kurtosis(b, fisher=False, bias=True) for b in batches])

    # Ошибка статистики по всей выборке = разброс батчей / sqrt(n_batches)
    scale = math.sqrt(n_batches)
    return {
        "mean": float(means.std(ddof=1) / scale),
        "variance": float(variances.std(ddof=1) / scale),
        "kurtosis": float(kurtoses.std(ddof=1) / scale),
    }


def compute_stats(records, n_batches: int = N_BATCHES) -> EnsembleStats:
    """
    Статистики ансамбля по записям частиц

    Args:
        records: ParticleRecords
        n_batches: Число батчей для стандартных ошибок

    Returns:
        EnsembleStats: Полные и условные по фазе моменты
    """
    x = records.x
    free = records.final_free

    y_summary = None
    cross = None
    if records.dims == 2:
        y_summary = summarize(records.y)
        cross = float(np.mean((x - x.mean()) * (records.y - records.y.mean())))

    return EnsembleStats(
        count=len(records),
        total=summarize(x),
        free=summarize(x[free]),
        adsorbed=summarize(x[~free]),
        y_total=y_summary,
        cross_moment=cross,
        standard_errors=batch_standard_errors(x, n_batches),
    )


def conditional_y_variance(
    records,
    x_edges: np.ndarray,
    min_count: int = 1000,
    phase: Phase | None = None
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Условная поперечная дисперсия по бинам x

    Args:
        records: ParticleRecords двумерного прогона
        x_edges: Границы бинов по x
        min_count: Минимальное число частиц в бине
        phase: Фаза в момент t (None - все частицы)

    Returns:
        tuple: (центры бинов, дисперсия y, число частиц); в бинах с count < min_count - nan
    """
    x, y = records.x, records.y
    if phase is not None:
        mask = records.final_free if phase is Phase.FREE else ~records.final_free
        x, y = x[mask], y[mask]

    index = np.digitize(x, x_edges) - 1
    n_bins = len(x_edges) - 1
    inside = (index >= 0) & (index < n_bins)
    counts = np.bincount(index[inside], minlength=n_bins)
    sums = np.bincount(index[inside], weights=y[inside], minlength=n_bins)
    squares = np.bincount(index[inside], weights=y[inside] ** 2, minlength=n_bins)

    with np.errstate(invalid="ignore", divide="ignore"):
        mean = sums / counts
        variance = squares / counts - mean ** 2
    variance[counts < min_count] = np.nan

    centers = 0.5 * (x_edges[1:] + x_edges[:-1])
    return centers, variance, counts


def histogram_2d(
    records,
    x_edges: np.ndarray,
    y_edges: np.ndarray,
    phase: Phase | None = None
) -> np.ndarray:
    """
    Оценка плотности облака N(x, y) по частицам

    Нормировка: доля всех частиц ансамбля на единицу площади, т.е. масса фазы
    делится на полное число частиц, как у аналитических полей.

    Returns:
        np.ndarray: Плотность формы (len(y_edges)-1, len(x_edges)-1), строки - y
    """
    x, y = records.x, records.y
    if phase is not None:
        mask = records.final_free if phase is Phase.FREE else ~records.final_free
        x, y = x[mask], y[mask]

    counts, _, _ = np.histogram2d(y, x, bins=[y_edges, x_edges])
    area = np.outer(np.diff(y_edges), np.diff(x_edges))
    return counts / (len(records) * area)
