"""
Стохастическое моделирование частиц: дискретное и непрерывное время, 1D и 2D
"""
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy import stats

from core.exceptions import ParameterError
from core.params import (
    DiscreteKinetics,
    InitialCondition,
    KineticsParams,
    Phase,
    TransportParams,
)
from simulation.statistics import EnsembleStats, compute_stats
from utils.logger import setup_logger
from utils.rng import block_bounds, make_block_streams, n_blocks

logger = setup_logger()


@dataclass(frozen=True)
class ParticleState:
    """Состояние частицы: положение, фаза, накопленное время в свободной фазе"""
    x: float = 0.0
    y: float = 0.0
    phase: Phase = Phase.FREE
    tau_free: float = 0.0


@dataclass(frozen=True)
class ParticleRecord:
    """Конечное состояние траектории на горизонте t и начальная фаза"""
    initial_phase: Phase
    state: ParticleState

    @property
    def x(self) -> float:
        return self.state.x

    @property
    def y(self) -> float:
        return self.state.y

    @property
    def phase(self) -> Phase:
        return self.state.phase

    @property
    def tau_free(self) -> float:
        return self.state.tau_free


@dataclass(frozen=True)
class ParticleRecords:
    """Записи ансамбля в виде столбцов; порядок частиц совпадает с их номерами"""
    initial_free: np.ndarray
    final_free: np.ndarray
    x: np.ndarray
    y: np.ndarray
    tau_free: np.ndarray
    t: float
    dims: int

    def __len__(self) -> int:
        return int(self.x.size)

    def record(self, i: int) -> ParticleRecord:
        """Запись i-й частицы"""
        state = ParticleState(
            x=float(self.x[i]),
            y=float(self.y[i]),
            phase=Phase.FREE if self.final_free[i] else Phase.ADSORBED,
            tau_free=float(self.tau_free[i]),
        )
        initial = Phase.FREE if self.initial_free[i] else Phase.ADSORBED
        return ParticleRecord(initial_phase=initial, state=state)

    def phase_mask(self, phase: Phase) -> np.ndarray:
        """Маска частиц, находящихся в фазе phase в момент t"""
        return self.final_free if phase is Phase.FREE else ~self.final_free

    def to_frame(self) -> pd.DataFrame:
        """Таблица для экспорта: id, initial_phase, final_phase, x, y, tau_free"""
        labels = np.array([Phase.ADSORBED.value, Phase.FREE.value])
        return pd.DataFrame({
            "id": np.arange(len(self)),
            "initial_phase": labels[self.initial_free.astype(int)],
            "final_phase": labels[self.final_free.astype(int)],
            "x": self.x,
            "y": self.y,
            "tau_free": self.tau_free,
        })


@dataclass(frozen=True)
class ResidenceHistogram:
    """Гистограмма времени пребывания в свободной фазе с отдельными атомами"""
    edges: np.ndarray
    counts: np.ndarray
    atom_zero: int
    atom_horizon: int
    total: int

    @property
    def density(self) -> np.ndarray:
        """Непрерывная часть как плотность вероятности (нормировка на total)"""
        return self.counts / (self.total * np.diff(self.edges))


def _check_dims(dims: int):
    if dims not in (1, 2):
        raise ParameterError(f"dims должно быть 1 или 2, получено {dims}")


def _other(phase: Phase) -> Phase:
    return Phase.ADSORBED if phase is Phase.FREE else Phase.FREE


def step_discrete(
    state: ParticleState,
    dk: DiscreteKinetics,
    tp: TransportParams,
    rng: np.random.Generator,
    dims: int = 1
) -> ParticleState:
    """
    Один шаг дискретной схемы

    Смещение считается по фазе в начале интервала, смена фазы применяется
    в конце интервала.

    Args:
        state: Текущее состояние
        dk: Дискретная кинетика (a, b, dt)
        tp: Параметры переноса
        rng: Генератор случайных чисел
        dims: Размерность (1 или 2)

    Returns:
        ParticleState: Состояние после шага
    """
    x, y, tau = state.x, state.y, state.tau_free

    if state.phase is Phase.FREE:
        x += tp.v * dk.dt + math.sqrt(2.0 * tp.d_l * dk.dt) * rng.standard_normal()
        if dims == 2:
            y += math.sqrt(2.0 * tp.d_t * dk.dt) * rng.standard_normal()
        tau += dk.dt
        switch_probability = dk.b
    else:
        switch_probability = dk.a

    phase = state.phase
    if rng.random() < switch_probability:
        phase = _other(phase)

    return ParticleState(x=x, y=y, phase=phase, tau_free=tau)


def simulate_particle_dt(
    dk: DiscreteKinetics,
    tp: TransportParams,
    initial_phase: Phase,
    rng: np.random.Generator,
    dims: int = 1
) -> ParticleRecord:
    """Траектория из dk.n шагов дискретной схемы"""
    _check_dims(dims)
    state = ParticleState(phase=initial_phase)
    for _ in range(dk.n):
        state = step_discrete(state, dk, tp, rng, dims)
    return ParticleRecord(initial_phase=initial_phase, state=state)


def simulate_particle_ct(
    kin: KineticsParams,
    tp: TransportParams,
    t: float,
    initial_phase: Phase,
    rng: np.random.Generator,
    dims: int = 1
) -> ParticleRecord:
    """
    Траектория в непрерывном времени

    Времена пребывания экспоненциальны (lambda в свободной фазе, mu в
    сорбированной); последний интервал обрезается горизонтом t.

    Args:
        kin: Скорости сорбции/десорбции
        tp: Параметры переноса
        t: Горизонт
        initial_phase: Начальная фаза
        rng: Генератор
        dims: Размерность

    Returns:
        ParticleRecord: Конечное состояние
    """
    if t < 0:
        raise ParameterError(f"t должно быть >= 0, получено {t}")
    _check_dims(dims)

    x = y = tau = 0.0
    phase = initial_phase
    remaining = float(t)

    while remaining > 0:
        rate = kin.lambda_ if phase is Phase.FREE else kin.mu
        hold = rng.exponential(1.0 / rate) if rate > 0 else math.inf
        dwell = min(hold, remaining)

        if phase is Phase.FREE:
            x += tp.v * dwell + math.sqrt(2.0 * tp.d_l * dwell) * rng.standard_normal()
            if dims == 2:
                y += math.sqrt(2.0 * tp.d_t * dwell) * rng.standard_normal()
            tau += dwell

        if hold >= remaining:
            break
        remaining -= hold
        phase = _other(phase)

    state = ParticleState(x=x, y=y, phase=phase, tau_free=min(tau, float(t)))
    return ParticleRecord(initial_phase=initial_phase, state=state)


def _initial_free(initial: InitialCondition, p_free: float, size: int, rng: np.random.Generator) -> np.ndarray:
    # Равномерные числа тянутся всегда, чтобы структура потока не зависела от начального условия
    u = rng.random(size)
    if initial is InitialCondition.FREE:
        return np.ones(size, dtype=bool)
    if initial is InitialCondition.ADSORBED:
        return np.zeros(size, dtype=bool)
    return u < p_free


def _displace(tau: np.ndarray, tp: TransportParams, dims: int, rng: np.random.Generator):
    # Сумма независимых гауссовых приращений по свободным интервалам
    z = rng.standard_normal((tau.size, 2))
    x = tp.v * tau + np.sqrt(2.0 * tp.d_l * tau) * z[:, 0]
    if dims == 2:
        y = np.sqrt(2.0 * tp.d_t * tau) * z[:, 1]
    else:
        y = np.zeros_like(tau)
    return x, y


def _ct_block(kin, tp, t, initial, seed, block, n, dims):
    start, stop = block_bounds(block, n)
    size = stop - start
    streams = make_block_streams(seed, block)

    initial_free = _initial_free(initial, kin.pi_f, size, streams.phases)
    free = initial_free.copy()
    tau = np.zeros(size)
    remaining = np.full(size, float(t))
    active = np.flatnonzero(remaining > 0)

    while active.size:
        rates = np.where(free[active], kin.lambda_, kin.mu)
        draws = streams.phases.standard_exponential(active.size)
        with np.errstate(divide="ignore", invalid="ignore"):
            hold = np.where(rates > 0, draws / rates, np.inf)

        left = remaining[active]
        dwell = np.minimum(hold, left)
        tau[active] += np.where(free[active], dwell, 0.0)
        remaining[active] = left - dwell

        switched = active[hold < left]
        free[switched] = ~free[switched]
        active = switched

    tau = np.minimum(tau, float(t))
    x, y = _displace(tau, tp, dims, streams.displacement)
    logger.debug(f"Блок {block}: частиц {size}")
    return initial_free, free, x, y, tau


def _dt_block(dk, tp, p_free, initial, seed, block, n, dims):
    start, stop = block_bounds(block, n)
    size = stop - start
    streams = make_block_streams(seed, block)

    initial_free = _initial_free(initial, p_free, size, streams.phases)
    free = initial_free.copy()
    k = np.zeros(size, dtype=np.int64)

    for _ in range(dk.n):
        k += free
        u = streams.phases.random(size)
        free = free ^ np.where(free, u < dk.b, u < dk.a)

    tau = k * dk.dt
    x, y = _displace(tau, tp, dims, streams.displacement)
    return initial_free, free, x, y, tau


def _assemble(parts, t: float, dims: int) -> ParticleRecords:
    columns = list(zip(*parts))
    return ParticleRecords(
        initial_free=np.concatenate(columns[0]),
        final_free=np.concatenate(columns[1]),
        x=np.concatenate(columns[2]),
        y=np.concatenate(columns[3]),
        tau_free=np.concatenate(columns[4]),
        t=float(t),
        dims=dims,
    )


def _check_ensemble(n: int, threads: int, dims: int):
    if n < 1:
        raise ParameterError(f"Число частиц N должно быть >= 1, получено {n}")
    if threads < 1:
        raise ParameterError(f"Число потоков должно быть >= 1, получено {threads}")
    _check_dims(dims)


def run_ensemble(
    kin: KineticsParams,
    tp: TransportParams,
    t: float,
    n: int,
    initial: InitialCondition | Phase | str = InitialCondition.EQUILIBRIUM,
    seed: int = 42,
    dims: int = 1,
    threads: int = 1
) -> tuple[EnsembleStats, ParticleRecords]:
    """
    Ансамбль из n частиц в непрерывном времени

    Частицы разбиты на блоки фиксированного размера с собственными
    подпотоками, поэтому результат зависит только от (seed, n, параметры).

    Args:
        kin: Скорости сорбции/десорбции
        tp: Параметры переноса
        t: Горизонт
        n: Число частиц
        initial: Начальное условие (free, adsorbed, equilibrium)
        seed: Главное зерно
        dims: Размерность
        threads: Число потоков joblib

    Returns:
        tuple: (EnsembleStats, ParticleRecords)
    """
    if t < 0:
        raise ParameterError(f"t должно быть >= 0, получено {t}")
    _check_ensemble(n, threads, dims)
    initial = InitialCondition.coerce(initial)

    logger.info(
        f"Ансамбль: N={n}, t={t}, начало={initial.value}, dims={dims}, "
        f"seed={seed}, потоков={threads}"
    )

    parts = Parallel(n_jobs=threads, prefer="threads")(
        delayed(_ct_block)(kin, tp, t, initial, seed, block, n, dims)
        for block in range(n_blocks(n))
    )
    records = _assemble(parts, t, dims)
    ensemble = compute_stats(records)

    logger.info(f"Ансамбль готов: Z={ensemble.centroid:.6g}, V={ensemble.variance:.6g}")
    return ensemble, records


def run_ensemble_discrete(
    dk: DiscreteKinetics,
    tp: TransportParams,
    n: int,
    initial: InitialCondition | Phase | str = InitialCondition.EQUILIBRIUM,
    seed: int = 42,
    dims: int = 1,
    threads: int = 1
) -> tuple[EnsembleStats, ParticleRecords]:
    """
    Ансамбль дискретной схемы (тот же закон, что у step_discrete)

    Равновесное начало берёт долю свободных a/(a+b).
    """
    _check_ensemble(n, threads, dims)
    initial = InitialCondition.coerce(initial)
    p_free = dk.stationary_free if initial is InitialCondition.EQUILIBRIUM else 1.0

    logger.info(f"Дискретный ансамбль: N={n}, шагов={dk.n}, dt={dk.dt}, начало={initial.value}")

    parts = Parallel(n_jobs=threads, prefer="threads")(
        delayed(_dt_block)(dk, tp, p_free, initial, seed, block, n, dims)
        for block in range(n_blocks(n))
    )
    records = _assemble(parts, dk.horizon, dims)
    return compute_stats(records), records


def free_residence_histogram(records: ParticleRecords, bins: int = 100) -> ResidenceHistogram:
    """
    Гистограмма времени пребывания в свободной фазе

    Частицы, ни разу не бывшие свободными (tau = 0) и ни разу не покидавшие
    свободную фазу (tau = t), учитываются отдельными атомами.

    Args:
        records: Записи ансамбля
        bins: Число бинов непрерывной части на [0, t]

    Returns:
        ResidenceHistogram: Гистограмма и атомы; сумма равна N
    """
    if bins < 1:
        raise ParameterError(f"bins должно быть >= 1, получено {bins}")

    tau = records.tau_free
    t = records.t
    at_zero = tau == 0.0
    at_horizon = (tau == t) & ~at_zero

    continuous = tau[~at_zero & ~at_horizon]
    edges = np.linspace(0.0, t if t > 0 else 1.0, bins + 1)
    counts, _ = np.histogram(continuous, bins=edges)

    return ResidenceHistogram(
        edges=edges,
        counts=counts,
        atom_zero=int(at_zero.sum()),
        atom_horizon=int(at_horizon.sum()),
        total=len(records),
    )


def residence_ks_distance(records: ParticleRecords, continuous_cdf) -> float:
    """
    Расстояние Колмогорова-Смирнова между непрерывной частью выборки tau и
    нормированной функцией распределения непрерывной части плотности

    Args:
        records: Записи ансамбля
        continuous_cdf: Функция распределения на [0, t], нормированная на 1

    Returns:
        float: Статистика KS
    """
    tau = records.tau_free
    continuous = tau[(tau > 0.0) & (tau < records.t)]
    if continuous.size == 0:
        raise ParameterError("В выборке нет частиц с 0 < tau < t")
    return float(stats.kstest(continuous, continuous_cdf).statistic)
