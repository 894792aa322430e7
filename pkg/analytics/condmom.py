"""
Условные моменты двумерного облака (равновесный начальный импульс):
x-моменты при фиксированном y квадратурой по tau,
y-моменты при фиксированном x через изображения Лапласа и обращение Стехфеста
"""
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from scipy import stats

from analytics.giddings import DEFAULT_TOL, mixture_atoms, mixture_density
from analytics.laplace import DEFAULT_TERMS, stehfest_invert
from analytics.quadrature import integrate_residence
from core.exceptions import ParameterError
from core.params import InitialCondition, KineticsParams, Phase, TransportParams
from utils.logger import setup_logger

logger = setup_logger()


RATIO_FLOOR = 1e-30


@dataclass(frozen=True)
class MomentCurve:
    """
    Условный момент порядка order как функция координаты axis

    atom_weight - масса дельта-компоненты в нуле координаты (в values не входит).
    """
    coordinate: np.ndarray
    values: np.ndarray
    order: int
    phase: Phase | None
    axis: str
    t: float
    atom_weight: float = 0.0
    normalized: bool = False

    @property
    def phase_name(self) -> str:
        return "total" if self.phase is None else self.phase.value

    def to_frame(self) -> pd.DataFrame:
        """Таблица для CSV: coordinate, value, order, phase, atom_weight"""
        return pd.DataFrame({
            "coordinate": self.coordinate,
            "value": self.values,
            "order": self.order,
            "phase": self.phase_name,
            "atom_weight": self.atom_weight,
        })


def _check(t: float, order: int, allowed: tuple[int, ...]):
    if t <= 0:
        raise ParameterError(f"t должно быть > 0, получено {t}")
    if order not in allowed:
        raise ParameterError(f"Порядок момента должен быть из {allowed}, получено {order}")


def _x_weight(order: int, tau, tp: TransportParams):
    if order == 0:
        return np.ones_like(tau)
    if order == 1:
        return tp.v * tau
    return 2.0 * tp.d_l * tau + (tp.v * tau) ** 2


def _transverse_gaussian(y, tau, d_t: float):
    # (ny,) x (m,) -> (ny, m)
    variance = 2.0 * d_t * tau[None, :]
    return np.exp(-y[:, None] ** 2 / (2.0 * variance)) / np.sqrt(2.0 * math.pi * variance)


def x_moments_given_y(
    order: int,
    phase: Phase | None,
    y_grid,
    t: float,
    kin: KineticsParams,
    tp: TransportParams,
    tol: float = DEFAULT_TOL,
    max_panels: int = 4096
) -> MomentCurve:
    """
    M_i^(n)(y) = int_0^t g_n(tau) h_i^eq(tau, t) G(y; 0, 2 D_T tau) dtau

    g_0 = 1, g_1 = v tau, g_2 = 2 D_L tau + v^2 tau^2. Атом tau = t входит в
    значения гауссианой по y; атом tau = 0 даёт delta(y), он записан в
    atom_weight кривой нулевого порядка.

    Args:
        order: 0, 1 или 2
        phase: Фаза (None - всё облако)
        y_grid: Сетка y
        t: Время
        kin: Скорости
        tp: Параметры переноса (D_T > 0)
        tol: Точность квадратуры в узле
        max_panels: Предел числа панелей

    Returns:
        MomentCurve: Кривая по y

    Raises:
        QuadratureError: Квадратура не сошлась
    """
    _check(t, order, (0, 1, 2))
    if tp.d_t <= 0:
        raise ParameterError(f"x-моменты при фиксированном y требуют D_T > 0, получено {tp.d_t}")
    initial = InitialCondition.EQUILIBRIUM
    y = np.atleast_1d(np.asarray(y_grid, dtype=float))

    def integrand(tau):
        h = mixture_density(initial, phase, tau, t, kin)
        return _transverse_gaussian(y, tau, tp.d_t) * (_x_weight(order, tau, tp) * h)[None, :]

    values = np.atleast_1d(integrate_residence(integrand, t, tol=tol, max_panels=max_panels))

    atom_0, atom_t = mixture_atoms(initial, phase, t, kin)
    if atom_t > 0:
        horizon = np.array([float(t)])
        values = values + atom_t * _x_weight(order, horizon, tp)[0] * _transverse_gaussian(y, horizon, tp.d_t)[:, 0]

    logger.debug(f"M^({order})(y): phase={phase}, t={t}, узлов={y.size}")
    return MomentCurve(
        coordinate=y,
        values=values,
        order=order,
        phase=phase,
        axis="y",
        t=float(t),
        atom_weight=atom_0 if order == 0 else 0.0,
    )


def normalized_x_mean_given_y(
    phase: Phase | None,
    y_grid,
    t: float,
    kin: KineticsParams,
    tp: TransportParams,
    tol: float = DEFAULT_TOL,
    floor: float = RATIO_FLOOR
) -> MomentCurve:
    """Средний пройденный путь M^(1)/M^(0) при фиксированном y (кривая задержки)"""
    m0 = x_moments_given_y(0, phase, y_grid, t, kin, tp, tol=tol)
    m1 = x_moments_given_y(1, phase, y_grid, t, kin, tp, tol=tol)
    ratio = np.where(m0.values > floor, m1.values / np.maximum(m0.values, floor), np.nan)
    return MomentCurve(
        coordinate=m0.coordinate, values=ratio, order=1, phase=phase, axis="y", t=float(t), normalized=True
    )


def _b(s, kin: KineticsParams):
    return (s + kin.total_rate) / (s + kin.mu)


def _q(s, kin: KineticsParams, tp: TransportParams):
    return np.sqrt(tp.v ** 2 + 4.0 * _b(s, kin) * s * tp.d_l)


def _check_laplace(s, tp: TransportParams):
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0):
        raise ParameterError("Изображение определено для s > 0")
    if tp.d_l <= 0:
        raise ParameterError(f"Изображения по x требуют D_L > 0, получено {tp.d_l}")
    return s


def laplace_m0_free(x: float, s, kin: KineticsParams, tp: TransportParams):
    """
    Изображение M_f^(0)(x): b pi_f exp((xv - |x| q)/(2 D_L))/q, q = sqrt(v^2 + 4 b s D_L)
    """
    s = _check_laplace(s, tp)
    q = _q(s, kin, tp)
    return _b(s, kin) * kin.pi_f * np.exp((x * tp.v - abs(x) * q) / (2.0 * tp.d_l)) / q


def laplace_m0_adsorbed(x: float, s, kin: KineticsParams, tp: TransportParams):
    """
    Гладкая часть изображения M_a^(0)(x) = lambda M_f^(0)/(s + mu)

    Слагаемое pi_a delta(x)/(s + mu) сюда не входит: в оригинале это
    атом pi_a e^{-mu t} в x = 0.
    """
    s = _check_laplace(s, tp)
    return kin.lambda_ * laplace_m0_free(x, s, kin, tp) / (s + kin.mu)


def laplace_m2_free(x: float, s, kin: KineticsParams, tp: TransportParams):
    """
    Изображение M_f^(2)(x) = 2 D_T b pi_f/q^2 exp((xv - |x| q)/(2 D_L)) (|x| + 2 D_L/q)

    Решение D_L M'' - v M' - s b M = -2 D_T M_f^(0) с непрерывными M и M' в x = 0.
    """
    s = _check_laplace(s, tp)
    q = _q(s, kin, tp)
    envelope = np.exp((x * tp.v - abs(x) * q) / (2.0 * tp.d_l))
    return 2.0 * tp.d_t * _b(s, kin) * kin.pi_f / q ** 2 * envelope * (abs(x) + 2.0 * tp.d_l / q)


def laplace_m2_free_printed(x: float, s, kin: KineticsParams, tp: TransportParams):
    """
    Опубликованная форма изображения M_f^(2) (только x > 0), для сравнения

    b pi_f mu^2 D_L/(lambda + mu) exp((xv - xq)/(2 D_L))/q^2 (mu/v)(x + 2 D_L/q).
    Размерность не совпадает с laplace_m2_free.
    """
    s = _check_laplace(s, tp)
    if x <= 0:
        raise ParameterError(f"Опубликованная форма задана только при x > 0, получено {x}")
    if tp.v <= 0:
        raise ParameterError("Опубликованная форма требует v > 0")
    q = _q(s, kin, tp)
    prefactor = _b(s, kin) * kin.pi_f * kin.mu ** 2 * tp.d_l / kin.total_rate
    envelope = np.exp((x * tp.v - x * q) / (2.0 * tp.d_l)) / q ** 2
    return prefactor * envelope * (kin.mu / tp.v) * (x + 2.0 * tp.d_l / q)


def laplace_m2_adsorbed(x: float, s, kin: KineticsParams, tp: TransportParams):
    """Изображение M_a^(2)(x) = lambda M_f^(2)/(s + mu)"""
    s = _check_laplace(s, tp)
    return kin.lambda_ * laplace_m2_free(x, s, kin, tp) / (s + kin.mu)


_LAPLACE_FORMS = {
    (0, Phase.FREE): laplace_m0_free,
    (0, Phase.ADSORBED): laplace_m0_adsorbed,
    (2, Phase.FREE): laplace_m2_free,
    (2, Phase.ADSORBED): laplace_m2_adsorbed,
}


def _invert_at(x: float, order: int, phases: tuple[Phase, ...], t, kin, tp, n_terms) -> float:
    return sum(
        stehfest_invert(lambda s, form=_LAPLACE_FORMS[(order, p)]: form(x, s, kin, tp), t, n_terms)
        for p in phases
    )


def y_moments_given_x(
    order: int,
    phase: Phase | None,
    x_grid,
    t: float,
    kin: KineticsParams,
    tp: TransportParams,
    n_terms: int = DEFAULT_TERMS,
    threads: int = 1
) -> MomentCurve:
    """
    M_i^(m)(x), m = 0 или 2, обращением изображений в каждом узле x

    Первый момент по y равен нулю по симметрии и не вычисляется. Атом
    pi_a e^{-mu t} в x = 0 записан в atom_weight кривой нулевого порядка.

    Args:
        order: 0 или 2
        phase: Фаза (None - сумма фаз)
        x_grid: Сетка x
        t: Время
        kin: Скорости
        tp: Параметры переноса (D_L > 0)
        n_terms: Число слагаемых Стехфеста
        threads: Число потоков joblib

    Returns:
        MomentCurve: Кривая по x

    Raises:
        LaplaceInversionError: Изображение вернуло нечисловое значение
    """
    if order == 1:
        raise ParameterError("Первый y-момент при фиксированном x тождественно равен нулю")
    _check(t, order, (0, 2))
    if tp.d_l <= 0:
        raise ParameterError(f"y-моменты при фиксированном x требуют D_L > 0, получено {tp.d_l}")

    x = np.atleast_1d(np.asarray(x_grid, dtype=float))
    phases = (Phase.FREE, Phase.ADSORBED) if phase is None else (phase,)

    values = Parallel(n_jobs=threads, prefer="threads")(
        delayed(_invert_at)(float(xi), order, phases, t, kin, tp, n_terms) for xi in x
    )

    atom = 0.0
    if order == 0 and phase in (None, Phase.ADSORBED):
        atom, _ = mixture_atoms(InitialCondition.EQUILIBRIUM, Phase.ADSORBED, t, kin)

    logger.debug(f"M^({order})(x): phase={phase}, t={t}, узлов={x.size}, N={n_terms}")
    return MomentCurve(
        coordinate=x,
        values=np.asarray(values, dtype=float),
        order=order,
        phase=phase,
        axis="x",
        t=float(t),
        atom_weight=atom,
    )


def transverse_variance_ratio(
    x_grid,
    t: float,
    kin: KineticsParams,
    tp: TransportParams,
    n_terms: int = DEFAULT_TERMS,
    floor: float = RATIO_FLOOR,
    threads: int = 1
) -> MomentCurve:
    """
    Поперечная дисперсия свободной фазы при фиксированном x: M_f^(2)/M_f^(0)

    Args:
        x_grid: Сетка x > 0
        t: Время
        kin: Скорости
        tp: Параметры переноса
        n_terms: Число слагаемых Стехфеста
        floor: Порог M_f^(0), ниже которого отношение не определено (NaN)
        threads: Число потоков joblib

    Returns:
        MomentCurve: Нормированный центральный второй момент по x
    """
    x = np.atleast_1d(np.asarray(x_grid, dtype=float))
    if np.any(x <= 0):
        raise ParameterError("Отношение строится на сетке x > 0")

    m0 = y_moments_given_x(0, Phase.FREE, x, t, kin, tp, n_terms=n_terms, threads=threads)
    m2 = y_moments_given_x(2, Phase.FREE, x, t, kin, tp, n_terms=n_terms, threads=threads)

    defined = m0.values > floor
    if not np.all(defined):
        logger.warning(f"M_f^(0) ниже порога {floor:g} в {int(np.sum(~defined))} узлах, отношение не определено")
    ratio = np.where(defined, m2.values / np.maximum(m0.values, floor), np.nan)
    return MomentCurve(coordinate=x, values=ratio, order=2, phase=Phase.FREE, axis="x", t=float(t), normalized=True)


def implied_peclet(tp: TransportParams) -> float:
    """Число Пекле, при котором M_f^(2)/M_f^(0) = x/Pe в пределе D_L -> 0: v/(2 D_T)"""
    if tp.d_t <= 0:
        raise ParameterError("Число Пекле определено при D_T > 0")
    return tp.v / (2.0 * tp.d_t)


def advection_dispersion_marginal(x, t: float, tp: TransportParams):
    """Плотность неадсорбирующегося вещества по x: N(x; vt, 2 D_L t)"""
    return stats.norm.pdf(np.asarray(x, dtype=float), loc=tp.v * t, scale=math.sqrt(2.0 * tp.d_l * t))
