"""
Моменты положения частицы: дискретные формулы случайных сумм,
непрерывный предел, условные по фазе моменты
"""
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.linalg import expm

from core.exceptions import DegenerateKineticsError, ParameterError
from core.params import DiscreteKinetics, InitialCondition, KineticsParams, Phase, TransportParams


@dataclass(frozen=True)
class MomentSet:
    """
    Моменты положения S(t)

    mass - вероятность фазы, по которой выполнено условие (1 без условия);
    mean, variance и центральные моменты нормированы на mass.
    """
    mean: float
    variance: float
    t: float
    conditioning: Phase | None = None
    initial: InitialCondition = InitialCondition.EQUILIBRIUM
    third_central: float | None = None
    fourth_central: float | None = None
    mass: float = 1.0

    @property
    def skewness(self) -> float:
        if self.third_central is None or self.variance <= 0:
            return math.nan
        return self.third_central / self.variance ** 1.5

    @property
    def excess_kurtosis(self) -> float:
        if self.fourth_central is None or self.variance <= 0:
            return math.nan
        return self.fourth_central / self.variance ** 2 - 3.0


@dataclass(frozen=True)
class KnDistribution:
    """Совместный закон числа свободных интервалов K_n и фазы в момент n"""
    pmf_free: np.ndarray
    pmf_adsorbed: np.ndarray

    def pmf(self, final: Phase | None = None) -> np.ndarray:
        """Закон K_n (условный по конечной фазе, если она задана)"""
        if final is None:
            return self.pmf_free + self.pmf_adsorbed
        weights = self.pmf_free if final is Phase.FREE else self.pmf_adsorbed
        mass = weights.sum()
        if mass <= 0:
            raise ParameterError(f"Фаза {final.value} в момент n недостижима")
        return weights / mass

    def mass(self, final: Phase | None = None) -> float:
        if final is None:
            return 1.0
        return float((self.pmf_free if final is Phase.FREE else self.pmf_adsorbed).sum())

    def central_moments(self, final: Phase | None = None) -> tuple[float, float, float]:
        """(E[K], Var K, E[(K - EK)^3])"""
        p = self.pmf(final)
        k = np.arange(p.size, dtype=float)
        mean = math.fsum(p * k)
        dev = k - mean
        return mean, math.fsum(p * dev ** 2), math.fsum(p * dev ** 3)


def _check_ab(a: float, b: float):
    if not (0.0 <= a <= 1.0 and 0.0 <= b <= 1.0):
        raise ParameterError(f"Вероятности перехода вне [0, 1]: a={a}, b={b}")
    if a + b <= 0:
        raise ParameterError("a + b = 0: стационарный закон не определён")


def mean_Kn(a: float, b: float, n: int) -> float:
    """E[K_n] = a n/(a+b) при равновесном начале"""
    _check_ab(a, b)
    return a * n / (a + b)


def var_Kn(a: float, b: float, n: int) -> float:
    """
    Дисперсия числа свободных интервалов при равновесном начале

    Args:
        a: Вероятность a -> f за шаг
        b: Вероятность f -> a за шаг
        n: Число шагов

    Returns:
        float: Var K_n
    """
    _check_ab(a, b)
    s = a + b
    r = 1.0 - s
    return a * b * (2.0 - s) * n / s ** 3 - 2.0 * a * b * r * (1.0 - r ** n) / s ** 4


def mean_Kn_free(a: float, b: float, n: int) -> float:
    """
    E[K_n | свободна в момент n] при равновесном начале

    Считаются фазы в точках dt, 2dt, ..., n dt.
    """
    _check_ab(a, b)
    s = a + b
    r = 1.0 - s
    return a * n / s + b * (1.0 - r ** n) / s ** 2


def var_Kn_free(a: float, b: float, n: int) -> float:
    """Var[K_n | свободна в момент n] при равновесном начале (тот же счёт, что mean_Kn_free)"""
    _check_ab(a, b)
    s = a + b
    r = 1.0 - s
    linear = (a * b * (2.0 - s) / s ** 3 + 2.0 * b * (a - b) * r ** n / s ** 3) * n
    single = (b * (3.0 * a - b) / s ** 3 - 4.0 * a * b / s ** 4) * (1.0 - r ** n)
    double = b ** 2 / s ** 4 * (1.0 - r ** (2 * n))
    return linear + single + double


def _discrete_weights(initial, a: float, b: float) -> tuple[float, float]:
    if isinstance(initial, tuple):
        return initial
    initial = InitialCondition.coerce(initial)
    if initial is InitialCondition.EQUILIBRIUM:
        _check_ab(a, b)
        return a / (a + b), b / (a + b)
    return (1.0, 0.0) if initial is InitialCondition.FREE else (0.0, 1.0)


def kn_distribution(
    a: float,
    b: float,
    n: int,
    initial: InitialCondition | Phase | str | tuple = InitialCondition.EQUILIBRIUM
) -> KnDistribution:
    """
    Точный закон K_n прямой рекурсией

    Интервал засчитывается как свободный по фазе в его начале, смена фазы
    происходит в конце интервала.

    Args:
        a: Вероятность a -> f
        b: Вероятность f -> a
        n: Число шагов
        initial: Начальное условие или пара масс (w_f, w_a)

    Returns:
        KnDistribution: Совместный закон (K_n, фаза в момент n)
    """
    if n < 0:
        raise ParameterError(f"n должно быть >= 0, получено {n}")
    w_f, w_a = _discrete_weights(initial, a, b)

    free = np.zeros(n + 1)
    adsorbed = np.zeros(n + 1)
    free[0], adsorbed[0] = w_f, w_a

    for _ in range(n):
        counted = np.zeros(n + 1)
        counted[1:] = free[:-1]
        free, adsorbed = (1.0 - b) * counted + a * adsorbed, b * counted + (1.0 - a) * adsorbed

    return KnDistribution(pmf_free=free, pmf_adsorbed=adsorbed)


def third_central_moment_random_sum(
    mean_k: float,
    var_k: float,
    third_k: float,
    mean_y: float,
    var_y: float,
    third_y: float
) -> float:
    """
    Третий центральный момент случайной суммы K независимых слагаемых Y

    E[K] E[(Y-EY)^3] + 3 E[Y] Var Y Var K + (EY)^3 E[(K-EK)^3]
    """
    return mean_k * third_y + 3.0 * mean_y * var_y * var_k + mean_y ** 3 * third_k


def moments_S_discrete(
    dk: DiscreteKinetics,
    tp: TransportParams,
    initial: InitialCondition | Phase | str = InitialCondition.EQUILIBRIUM,
    conditioning: Phase | None = None,
    y_third_central: float = 0.0
) -> MomentSet:
    """
    Моменты S(n dt) дискретной схемы через формулы случайных сумм

    Слагаемые Y = X + v dt имеют среднее v dt, дисперсию 2D dt и заданный
    третий центральный момент (0 для гауссовых приращений).

    Args:
        dk: Дискретная кинетика
        tp: Параметры переноса
        initial: Начальное условие
        conditioning: Фаза в момент n (None - без условия)
        y_third_central: Третий центральный момент слагаемого

    Returns:
        MomentSet: Среднее, дисперсия, третий центральный момент
    """
    initial = InitialCondition.coerce(initial)
    mean_y = tp.v * dk.dt
    var_y = 2.0 * tp.d * dk.dt

    law = kn_distribution(dk.a, dk.b, dk.n, initial)
    mean_k, var_k, third_k = law.central_moments(conditioning)

    if initial is InitialCondition.EQUILIBRIUM and conditioning is None:
        mean_k = mean_Kn(dk.a, dk.b, dk.n)
        var_k = var_Kn(dk.a, dk.b, dk.n)

    return MomentSet(
        mean=mean_k * mean_y,
        variance=mean_k * var_y + var_k * mean_y ** 2,
        t=dk.horizon,
        conditioning=conditioning,
        initial=initial,
        third_central=third_central_moment_random_sum(mean_k, var_k, third_k, mean_y, var_y, y_third_central),
        mass=law.mass(conditioning),
    )


def free_time_moments(kin: KineticsParams, t: float, order: int = 2) -> np.ndarray:
    """
    Моменты времени пребывания в свободной фазе

    Экспонента блочной матрицы [[Q, V, 0...], [0, Q, V...], ...] с V = diag(1, 0):
    блок (0, k) равен E[tau^k/k! 1{X_t = j} | X_0 = i].

    Args:
        kin: Скорости
        t: Время
        order: Старший порядок

    Returns:
        np.ndarray: M[k, i, j] = E[tau^k 1{X_t = j} | X_0 = i], k = 0..order
    """
    if t < 0:
        raise ParameterError(f"t должно быть >= 0, получено {t}")
    size = order + 1
    block = np.zeros((2 * size, 2 * size))
    occupation = np.diag([1.0, 0.0])
    for k in range(size):
        block[2 * k:2 * k + 2, 2 * k:2 * k + 2] = kin.generator
        if k + 1 < size:
            block[2 * k:2 * k + 2, 2 * k + 2:2 * k + 4] = occupation

    exponent = expm(block * t)
    return np.array([math.factorial(k) * exponent[0:2, 2 * k:2 * k + 2] for k in range(size)])


def _raw_S_moments(kin, tp, t, initial: InitialCondition) -> np.ndarray:
    # R[p, j] = E[S^p 1{X_t = j}], p = 0..4
    w = np.array(initial.weights(kin))
    tau = np.einsum("i,kij->kj", w, free_time_moments(kin, t, order=4))
    v, d = tp.v, tp.d
    return np.array([
        tau[0],
        v * tau[1],
        v ** 2 * tau[2] + 2.0 * d * tau[1],
        v ** 3 * tau[3] + 6.0 * d * v * tau[2],
        v ** 4 * tau[4] + 12.0 * d * v ** 2 * tau[3] + 12.0 * d ** 2 * tau[2],
    ])


def _centralize(raw: np.ndarray) -> tuple[float, float, float, float, float]:
    mass = raw[0]
    if mass <= 0:
        raise ParameterError("Условие по фазе имеет нулевую вероятность")
    m1, m2, m3, m4 = raw[1:] / mass
    variance = m2 - m1 ** 2
    third = m3 - 3.0 * m1 * m2 + 2.0 * m1 ** 3
    fourth = m4 - 4.0 * m1 * m3 + 6.0 * m1 ** 2 * m2 - 3.0 * m1 ** 4
    return float(mass), float(m1), float(max(variance, 0.0)), float(third), float(fourth)


def moments_S_numeric(
    kin: KineticsParams,
    tp: TransportParams,
    t: float,
    conditioning: Phase | None = None,
    initial: InitialCondition | Phase | str = InitialCondition.EQUILIBRIUM
) -> MomentSet:
    """
    Моменты S(t) через точные моменты tau

    Некоторированные моменты по начальным фазам складываются с весами, и
    только затем центрируются. Условие "сорбирована в t" получается
    балансом: полный момент минус условный по свободной фазе.
    """
    initial = InitialCondition.coerce(initial)
    raw = _raw_S_moments(kin, tp, t, initial)

    if conditioning is None:
        selected = raw.sum(axis=1)
    elif conditioning is Phase.FREE:
        selected = raw[:, 0]
    else:
        selected = raw.sum(axis=1) - raw[:, 0]

    mass, mean, variance, third, fourth = _centralize(selected)
    return MomentSet(
        mean=mean,
        variance=variance,
        t=float(t),
        conditioning=conditioning,
        initial=initial,
        third_central=third,
        fourth_central=fourth,
        mass=mass,
    )


def _equilibrium_mean_variance(kin, tp, t) -> tuple[float, float]:
    lam, mu = kin.lambda_, kin.mu
    k = kin.total_rate
    v, d = tp.v, tp.d
    decay = -math.expm1(-k * t)
    mean = kin.pi_f * v * t
    variance = (
        kin.pi_f * 2.0 * d * t
        + 2.0 * lam * mu * v ** 2 * t / k ** 3
        - 2.0 * lam * mu * v ** 2 * decay / k ** 4
    )
    return mean, variance


def _free_conditioned_mean_variance(kin, tp, t) -> tuple[float, float]:
    lam, mu = kin.lambda_, kin.mu
    k = kin.total_rate
    v, d = tp.v, tp.d
    decay = -math.expm1(-k * t)
    decay2 = -math.expm1(-2.0 * k * t)
    mean = kin.pi_f * v * t + lam * v * decay / k ** 2
    variance = (
        kin.pi_f * 2.0 * d * t
        + lam * decay * 2.0 * d / k ** 2
        + (2.0 * lam * mu / k ** 3 + 2.0 * lam * (mu - lam) * math.exp(-k * t) / k ** 3) * v ** 2 * t
        - 4.0 * lam * mu * decay * v ** 2 / k ** 4
        + lam ** 2 * decay2 * v ** 2 / k ** 4
    )
    return mean, variance


def moments_S(
    kin: KineticsParams,
    tp: TransportParams,
    t: float,
    conditioning: Phase | None = None,
    initial: InitialCondition | Phase | str = InitialCondition.EQUILIBRIUM
) -> MomentSet:
    """
    Моменты положения частицы в момент t

    Замкнутые формулы: равновесное начало без условия и с условием
    "свободна в t", начало и конец в свободной фазе (sigma_ff_sq).
    Остальные сочетания и третий/четвёртый моменты считаются через точные
    моменты времени пребывания.

    Args:
        kin: Скорости
        tp: Параметры переноса
        t: Время (>= 0)
        conditioning: Фаза в момент t или None
        initial: Начальное условие

    Returns:
        MomentSet: Моменты
    """
    if t < 0:
        raise ParameterError(f"t должно быть >= 0, получено {t}")
    initial = InitialCondition.coerce(initial)
    numeric = moments_S_numeric(kin, tp, t, conditioning, initial)

    mean, variance = numeric.mean, numeric.variance
    if initial is InitialCondition.EQUILIBRIUM and conditioning is None:
        mean, variance = _equilibrium_mean_variance(kin, tp, t)
    elif initial is InitialCondition.EQUILIBRIUM and conditioning is Phase.FREE:
        mean, variance = _free_conditioned_mean_variance(kin, tp, t)
    elif initial is InitialCondition.FREE and conditioning is Phase.FREE and kin.mu > 0:
        variance = sigma_ff_sq(kin, tp, t)

    return MomentSet(
        mean=mean,
        variance=variance,
        t=float(t),
        conditioning=conditioning,
        initial=initial,
        third_central=numeric.third_central,
        fourth_central=numeric.fourth_central,
        mass=numeric.mass,
    )


def sigma_ff_sq(kin: KineticsParams, tp: TransportParams, t: float) -> float:
    """
    Нормированный центральный второй момент: свободна в 0 и в момент t

    Исправленная форма с k = mu, beta = lambda/mu, A = exp(-(beta+1) k t);
    в слагаемом 3 beta^2 A - 3 - beta (A - 1) стоит минус.

    Args:
        kin: Скорости (mu > 0)
        tp: Параметры переноса
        t: Время

    Returns:
        float: sigma^2_ff(t)
    """
    if kin.mu <= 0:
        raise DegenerateKineticsError("sigma_ff^2 требует mu > 0")
    if t < 0:
        raise ParameterError(f"t должно быть >= 0, получено {t}")

    k = kin.mu
    beta = kin.lambda_ / kin.mu
    v, d = tp.v, tp.d
    a = math.exp(-(beta + 1.0) * k * t)
    one_minus_a = -math.expm1(-(beta + 1.0) * k * t)
    den = 1.0 + beta * a

    return (
        t ** 2 * a * v ** 2 * beta * (beta - 1.0) ** 2 / ((beta + 1.0) ** 2 * den ** 2)
        + t * (2.0 * d / (beta + 1.0) + 2.0 * v ** 2 * beta / (k * (beta + 1.0) ** 3))
        + t * a * 4.0 * v ** 2 * beta * (-beta ** 2 * a - beta ** 2 - beta + 1.0) / (k * den ** 2 * (beta + 1.0) ** 3)
        + t * a * 2.0 * d * beta * (beta - 1.0) / ((beta + 1.0) * den)
        + 2.0 * v ** 2 * beta * one_minus_a * (3.0 * beta ** 2 * a - 3.0 - beta * (a - 1.0))
        / (k ** 2 * den ** 2 * (beta + 1.0) ** 4)
        + 4.0 * d * beta * one_minus_a / (k * den * (beta + 1.0) ** 2)
    )


def effective_coefficients(
    kin: KineticsParams,
    tp: TransportParams,
    t: float,
    initial: InitialCondition | Phase | str = InitialCondition.EQUILIBRIUM
) -> tuple[float, float]:
    """
    Мгновенные эффективные скорость dE[S]/dt и дисперсия (1/2) dVar S/dt

    При больших t стремятся к v_e и D_e.

    Returns:
        tuple: (v_eff, D_eff)
    """
    initial = InitialCondition.coerce(initial)
    if initial is InitialCondition.EQUILIBRIUM:
        k = kin.total_rate
        decay = -math.expm1(-k * t)
        v_eff = kin.pi_f * tp.v
        d_eff = kin.pi_f * tp.d + kin.lambda_ * kin.mu * tp.v ** 2 * decay / k ** 3
        return v_eff, d_eff

    h = 1e-5 * max(t, 1.0)
    lo = max(t - h, 0.0)
    hi = t + h
    m_lo = moments_S_numeric(kin, tp, lo, None, initial)
    m_hi = moments_S_numeric(kin, tp, hi, None, initial)
    return (m_hi.mean - m_lo.mean) / (hi - lo), 0.5 * (m_hi.variance - m_lo.variance) / (hi - lo)


def moment_curve(
    kin: KineticsParams,
    tp: TransportParams,
    times,
    conditioning: Phase | None = None,
    initial: InitialCondition | Phase | str = InitialCondition.EQUILIBRIUM
) -> pd.DataFrame:
    """Таблица моментов по времени: t, mean, variance, conditioning, initial"""
    initial = InitialCondition.coerce(initial)
    rows = []
    for t in times:
        moments = moments_S(kin, tp, float(t), conditioning, initial)
        rows.append({
            "t": moments.t,
            "mean": moments.mean,
            "variance": moments.variance,
            "skewness": moments.skewness,
            "excess_kurtosis": moments.excess_kurtosis,
            "conditioning": conditioning.value if conditioning else "none",
            "initial": initial.value,
        })
    return pd.DataFrame(rows)
