"""
Плотности времени пребывания в свободной фазе (Гиддингс-Айринг),
равновесные смеси, одномерные профили, режимы переноса
"""
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import integrate, stats

from analytics.moments import free_time_moments
from analytics.quadrature import integrate_residence
from analytics.special import bessel_i0e, i1_over_z_scaled
from core.exceptions import ParameterError
from core.params import InitialCondition, KineticsParams, Phase, TransportParams, derive, unscale_x


DEFAULT_TOL = 1e-8


class Regime(str, Enum):
    """Режим переноса"""
    WAVE = "wave"
    TELEGRAPH = "telegraph"
    DIFFUSION = "diffusion"


@dataclass(frozen=True)
class ResidenceDensity:
    """
    Плотность tau на сетке и атомы в tau = 0 и tau = t

    final = None означает сумму по конечным фазам.
    """
    tau: np.ndarray
    values: np.ndarray
    atom_at_0: float
    atom_at_t: float
    initial: InitialCondition
    final: Phase | None
    t: float


@dataclass(frozen=True)
class Profile1D:
    """Одномерный профиль облака N_f, N_a, N_tot по x и атомы в x = 0, x = vt"""
    x: np.ndarray
    x_hat: np.ndarray | None
    n_free: np.ndarray
    n_adsorbed: np.ndarray
    gaussian_ref: np.ndarray
    atom_x0: float
    atom_xvt: float
    t: float
    v: float
    kinetics: KineticsParams
    initial: InitialCondition

    @property
    def n_total(self) -> np.ndarray:
        return self.n_free + self.n_adsorbed


@dataclass(frozen=True)
class RegimeReport:
    """Классификация режима и показатели, по которым она сделана"""
    regime: Regime
    atom_free: float
    atom_adsorbed: float
    pulse_free: float
    pulse_adsorbed: float
    skewness: float
    excess_kurtosis: float


def _weights(initial, kin: KineticsParams) -> tuple[float, float]:
    return InitialCondition.coerce(initial).weights(kin)


def pair_density(i: Phase, j: Phase, tau, t: float, kin: KineticsParams) -> np.ndarray:
    """
    Непрерывная часть h_ij(tau, t); ноль вне [0, t]

    Экспонента собрана с масштабированными функциями Бесселя, показатель
    theta - lambda tau - mu (t - tau) не положителен.
    """
    tau = np.asarray(tau, dtype=float)
    lam, mu = kin.lambda_, kin.mu
    inside = (tau >= 0.0) & (tau <= t)
    free_time = np.clip(tau, 0.0, t)
    bound_time = t - free_time

    theta = 2.0 * np.sqrt(lam * mu * free_time * bound_time)
    scale = np.exp(theta - lam * free_time - mu * bound_time)

    if i is Phase.FREE and j is Phase.FREE:
        values = 2.0 * lam * mu * free_time * scale * i1_over_z_scaled(theta)
    elif i is Phase.ADSORBED and j is Phase.ADSORBED:
        values = 2.0 * lam * mu * bound_time * scale * i1_over_z_scaled(theta)
    elif i is Phase.FREE:
        values = lam * scale * bessel_i0e(theta)
    else:
        values = mu * scale * bessel_i0e(theta)

    return np.where(inside, values, 0.0)


def pair_atoms(i: Phase, j: Phase, t: float, kin: KineticsParams) -> tuple[float, float]:
    """Атомы (в tau = 0, в tau = t) у h_ij"""
    if i is Phase.FREE and j is Phase.FREE:
        return 0.0, math.exp(-kin.lambda_ * t)
    if i is Phase.ADSORBED and j is Phase.ADSORBED:
        return math.exp(-kin.mu * t), 0.0
    return 0.0, 0.0


def mixture_density(initial, final: Phase | None, tau, t: float, kin: KineticsParams) -> np.ndarray:
    """Непрерывная часть смеси w_f h_f. + w_a h_a. по конечной фазе (None - сумма)"""
    w_f, w_a = _weights(initial, kin)
    finals = (Phase.FREE, Phase.ADSORBED) if final is None else (final,)
    total = 0.0
    for j in finals:
        if w_f:
            total = total + w_f * pair_density(Phase.FREE, j, tau, t, kin)
        if w_a:
            total = total + w_a * pair_density(Phase.ADSORBED, j, tau, t, kin)
    return np.broadcast_to(np.asarray(total, dtype=float), np.shape(tau)).copy()


def mixture_atoms(initial, final: Phase | None, t: float, kin: KineticsParams) -> tuple[float, float]:
    """Атомы смеси: (w_a e^{-mu t} если учтена фаза a, w_f e^{-lambda t} если учтена фаза f)"""
    w_f, w_a = _weights(initial, kin)
    atom_0 = w_a * math.exp(-kin.mu * t) if final in (None, Phase.ADSORBED) else 0.0
    atom_t = w_f * math.exp(-kin.lambda_ * t) if final in (None, Phase.FREE) else 0.0
    return atom_0, atom_t


def _check_time(t: float):
    if t <= 0:
        raise ParameterError(f"t должно быть > 0, получено {t}")


def residence_density(i: Phase, j: Phase, t: float, kin: KineticsParams, tau_grid) -> ResidenceDensity:
    """
    Плотность h_ij на сетке tau

    Args:
        i: Начальная фаза
        j: Фаза в момент t
        t: Время
        kin: Скорости
        tau_grid: Сетка tau

    Returns:
        ResidenceDensity: Значения и атомы
    """
    _check_time(t)
    tau = np.asarray(tau_grid, dtype=float)
    atom_0, atom_t = pair_atoms(i, j, t, kin)
    return ResidenceDensity(
        tau=tau,
        values=pair_density(i, j, tau, t, kin),
        atom_at_0=atom_0,
        atom_at_t=atom_t,
        initial=InitialCondition.coerce(i),
        final=j,
        t=float(t),
    )


def equilibrium_density(j: Phase | None, t: float, kin: KineticsParams, tau_grid) -> ResidenceDensity:
    """
    Равновесная смесь h_j^eq = pi_f h_fj + pi_a h_aj (j = None - h_tot^eq)
    """
    _check_time(t)
    tau = np.asarray(tau_grid, dtype=float)
    atom_0, atom_t = mixture_atoms(InitialCondition.EQUILIBRIUM, j, t, kin)
    return ResidenceDensity(
        tau=tau,
        values=mixture_density(InitialCondition.EQUILIBRIUM, j, tau, t, kin),
        atom_at_0=atom_0,
        atom_at_t=atom_t,
        initial=InitialCondition.EQUILIBRIUM,
        final=j,
        t=float(t),
    )


def residence_moments(
    initial,
    final: Phase | None,
    t: float,
    kin: KineticsParams,
    order: int = 2,
    tol: float = DEFAULT_TOL,
    max_panels: int = 4096
) -> np.ndarray:
    """
    Нецентрированные моменты int tau^k h dtau + атомы, k = 0..order

    Returns:
        np.ndarray: Моменты длины order+1
    """
    _check_time(t)
    powers = np.arange(order + 1)

    def integrand(tau):
        return tau[None, :] ** powers[:, None] * mixture_density(initial, final, tau, t, kin)[None, :]

    continuous = integrate_residence(integrand, t, tol=tol, max_panels=max_panels)
    atom_0, atom_t = mixture_atoms(initial, final, t, kin)
    atoms = atom_t * float(t) ** powers
    atoms[0] += atom_0
    return np.asarray(continuous) + atoms


def residence_mass(
    i,
    j: Phase | None,
    t: float,
    kin: KineticsParams,
    tol: float = DEFAULT_TOL
) -> float:
    """Полная масса int h_ij dtau + атомы (равна p_ij(t))"""
    return float(residence_moments(i, j, t, kin, order=0, tol=tol)[0])


def continuous_cdf(initial, final: Phase | None, t: float, kin: KineticsParams, n_points: int = 4001):
    """
    Функция распределения непрерывной части, нормированная на 1

    Накопленный интеграл по phi (tau = t sin^2 phi) на равномерной сетке,
    затем линейная интерполяция.

    Returns:
        callable: F(tau) на [0, t]
    """
    _check_time(t)
    phi = np.linspace(0.0, 0.5 * math.pi, n_points)
    tau = t * np.sin(phi) ** 2
    integrand = mixture_density(initial, final, tau, t, kin) * t * np.sin(2.0 * phi)
    cumulative = integrate.cumulative_trapezoid(integrand, phi, initial=0.0)
    if cumulative[-1] <= 0:
        raise ParameterError("Непрерывная часть плотности имеет нулевую массу")
    cumulative /= cumulative[-1]

    def cdf(x):
        return np.interp(x, tau, cumulative, left=0.0, right=1.0)

    return cdf


def profile_1d(
    t: float,
    kin: KineticsParams,
    v: float,
    x_grid,
    initial=InitialCondition.EQUILIBRIUM,
    scaled: bool = False
) -> Profile1D:
    """
    Профиль облака без локальной дисперсии: N_j(x) = h_j(x/v, t)/v

    Args:
        t: Время
        kin: Скорости
        v: Скорость адвекции (> 0)
        x_grid: Сетка x, либо x^ при scaled=True
        initial: Начальное условие
        scaled: Сетка задана в масштабированной координате

    Returns:
        Profile1D: Профили фаз, атомы и гауссова опорная кривая (v*t, 2D*t)
    """
    _check_time(t)
    if v <= 0:
        raise ParameterError(f"Профиль требует v > 0, получено {v}")
    initial = InitialCondition.coerce(initial)
    dq = derive(kin, TransportParams(v=v, d_l=0.0))

    grid = np.asarray(x_grid, dtype=float)
    if scaled:
        x_hat = grid
        x = np.asarray(unscale_x(grid, t, dq))
    else:
        x = grid
        x_hat = None
        if dq.d_star > 0:
            x_hat = (x - dq.v_star * t) / math.sqrt(2.0 * dq.d_star * t)

    tau = x / v
    n_free = mixture_density(initial, Phase.FREE, tau, t, kin) / v
    n_adsorbed = mixture_density(initial, Phase.ADSORBED, tau, t, kin) / v

    if dq.d_star > 0:
        gaussian = stats.norm.pdf(x, loc=dq.v_star * t, scale=math.sqrt(2.0 * dq.d_star * t))
    else:
        gaussian = np.zeros_like(x)

    atom_0, atom_t = mixture_atoms(initial, None, t, kin)
    return Profile1D(
        x=x,
        x_hat=x_hat,
        n_free=n_free,
        n_adsorbed=n_adsorbed,
        gaussian_ref=gaussian,
        atom_x0=atom_0,
        atom_xvt=atom_t,
        t=float(t),
        v=float(v),
        kinetics=kin,
        initial=initial,
    )


def gaussian_l1_distance(profile: Profile1D, tol: float = 1e-7) -> float:
    """
    L1-расстояние между полным профилем (с атомами) и гауссианой (v*t, 2D*t)

    Считается квадратурой на всей опоре [0, vt], а не по сетке профиля.
    """
    kin, v, t = profile.kinetics, profile.v, profile.t
    dq = derive(kin, TransportParams(v=v, d_l=0.0))
    if dq.d_star <= 0:
        raise ParameterError("D* = 0: гауссова опорная кривая не определена")
    mean = dq.v_star * t
    sd = math.sqrt(2.0 * dq.d_star * t)

    def integrand(tau):
        h = mixture_density(profile.initial, None, tau, t, kin)
        return np.abs(h - v * stats.norm.pdf(v * tau, loc=mean, scale=sd))

    inside = integrate_residence(integrand, t, tol=tol, max_panels=1 << 16)
    outside = stats.norm.cdf(0.0, loc=mean, scale=sd) + stats.norm.sf(v * t, loc=mean, scale=sd)
    return float(inside + outside + profile.atom_x0 + profile.atom_xvt)


def regime_check(t: float, kin: KineticsParams) -> RegimeReport:
    """
    Классификация режима: волна, телеграф, диффузия

    Волна - оба атома e^{-lambda t}, e^{-mu t} больше 0.5. Диффузия -
    t > 3/lambda, t > 3/mu и распределение tau равновесного импульса
    близко к нормальному (|асимметрия| и |избыточный эксцесс| не больше 0.1).

    Args:
        t: Время
        kin: Скорости

    Returns:
        RegimeReport: Режим и показатели
    """
    _check_time(t)
    atom_free = math.exp(-kin.lambda_ * t)
    atom_adsorbed = math.exp(-kin.mu * t)

    w = np.array(InitialCondition.EQUILIBRIUM.weights(kin))
    raw = np.einsum("i,kij->k", w, free_time_moments(kin, t, order=4))
    m1, m2, m3, m4 = raw[1:]
    variance = m2 - m1 ** 2
    if variance > 0:
        skewness = (m3 - 3 * m1 * m2 + 2 * m1 ** 3) / variance ** 1.5
        excess = (m4 - 4 * m1 * m3 + 6 * m1 ** 2 * m2 - 3 * m1 ** 4) / variance ** 2 - 3.0
    else:
        skewness = excess = math.nan

    if atom_free > 0.5 and atom_adsorbed > 0.5:
        regime = Regime.WAVE
    elif (
        kin.lambda_ > 0 and kin.mu > 0
        and t > 3.0 / kin.lambda_ and t > 3.0 / kin.mu
        and abs(skewness) <= 0.1 and abs(excess) <= 0.1
    ):
        regime = Regime.DIFFUSION
    else:
        regime = Regime.TELEGRAPH

    return RegimeReport(
        regime=regime,
        atom_free=atom_free,
        atom_adsorbed=atom_adsorbed,
        pulse_free=kin.pi_f * atom_free,
        pulse_adsorbed=kin.pi_a * atom_adsorbed,
        skewness=float(skewness),
        excess_kurtosis=float(excess),
    )
