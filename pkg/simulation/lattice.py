"""
Решёточный оракул: точная итерация дискретных мастер-уравнений
"""
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd

from core.exceptions import DomainTooSmallError, ParameterError
from core.params import InitialCondition, KineticsParams, Phase, TransportParams
from utils.logger import setup_logger

logger = setup_logger()


BOUNDARY_TOLERANCE = 1e-12
DIFFUSION_LENGTHS = 6.0


@dataclass(frozen=True)
class LatticeConfig:
    """
    Решётка dx = c*sqrt(dt) с ячейками -half_width..half_width

    Вероятности шагов свободной частицы: beta (вправо), delta (влево),
    alpha (на месте) подобраны так, что среднее смещение за шаг vdt,
    дисперсия 2Ddt.
    """
    dt: float
    c: float
    half_width: int
    v: float
    d: float
    horizon: float

    def __post_init__(self):
        if self.dt <= 0:
            raise ParameterError(f"Шаг dt должен быть > 0, получено {self.dt}")
        if self.c <= math.sqrt(2.0 * self.d):
            raise ParameterError(f"Требуется c > sqrt(2D): c={self.c}, D={self.d}")
        for name in ("beta", "delta", "alpha"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ParameterError(f"Вероятность {name}={value:.6g} вне [0, 1]: уменьшите dt или увеличьте c")

    @classmethod
    def build(
        cls,
        tp: TransportParams,
        dt: float,
        horizon: float,
        c: float | None = None,
        half_width: int | None = None
    ) -> "LatticeConfig":
        """
        Конфигурация с правилами по умолчанию

        Args:
            tp: Параметры переноса (v, D)
            dt: Шаг по времени
            horizon: Конечное время расчёта
            c: Масштаб dx = c*sqrt(dt) (None - default_c)
            half_width: Полуширина в ячейках (None - с запасом под горизонт)

        Returns:
            LatticeConfig: Проверенная конфигурация
        """
        if dt <= 0:
            raise ParameterError(f"Шаг dt должен быть > 0, получено {dt}")
        c = default_c(tp, dt) if c is None else float(c)
        if half_width is None:
            dx = c * math.sqrt(dt)
            half_width = math.ceil(1.5 * required_reach(tp, horizon) / dx) + 10
        return cls(dt=float(dt), c=c, half_width=int(half_width), v=tp.v, d=tp.d, horizon=float(horizon))

    @property
    def dx(self) -> float:
        return self.c * math.sqrt(self.dt)

    @property
    def beta(self) -> float:
        return self.d / self.c ** 2 + self.v ** 2 * self.dt / (2 * self.c ** 2) + self.v * math.sqrt(self.dt) / (2 * self.c)

    @property
    def delta(self) -> float:
        return self.d / self.c ** 2 + self.v ** 2 * self.dt / (2 * self.c ** 2) - self.v * math.sqrt(self.dt) / (2 * self.c)

    @property
    def alpha(self) -> float:
        return 1.0 - 2.0 * self.d / self.c ** 2 - self.v ** 2 * self.dt / self.c ** 2

    @property
    def n_cells(self) -> int:
        return 2 * self.half_width + 1

    @property
    def positions(self) -> np.ndarray:
        """Координаты ячеек i*dx"""
        return np.arange(-self.half_width, self.half_width + 1) * self.dx


@dataclass(frozen=True)
class LatticeState:
    """Вероятности p_f(i, n), p_a(i, n) после n шагов"""
    p_f: np.ndarray
    p_a: np.ndarray
    n: int = 0

    @property
    def mass(self) -> float:
        return math.fsum(self.p_f) + math.fsum(self.p_a)

    def to_frame(self, cfg: LatticeConfig) -> pd.DataFrame:
        """Снимок для экспорта: cell, x, p_f, p_a"""
        return pd.DataFrame({
            "cell": np.arange(-cfg.half_width, cfg.half_width + 1),
            "x": cfg.positions,
            "p_f": self.p_f,
            "p_a": self.p_a,
        })


@dataclass(frozen=True)
class PhaseMoments:
    """Масса и нормированные моменты положения внутри фазы"""
    mass: float
    mean: float
    variance: float
    skewness: float
    kurtosis: float


@dataclass(frozen=True)
class LatticeMoments:
    free: PhaseMoments
    adsorbed: PhaseMoments
    total: PhaseMoments

    def by_phase(self, phase: Phase) -> PhaseMoments:
        return self.free if phase is Phase.FREE else self.adsorbed


def default_c(tp: TransportParams, dt: float) -> float:
    """c = 2*sqrt(2D) + v*sqrt(dt); при v = D = 0 решётка единичная"""
    c = 2.0 * math.sqrt(2.0 * tp.d) + tp.v * math.sqrt(dt)
    return c if c > 0 else 1.0


def required_reach(tp: TransportParams, horizon: float) -> float:
    """Снос плюс 6 диффузионных длин к горизонту"""
    return tp.v * horizon + DIFFUSION_LENGTHS * math.sqrt(2.0 * tp.d * horizon)


def init_lattice(cfg: LatticeConfig, initial: tuple[float, float]) -> LatticeState:
    """
    Дельта-импульс в ячейке 0

    Args:
        cfg: Конфигурация решётки
        initial: Массы (w_f, w_a) в ячейке 0

    Returns:
        LatticeState: Начальное состояние
    """
    w_f, w_a = initial
    if w_f < 0 or w_a < 0 or abs(w_f + w_a - 1.0) > 1e-12:
        raise ParameterError(f"Начальные массы должны быть неотрицательны и давать 1: ({w_f}, {w_a})")

    reach = required_reach(TransportParams(v=cfg.v, d_l=cfg.d), cfg.horizon)
    if cfg.half_width * cfg.dx <= reach:
        raise DomainTooSmallError(
            f"Полуширина {cfg.half_width * cfg.dx:.6g} меньше сноса и 6 диффузионных длин {reach:.6g}"
        )

    p_f = np.zeros(cfg.n_cells)
    p_a = np.zeros(cfg.n_cells)
    p_f[cfg.half_width] = w_f
    p_a[cfg.half_width] = w_a
    return LatticeState(p_f=p_f, p_a=p_a, n=0)


def _move(p: np.ndarray, cfg: LatticeConfig) -> np.ndarray:
    moved = cfg.alpha * p
    moved[1:] += cfg.beta * p[:-1]
    moved[:-1] += cfg.delta * p[1:]
    # Жёсткая стенка: масса у края остаётся в крайней ячейке
    moved[-1] += cfg.beta * p[-1]
    moved[0] += cfg.delta * p[0]
    return moved


def step_lattice(state: LatticeState, cfg: LatticeConfig, kin: KineticsParams) -> LatticeState:
    """
    Один шаг мастер-уравнений

    Свободная масса сначала перемещается (beta, delta, alpha), затем доля
    lambda*dt сорбируется; сорбированная масса неподвижна и освобождается
    с вероятностью mu*dt.

    Args:
        state: Текущее состояние
        cfg: Конфигурация решётки
        kin: Скорости

    Returns:
        LatticeState: Состояние на шаге n+1
    """
    capture = kin.lambda_ * cfg.dt
    release = kin.mu * cfg.dt
    if capture >= 1.0 or release >= 1.0:
        raise ParameterError(f"Требуется lambda*dt < 1 и mu*dt < 1: {capture:.6g}, {release:.6g}")

    moved = _move(state.p_f, cfg)
    p_f = (1.0 - capture) * moved + release * state.p_a
    p_a = capture * moved + (1.0 - release) * state.p_a

    edge = p_f[0] + p_f[-1] + p_a[0] + p_a[-1]
    if edge > BOUNDARY_TOLERANCE:
        raise DomainTooSmallError(f"Масса на границе решётки {edge:.3g} на шаге {state.n + 1}")

    return LatticeState(p_f=p_f, p_a=p_a, n=state.n + 1)


def _phase_moments(weights: np.ndarray, x: np.ndarray) -> PhaseMoments:
    mass = math.fsum(weights)
    if mass <= 0:
        return PhaseMoments(0.0, math.nan, math.nan, math.nan, math.nan)
    mean = math.fsum(weights * x) / mass
    dev = x - mean
    variance = math.fsum(weights * dev ** 2) / mass
    if variance <= 0:
        return PhaseMoments(mass, mean, variance, math.nan, math.nan)
    skewness = math.fsum(weights * dev ** 3) / mass / variance ** 1.5
    kurtosis = math.fsum(weights * dev ** 4) / mass / variance ** 2
    return PhaseMoments(mass, mean, variance, skewness, kurtosis)


def lattice_moments(state: LatticeState, cfg: LatticeConfig) -> LatticeMoments:
    """
    Моменты положения i*dx по p_f, p_a и p_f + p_a

    Суммирование компенсированное (math.fsum).

    Returns:
        LatticeMoments: Моменты по фазам и всего облака
    """
    x = cfg.positions
    return LatticeMoments(
        free=_phase_moments(state.p_f, x),
        adsorbed=_phase_moments(state.p_a, x),
        total=_phase_moments(state.p_f + state.p_a, x),
    )


def run_lattice(
    cfg: LatticeConfig,
    kin: KineticsParams,
    initial: InitialCondition | Phase | str = InitialCondition.EQUILIBRIUM,
    steps: int | None = None
) -> LatticeState:
    """
    Инициализация и steps шагов (по умолчанию до горизонта конфигурации)

    Returns:
        LatticeState: Конечное состояние
    """
    initial = InitialCondition.coerce(initial)
    if steps is None:
        steps = int(round(cfg.horizon / cfg.dt))
    if steps < 0:
        raise ParameterError(f"Число шагов должно быть >= 0, получено {steps}")

    logger.info(
        f"Решётка: шагов={steps}, dt={cfg.dt}, dx={cfg.dx:.6g}, ячеек={cfg.n_cells}, "
        f"beta={cfg.beta:.6g}, delta={cfg.delta:.6g}, alpha={cfg.alpha:.6g}"
    )

    state = init_lattice(cfg, initial.weights(kin))
    for _ in range(steps):
        state = step_lattice(state, cfg, kin)

    logger.debug(f"Решётка: масса после {steps} шагов = {state.mass:.16g}")
    return state
