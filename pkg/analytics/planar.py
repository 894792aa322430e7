"""
Двумерные поля облака через свёртку плотности времени пребывания
с ядром неадсорбирующегося вещества
"""
import math
from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed
from scipy.special import ndtr

from analytics.giddings import mixture_atoms, mixture_density
from analytics.quadrature import adaptive_integrate, integrate_residence
from core.exceptions import ParameterError
from core.params import (
    InitialCondition,
    KineticsParams,
    Phase,
    TransportParams,
    asymptotic_free_lead,
    derive,
    occupancy,
)
from utils.logger import setup_logger

logger = setup_logger()


CHUNK_NODES = 64
DIFFUSION_LENGTHS = 6.0


@dataclass(frozen=True)
class Grid2D:
    """Сетка центров ячеек"""
    x: np.ndarray
    y: np.ndarray

    @property
    def dx(self) -> float:
        return float(self.x[1] - self.x[0]) if self.x.size > 1 else 1.0

    @property
    def dy(self) -> float:
        return float(self.y[1] - self.y[0]) if self.y.size > 1 else 1.0

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy

    @property
    def shape(self) -> tuple[int, int]:
        return self.y.size, self.x.size

    @property
    def x_edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Левые и правые границы ячеек по x"""
        return self.x - 0.5 * self.dx, self.x + 0.5 * self.dx

    @property
    def y_edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Нижние и верхние границы ячеек по y"""
        return self.y - 0.5 * self.dy, self.y + 0.5 * self.dy


@dataclass(frozen=True)
class DensityField2D:
    """
    Поле N(x, y) на сетке (строки - y, столбцы - x)

    Атомы не попадают в значения сетки: atom_origin - точечная масса в (0, 0),
    atom_line - масса на прямой x = line_x с поперечной дисперсией line_y_variance.
    При cell_averaged=True значения - средние по ячейкам, и сумма значений на
    площадь ячейки равна массе внутри сетки.
    """
    grid: Grid2D
    values: np.ndarray
    phase: Phase | None
    t: float
    initial: InitialCondition
    atom_origin: float = 0.0
    atom_line: float = 0.0
    line_x: float = 0.0
    line_y_variance: float = 0.0
    x_hat: np.ndarray | None = None
    y_hat: np.ndarray | None = None
    cell_averaged: bool = False

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    @property
    def y(self) -> np.ndarray:
        return self.grid.y


def default_grid(kin: KineticsParams, tp: TransportParams, t: float, nx: int = 201, ny: int = 101,
                 x_min: float | None = None, x_max: float | None = None, y_max: float | None = None) -> Grid2D:
    """
    Сетка центров ячеек по [-6 sqrt(2 D_L t), vt + 6 sqrt(2 D_L t)] x [-6 sqrt(2 D_T t), 6 sqrt(2 D_T t)]

    Вверх по потоку сетка уходит на те же шесть длин диффузии, что и вниз:
    частицы, рано сорбированные у источника, расплываются в обе стороны.
    Без продольной дисперсии левая граница -1.
    """
    if nx < 2 or ny < 2:
        raise ParameterError(f"Сетка должна иметь не менее 2 узлов по осям: nx={nx}, ny={ny}")
    if x_min is None:
        x_min = -DIFFUSION_LENGTHS * math.sqrt(2.0 * tp.d_l * t) if tp.d_l > 0 else -1.0
    if x_max is None:
        x_max = tp.v * t + DIFFUSION_LENGTHS * math.sqrt(2.0 * tp.d_l * t) + (0.0 if tp.d_l > 0 else 1.0)
    if y_max is None:
        y_max = DIFFUSION_LENGTHS * math.sqrt(2.0 * tp.d_t * t) if tp.d_t > 0 else 1.0

    x_edges = np.linspace(x_min, x_max, nx + 1)
    y_edges = np.linspace(-y_max, y_max, ny + 1)
    return Grid2D(x=0.5 * (x_edges[1:] + x_edges[:-1]), y=0.5 * (y_edges[1:] + y_edges[:-1]))


def line_centred_grid(v: float, t: float, d_t: float, columns: int = 20, ny: int = 20) -> Grid2D:
    """
    Сетка, где x = 0 и x = vt - центры ячеек

    Для сравнения поля с малой D_L с полем без продольной дисперсии: атом
    tau = t и край облака у источника не пересекают границ ячеек.
    """
    if v <= 0 or t <= 0 or d_t <= 0 or columns < 1 or ny < 2:
        raise ParameterError(f"Некорректная сетка: v={v}, t={t}, D_T={d_t}, columns={columns}, ny={ny}")
    dx = v * t / columns
    y_max = DIFFUSION_LENGTHS * math.sqrt(2.0 * d_t * t)
    y_edges = np.linspace(-y_max, y_max, ny + 1)
    return Grid2D(x=dx * np.arange(columns + 2), y=0.5 * (y_edges[1:] + y_edges[:-1]))


def late_grid(kin: KineticsParams, tp: TransportParams, t: float, nx: int = 81, ny: int = 41) -> Grid2D:
    """Окно +-6 сигм вокруг поздней гауссианы свободной фазы"""
    if nx < 2 or ny < 2:
        raise ParameterError(f"Сетка должна иметь не менее 2 узлов по осям: nx={nx}, ny={ny}")
    dq = derive(kin, tp)
    centre = dq.v_star * t + asymptotic_free_lead(kin, tp.v)
    half_x = DIFFUSION_LENGTHS * math.sqrt(2.0 * dq.d_long_asym * t)
    half_y = DIFFUSION_LENGTHS * math.sqrt(2.0 * dq.d_trans_asym * t)
    return default_grid(kin, tp, t, nx, ny, x_min=centre - half_x, x_max=centre + half_x, y_max=half_y)


def _scaled_mirrors(kin, tp, t, grid):
    dq = derive(kin, tp)
    if t <= 0 or dq.d_star <= 0 or tp.d_t <= 0:
        return None, None
    x_hat = (grid.x - dq.v_star * t) / math.sqrt(2.0 * dq.d_star * t)
    y_hat = grid.y / math.sqrt(2.0 * tp.d_t * t)
    return x_hat, y_hat


def _interval_probability(lo, hi):
    """P(lo < Z < hi) для стандартной нормальной Z без потери точности в правом хвосте"""
    return np.where(lo > 0, ndtr(-lo) - ndtr(-hi), ndtr(hi) - ndtr(lo))


def _cell_probability_y(grid: Grid2D, variance):
    # Доля гауссианы N(0, variance[j]) в каждой строке сетки: (ny, m)
    sd = np.sqrt(np.asarray(variance, dtype=float))[None, :]
    bottom, top = grid.y_edges
    return _interval_probability(bottom[:, None] / sd, top[:, None] / sd)


def _transverse_cell_averages(initial, final, t, kin, v, d_t, grid, tol):
    bottom_x, top_x = grid.x_edges
    values = np.zeros(grid.shape)
    for j in range(grid.x.size):
        lo, hi = max(bottom_x[j], 0.0), min(top_x[j], v * t)
        if hi <= lo:
            continue

        def integrand(x):
            line_density = mixture_density(initial, final, x / v, t, kin) / v
            return _cell_probability_y(grid, 2.0 * d_t * x / v) * line_density[None, :]

        values[:, j] = adaptive_integrate(integrand, lo, hi, tol=tol)
    return values / grid.cell_area


def transverse_only(
    initial,
    final: Phase | None,
    t: float,
    kin: KineticsParams,
    v: float,
    d_t: float,
    grid: Grid2D,
    cell_average: bool = False,
    tol: float = 1e-10
) -> DensityField2D:
    """
    Поле без продольной дисперсии

    N(x, y) = w h(x/v, t)/v * Gauss(y; 0, 2 D_T x/v) при 0 < x < vt, иначе 0.

    Args:
        initial: Начальная фаза или равновесная смесь
        final: Фаза в момент t (None - всё облако)
        t: Время
        kin: Скорости
        v: Скорость (> 0)
        d_t: Поперечная дисперсия (> 0)
        grid: Сетка
        cell_average: Средние по ячейкам вместо значений в узлах; атом tau = t
            тогда входит в столбец, содержащий x = vt
        tol: Абсолютная точность интеграла по x в ячейке (для cell_average)

    Returns:
        DensityField2D: Поле; атом tau = 0 - точка в начале координат,
        атом tau = t - прямая x = vt с дисперсией 2 D_T t
    """
    if v <= 0 or d_t <= 0 or t <= 0:
        raise ParameterError(f"Требуется v > 0, D_T > 0, t > 0: v={v}, D_T={d_t}, t={t}")
    initial = InitialCondition.coerce(initial)
    atom_0, atom_t = mixture_atoms(initial, final, t, kin)

    if cell_average:
        values = _transverse_cell_averages(initial, final, t, kin, v, d_t, grid, tol)
        bottom_x, top_x = grid.x_edges
        column = np.flatnonzero((bottom_x <= v * t) & (v * t < top_x))
        if column.size and atom_t > 0:
            values[:, column[0]] += atom_t * _cell_probability_y(grid, [2.0 * d_t * t])[:, 0] / grid.cell_area
            atom_t = 0.0
    else:
        tau = grid.x / v
        inside = (grid.x > 0) & (grid.x < v * t)
        line_density = np.where(inside, mixture_density(initial, final, tau, t, kin) / v, 0.0)

        variance = 2.0 * d_t * np.where(inside, tau, 1.0)
        y = grid.y[:, None]
        kernel = np.exp(-y ** 2 / (2.0 * variance[None, :])) / np.sqrt(2.0 * math.pi * variance[None, :])
        values = line_density[None, :] * kernel

    tp = TransportParams(v=v, d_l=0.0, d_t=d_t)
    x_hat, y_hat = _scaled_mirrors(kin, tp, t, grid)
    return DensityField2D(
        grid=grid,
        values=values,
        phase=final,
        t=float(t),
        initial=initial,
        atom_origin=atom_0,
        atom_line=atom_t,
        line_x=v * t,
        line_y_variance=2.0 * d_t * t,
        x_hat=x_hat,
        y_hat=y_hat,
        cell_averaged=cell_average,
    )


def _cell_kernel(x, y, tau, tp, dx, dy):
    # Среднее ядра неадсорбирующегося вещества по ячейке: узлы (n,) на tau (m,) -> (n, m)
    tau = tau[None, :]
    sd_x = np.sqrt(2.0 * tp.d_l * tau)
    sd_y = np.sqrt(2.0 * tp.d_t * tau)
    shift = x[:, None] - tp.v * tau
    p_x = _interval_probability((shift - 0.5 * dx) / sd_x, (shift + 0.5 * dx) / sd_x)
    p_y = _interval_probability((y[:, None] - 0.5 * dy) / sd_y, (y[:, None] + 0.5 * dy) / sd_y)
    return p_x * p_y / (dx * dy)


def _integrate_chunk(x, y, initial, final, t, kin, tp, dx, dy, tol, max_panels):
    def integrand(tau):
        h = mixture_density(initial, final, tau, t, kin)
        return _cell_kernel(x, y, tau, tp, dx, dy) * h[None, :]

    return integrate_residence(integrand, t, tol=tol, max_panels=max_panels)


def full_2d(
    initial,
    final: Phase | None,
    t: float,
    kin: KineticsParams,
    tp: TransportParams,
    grid: Grid2D,
    tol: float = 1e-8,
    max_panels: int = 4096,
    threads: int = 1
) -> DensityField2D:
    """
    Поле с продольной и поперечной дисперсией

    Значения - средние по ячейкам: для каждого tau гауссиана интегрируется по
    ячейке точно (разность нормальных функций распределения), затем интеграл
    по tau от h. Поэтому сумма по сетке равна массе внутри сетки при любом
    шаге, в том числе у начала координат, где поле в точке особое. Атом tau = t
    добавляется так же с центром (vt, 0), атом tau = 0 остаётся точечной массой
    в начале координат.

    Args:
        initial: Начальная фаза или равновесная смесь
        final: Фаза в момент t (None - всё облако)
        t: Время
        kin: Скорости
        tp: Параметры переноса (D_L > 0, D_T > 0)
        grid: Сетка
        tol: Абсолютная точность квадратуры в ячейке
        max_panels: Предел числа панелей
        threads: Число потоков joblib

    Returns:
        DensityField2D: Поле

    Raises:
        QuadratureError: Квадратура не сошлась
    """
    if tp.d_l <= 0 or tp.d_t <= 0 or t <= 0:
        raise ParameterError(f"Требуется D_L > 0, D_T > 0, t > 0: D_L={tp.d_l}, D_T={tp.d_t}, t={t}")
    initial = InitialCondition.coerce(initial)

    xx, yy = np.meshgrid(grid.x, grid.y)
    x_nodes, y_nodes = xx.ravel(), yy.ravel()
    chunks = [slice(start, start + CHUNK_NODES) for start in range(0, x_nodes.size, CHUNK_NODES)]

    logger.info(f"Поле 2D: t={t}, узлов={x_nodes.size}, блоков={len(chunks)}, tol={tol:g}")

    parts = Parallel(n_jobs=threads, prefer="threads")(
        delayed(_integrate_chunk)(x_nodes[c], y_nodes[c], initial, final, t, kin, tp, grid.dx, grid.dy, tol,
                                  max_panels)
        for c in chunks
    )
    values = np.concatenate([np.atleast_1d(p) for p in parts]).reshape(grid.shape)

    atom_0, atom_t = mixture_atoms(initial, final, t, kin)
    if atom_t > 0:
        line = _cell_kernel(x_nodes, y_nodes, np.array([float(t)]), tp, grid.dx, grid.dy)[:, 0]
        values = values + atom_t * line.reshape(grid.shape)

    x_hat, y_hat = _scaled_mirrors(kin, tp, t, grid)
    return DensityField2D(
        grid=grid,
        values=values,
        phase=final,
        t=float(t),
        initial=initial,
        atom_origin=atom_0,
        x_hat=x_hat,
        y_hat=y_hat,
        cell_averaged=True,
    )


def _gaussian_field(grid, mass, mean_x, var_x, var_y):
    # Средние по ячейкам, как у full_2d
    left, right = grid.x_edges
    bottom, top = grid.y_edges
    sd_x, sd_y = math.sqrt(var_x), math.sqrt(var_y)
    gx = _interval_probability((left - mean_x) / sd_x, (right - mean_x) / sd_x)
    gy = _interval_probability(bottom / sd_y, top / sd_y)
    return mass * gy[:, None] * gx[None, :] / grid.cell_area


def early_gaussian(
    initial,
    t: float,
    kin: KineticsParams,
    tp: TransportParams,
    grid: Grid2D
) -> DensityField2D:
    """
    Гауссиана без кинетики (v, D_L, D_T) с массой свободной фазы в момент t

    Ранняя асимптотика свободного поля: почти все свободные частицы ещё не
    меняли фазу.
    """
    initial = InitialCondition.coerce(initial)
    w_f, w_a = initial.weights(kin)
    mass = w_f * occupancy(kin, t)[0, 0] + w_a * occupancy(kin, t)[1, 0]
    values = _gaussian_field(grid, mass, tp.v * t, 2.0 * tp.d_l * t, 2.0 * tp.d_t * t)
    x_hat, y_hat = _scaled_mirrors(kin, tp, t, grid)
    return DensityField2D(grid=grid, values=values, phase=Phase.FREE, t=float(t), initial=initial,
                          x_hat=x_hat, y_hat=y_hat, cell_averaged=True)


def asymptotic_gaussian(
    phase: Phase | None,
    t: float,
    kin: KineticsParams,
    tp: TransportParams,
    grid: Grid2D
) -> DensityField2D:
    """
    Поздняя гауссиана равновесного импульса

    Скорость v*, коэффициенты D_L/R + D* и D_T/R; центр свободной фазы
    смещён вперёд на lambda v/(lambda+mu)^2, сорбированной - назад на
    mu v/(lambda+mu)^2.
    """
    dq = derive(kin, tp)
    k = kin.total_rate
    if phase is Phase.FREE:
        mass, shift = kin.pi_f, asymptotic_free_lead(kin, tp.v)
    elif phase is Phase.ADSORBED:
        mass, shift = kin.pi_a, -kin.mu * tp.v / k ** 2
    else:
        mass, shift = 1.0, 0.0

    values = _gaussian_field(grid, mass, dq.v_star * t + shift, 2.0 * dq.d_long_asym * t, 2.0 * dq.d_trans_asym * t)
    x_hat, y_hat = _scaled_mirrors(kin, tp, t, grid)
    return DensityField2D(grid=grid, values=values, phase=phase, t=float(t),
                          initial=InitialCondition.EQUILIBRIUM, x_hat=x_hat, y_hat=y_hat, cell_averaged=True)


def field_mass(field: DensityField2D) -> float:
    """Сумма по сетке на площадь ячейки плюс атомы (для средних по ячейкам - точная масса в сетке)"""
    return float(field.values.sum() * field.grid.cell_area + field.atom_origin + field.atom_line)


def field_l1_distance(a: DensityField2D, b: DensityField2D, normalize: bool = False) -> float:
    """
    L1-расстояние двух полей на одной сетке

    При normalize=True каждое поле делится на свою массу по сетке.
    """
    if a.values.shape != b.values.shape:
        raise ParameterError("Поля заданы на разных сетках")
    va, vb = a.values, b.values
    if normalize:
        va = va / (va.sum() * a.grid.cell_area)
        vb = vb / (vb.sum() * b.grid.cell_area)
    return float(np.abs(va - vb).sum() * a.grid.cell_area)


def marginal_x(field: DensityField2D) -> np.ndarray:
    """int N(x, y) dy по столбцам"""
    return field.values.sum(axis=0) * field.grid.dy


def conditional_y_variance(field: DensityField2D, floor: float = 1e-300) -> np.ndarray:
    """
    Численная условная поперечная дисперсия int y^2 N dy / int N dy по столбцам

    Для средних по ячейкам вычитается поправка Шеппарда dy^2/12. Столбцы с
    массой ниже floor получают nan.
    """
    y = field.grid.y[:, None]
    mass = field.values.sum(axis=0)
    second = (y ** 2 * field.values).sum(axis=0)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = second / mass
    if field.cell_averaged:
        out = out - field.grid.dy ** 2 / 12.0
    out[mass <= floor] = np.nan
    return out


def transverse_variance_law(x, v: float, d_t: float) -> np.ndarray:
    """Закон без продольной дисперсии: Var(y | x) = 2 D_T x/v"""
    return 2.0 * d_t * np.asarray(x, dtype=float) / v
