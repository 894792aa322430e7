"""
Контейнеры параметров переноса и кинетики, производные величины,
масштабированные координаты
"""
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from core.exceptions import DegenerateKineticsError, ParameterError, ScalingError


class Phase(str, Enum):
    """Состояние частицы"""
    FREE = "free"
    ADSORBED = "adsorbed"

    @property
    def index(self) -> int:
        """Номер состояния в матрицах переходов (f=0, a=1)"""
        return 0 if self is Phase.FREE else 1

    @property
    def short(self) -> str:
        return "f" if self is Phase.FREE else "a"


class InitialCondition(str, Enum):
    """Начальное распределение фаз импульса"""
    FREE = "free"
    ADSORBED = "adsorbed"
    EQUILIBRIUM = "equilibrium"

    @classmethod
    def coerce(cls, value: "InitialCondition | Phase | str") -> "InitialCondition":
        """Привести фазу или строку к начальному условию"""
        if isinstance(value, cls):
            return value
        if isinstance(value, Phase):
            return cls(value.value)
        try:
            return cls(str(value).lower())
        except ValueError:
            raise ParameterError(f"Неизвестное начальное условие: {value}") from None

    def weights(self, kinetics: "KineticsParams") -> tuple[float, float]:
        """
        Начальные массы фаз (w_f, w_a)

        Args:
            kinetics: Кинетические параметры (нужны для равновесной смеси)

        Returns:
            tuple[float, float]: Доли свободной и сорбированной фаз
        """
        if self is InitialCondition.FREE:
            return 1.0, 0.0
        if self is InitialCondition.ADSORBED:
            return 0.0, 1.0
        return kinetics.pi_f, kinetics.pi_a


@dataclass(frozen=True)
class TransportParams:
    """Скорость адвекции и коэффициенты дисперсии"""
    v: float
    d_l: float
    d_t: float = 0.0

    def __post_init__(self):
        for name in ("v", "d_l", "d_t"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ParameterError(f"{name} должен быть конечным и неотрицательным, получено {value}")

    @property
    def d(self) -> float:
        """Продольная дисперсия в одномерных задачах"""
        return self.d_l


@dataclass(frozen=True)
class KineticsParams:
    """Скорости сорбции lambda (f->a) и десорбции mu (a->f)"""
    lambda_: float
    mu: float

    def __post_init__(self):
        for name in ("lambda_", "mu"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ParameterError(f"{name} должен быть конечным и неотрицательным, получено {value}")
        if self.lambda_ + self.mu <= 0:
            raise ParameterError("lambda + mu должно быть > 0 (консервативный перенос: lambda=0, mu>0)")

    @property
    def total_rate(self) -> float:
        return self.lambda_ + self.mu

    @property
    def pi_f(self) -> float:
        """Стационарная доля свободной фазы"""
        return self.mu / self.total_rate

    @property
    def pi_a(self) -> float:
        """Стационарная доля сорбированной фазы"""
        return self.lambda_ / self.total_rate

    @property
    def generator(self) -> np.ndarray:
        """Генератор двухфазной цепи в порядке (f, a)"""
        return np.array([[-self.lambda_, self.lambda_], [self.mu, -self.mu]])


@dataclass(frozen=True)
class DerivedQuantities:
    """Производные величины модели"""
    pi_f: float
    pi_a: float
    v_star: float
    d_star: float
    v_e: float
    d_e: float
    d_trans_asym: float

    @property
    def retardation(self) -> float:
        """Коэффициент задержки R = (lambda+mu)/mu"""
        if self.pi_f <= 0:
            raise DegenerateKineticsError("R не определён при mu = 0")
        return 1.0 / self.pi_f

    @property
    def d_long_asym(self) -> float:
        """Асимптотическая продольная дисперсия D_L/R + D*"""
        return self.d_e


@dataclass(frozen=True)
class DiscreteKinetics:
    """Дискретная цепь: a = mu*dt (a->f), b = lambda*dt (f->a)"""
    a: float
    b: float
    dt: float
    n: int

    def __post_init__(self):
        if not (0.0 <= self.a <= 1.0 and 0.0 <= self.b <= 1.0):
            raise ParameterError(f"Вероятности перехода вне [0, 1]: a={self.a}, b={self.b}")
        if self.dt <= 0:
            raise ParameterError(f"Шаг dt должен быть > 0, получено {self.dt}")
        if self.n < 1:
            raise ParameterError(f"Число шагов n должно быть >= 1, получено {self.n}")

    @classmethod
    def from_rates(cls, kinetics: KineticsParams, dt: float, n: int) -> "DiscreteKinetics":
        """
        Построить дискретную цепь по скоростям

        Args:
            kinetics: Скорости lambda, mu
            dt: Шаг по времени
            n: Число шагов

        Returns:
            DiscreteKinetics: a = mu*dt, b = lambda*dt
        """
        return cls(a=kinetics.mu * dt, b=kinetics.lambda_ * dt, dt=dt, n=int(n))

    @property
    def horizon(self) -> float:
        return self.n * self.dt

    @property
    def stationary_free(self) -> float:
        """Доля времени в свободной фазе a/(a+b)"""
        if self.a + self.b <= 0:
            raise ParameterError("a + b = 0: стационарное распределение не единственно")
        return self.a / (self.a + self.b)


def derive(kinetics: KineticsParams, transport: TransportParams) -> DerivedQuantities:
    """
    Вычислить производные величины: pi_f, pi_a, v*, D*, v_e, D_e

    Args:
        kinetics: Скорости сорбции/десорбции
        transport: Скорость и дисперсия

    Returns:
        DerivedQuantities: Производные величины
    """
    lam, mu = kinetics.lambda_, kinetics.mu
    k = kinetics.total_rate
    v = transport.v

    pi_f = mu / k
    pi_a = lam / k
    v_star = v * pi_f
    d_star = lam * mu * v ** 2 / k ** 3

    return DerivedQuantities(
        pi_f=pi_f,
        pi_a=pi_a,
        v_star=v_star,
        d_star=d_star,
        v_e=v_star,
        d_e=d_star + pi_f * transport.d_l,
        d_trans_asym=pi_f * transport.d_t,
    )


def scaled_coords(x, y, t: float, dq: DerivedQuantities, d_t: float):
    """
    Масштабированные координаты x^ = (x - v*t)/sqrt(2D*t), y^ = y/sqrt(2D_T t)

    Args:
        x: Продольная координата (скаляр или массив)
        y: Поперечная координата (скаляр или массив)
        t: Время
        dq: Производные величины (v*, D*)
        d_t: Поперечная дисперсия

    Returns:
        tuple: (x^, y^)
    """
    if t <= 0:
        raise ScalingError(f"Масштабирование требует t > 0, получено {t}")
    if dq.d_star <= 0:
        raise ScalingError("D* = 0: продольное масштабирование не определено")
    if d_t <= 0:
        raise ScalingError("D_T = 0: поперечное масштабирование не определено")

    x_hat = (np.asarray(x, dtype=float) - dq.v_star * t) / math.sqrt(2.0 * dq.d_star * t)
    y_hat = np.asarray(y, dtype=float) / math.sqrt(2.0 * d_t * t)
    if x_hat.ndim == 0 and y_hat.ndim == 0:
        return float(x_hat), float(y_hat)
    return x_hat, y_hat


def unscale_x(x_hat, t: float, dq: DerivedQuantities):
    """Обратное преобразование x = v*t + x^ sqrt(2D*t)"""
    if t <= 0 or dq.d_star <= 0:
        raise ScalingError("Обратное масштабирование требует t > 0 и D* > 0")
    return dq.v_star * t + np.asarray(x_hat, dtype=float) * math.sqrt(2.0 * dq.d_star * t)


def occupancy(kinetics: KineticsParams, t: float) -> np.ndarray:
    """
    Матрица переходов двухфазной цепи P(t) = exp(Qt)

    Args:
        kinetics: Скорости
        t: Время

    Returns:
        np.ndarray: 2x2, P[i, j] = P(фаза j в момент t | фаза i в 0), порядок (f, a)
    """
    if t < 0:
        raise ParameterError(f"t должно быть >= 0, получено {t}")
    k = kinetics.total_rate
    # 1 - exp(-kt) через expm1 сохраняет точность при малых t
    decay = -math.expm1(-k * t)
    p_fa = kinetics.pi_a * decay
    p_af = kinetics.pi_f * decay
    return np.array([[1.0 - p_fa, p_fa], [p_af, 1.0 - p_af]])


def asymptotic_free_lead(kinetics: KineticsParams, v: float) -> float:
    """Асимптотическое опережение центра свободной фазы: lambda v/(lambda+mu)^2"""
    return kinetics.lambda_ * v / kinetics.total_rate ** 2
