"""
Численное обращение преобразования Лапласа по Гаверу-Стехфесту
"""
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable

import numpy as np

from core.exceptions import LaplaceInversionError, ParameterError
from utils.logger import setup_logger

logger = setup_logger()


DEFAULT_TERMS = 12
MIN_TERMS = 8
MAX_TERMS = 18


@dataclass(frozen=True)
class LaplaceFunction:
    """Изображение F(s) на вещественной полуоси s > 0 (векторизованное по s)"""
    evaluate: Callable[[np.ndarray], np.ndarray]
    note: str = "s > 0"

    def __call__(self, s):
        return self.evaluate(s)


@lru_cache(maxsize=None)
def _exact_weights(n_terms: int) -> tuple[Fraction, ...]:
    half = n_terms // 2
    weights = []
    for k in range(1, n_terms + 1):
        total = Fraction(0)
        for j in range((k + 1) // 2, min(k, half) + 1):
            total += Fraction(
                j ** half * math.factorial(2 * j),
                math.factorial(half - j) * math.factorial(j) * math.factorial(j - 1)
                * math.factorial(k - j) * math.factorial(2 * j - k),
            )
        weights.append((-1) ** (k + half) * total)
    return tuple(weights)


def stehfest_weights(n_terms: int = DEFAULT_TERMS) -> np.ndarray:
    """
    Веса V_k, k = 1..N, вычисленные в рациональной арифметике

    Args:
        n_terms: Чётное N в [8, 18]

    Returns:
        np.ndarray: Веса в float64
    """
    if n_terms % 2 or not MIN_TERMS <= n_terms <= MAX_TERMS:
        raise ParameterError(f"N_terms должно быть чётным в [{MIN_TERMS}, {MAX_TERMS}], получено {n_terms}")
    return np.array([float(w) for w in _exact_weights(n_terms)])


def stehfest_invert(func, t: float, n_terms: int = DEFAULT_TERMS) -> float:
    """
    f(t) = ln2/t * sum_k V_k F(k ln2/t)

    Args:
        func: Изображение F(s); принимает массив s
        t: Время (> 0)
        n_terms: Число слагаемых

    Returns:
        float: Оригинал в момент t

    Raises:
        LaplaceInversionError: F вернула нечисловое значение
    """
    if t <= 0:
        raise ParameterError(f"Обращение требует t > 0, получено {t}")
    weights = stehfest_weights(n_terms)
    factor = math.log(2.0) / t
    s = factor * np.arange(1, n_terms + 1)

    values = np.asarray(func(s), dtype=float)
    if values.shape != s.shape:
        values = np.array([float(func(si)) for si in s])
    if not np.all(np.isfinite(values)):
        raise LaplaceInversionError(f"F(s) нечисловое при t={t}: {values}")

    return float(factor * math.fsum(weights * values))
