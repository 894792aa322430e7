"""
Модифицированные функции Бесселя I_0, I_1 и их масштабированные варианты
"""
import numpy as np
from scipy import special

from core.exceptions import BesselOverflowError, ParameterError


# Выше этого аргумента e^z не представим в float64 с запасом
OVERFLOW_LIMIT = 700.0


def _check_argument(z) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise ParameterError("Аргумент функции Бесселя должен быть >= 0")
    return z


def _unscaled(z, func):
    z = _check_argument(z)
    if np.any(z > OVERFLOW_LIMIT):
        raise BesselOverflowError(
            f"I(z) при z > {OVERFLOW_LIMIT:g} переполняется, используйте масштабированный вариант"
        )
    value = func(z)
    return float(value) if value.ndim == 0 else value


def _scaled(z, func):
    z = _check_argument(z)
    value = func(z)
    return float(value) if value.ndim == 0 else value


def bessel_i0(z):
    """I_0(z), z в [0, 700]"""
    return _unscaled(z, special.i0)


def bessel_i1(z):
    """I_1(z), z в [0, 700]"""
    return _unscaled(z, special.i1)


def bessel_i0e(z):
    """e^{-z} I_0(z) для любых z >= 0"""
    return _scaled(z, special.i0e)


def bessel_i1e(z):
    """e^{-z} I_1(z) для любых z >= 0"""
    return _scaled(z, special.i1e)


def i1_over_z_scaled(z) -> np.ndarray:
    """
    e^{-z} I_1(z) / z с пределом 1/2 при z = 0

    Убирает особенности 1/sqrt(tau) и 1/sqrt(t - tau) у непрерывных частей
    h_ff и h_aa: sqrt(lambda mu tau/(t - tau)) I_1(theta) = 2 lambda mu tau I_1(theta)/theta.

    Args:
        z: Аргумент (массив)

    Returns:
        np.ndarray: Значения той же формы
    """
    z = np.asarray(z, dtype=float)
    out = np.full(z.shape, 0.5)
    positive = z > 0
    out[positive] = special.i1e(z[positive]) / z[positive]
    # Около нуля ряд I_1(z)/z = 1/2 + z^2/16 точнее деления
    small = positive & (z < 1e-6)
    out[small] = (0.5 + z[small] ** 2 / 16.0) * np.exp(-z[small])
    return out
