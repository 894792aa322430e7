"""
Тесты функций Бесселя
"""
import math

import numpy as np
import pytest
from scipy import special

from analytics.special import bessel_i0, bessel_i0e, bessel_i1, bessel_i1e, i1_over_z_scaled
from core.exceptions import BesselOverflowError, ParameterError


def test_values_at_zero():
    assert bessel_i0(0.0) == 1.0
    assert bessel_i1(0.0) == 0.0
    assert isinstance(bessel_i0(1.0), float)


def test_scaled_variants_agree():
    z = np.array([0.5, 3.0, 50.0])
    np.testing.assert_allclose(bessel_i0e(z), np.exp(-z) * bessel_i0(z), rtol=1e-13)
    np.testing.assert_allclose(bessel_i1e(z), np.exp(-z) * bessel_i1(z), rtol=1e-13)


def test_overflow_guard():
    with pytest.raises(BesselOverflowError):
        bessel_i0(800.0)
    assert bessel_i0e(1e4) == pytest.approx(1 / math.sqrt(2 * math.pi * 1e4), rel=1e-4)


def test_negative_argument():
    with pytest.raises(ParameterError):
        bessel_i1(-1.0)


def test_i1_over_z_limit():
    z = np.array([0.0, 1e-8, 2.0])
    values = i1_over_z_scaled(z)
    assert values[0] == 0.5
    assert values[1] == pytest.approx(0.5, rel=1e-7)
    assert values[2] == pytest.approx(special.i1e(2.0) / 2.0, rel=1e-14)
