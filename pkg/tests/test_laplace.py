"""
Тесты обращения Стехфеста
"""
import math

import numpy as np
import pytest

from analytics.laplace import stehfest_invert, stehfest_weights
from core.exceptions import LaplaceInversionError, ParameterError


def test_known_weights():
    weights = stehfest_weights(10)
    assert weights[0] == pytest.approx(1 / 12)
    assert weights[1] == pytest.approx(-385 / 12)


@pytest.mark.parametrize("n_terms", [8, 12, 16, 18])
def test_weights_sum_to_zero(n_terms):
    weights = stehfest_weights(n_terms)
    assert weights.size == n_terms
    assert abs(math.fsum(weights)) <= 1e-6 * np.abs(weights).max()


@pytest.mark.parametrize("n_terms", [7, 6, 20])
def test_invalid_terms(n_terms):
    with pytest.raises(ParameterError):
        stehfest_weights(n_terms)


@pytest.mark.parametrize("t", [0.5, 1.0, 5.0])
def test_polynomial_inverse(t):
    assert stehfest_invert(lambda s: 1.0 / s ** 2, t) == pytest.approx(t, rel=1e-8)
    assert stehfest_invert(lambda s: 2.0 / s ** 3, t) == pytest.approx(t ** 2, rel=1e-7)


def test_exponential_inverse():
    for t in (0.5, 2.0):
        assert stehfest_invert(lambda s: 1.0 / (s + 1.0), t, n_terms=16) == pytest.approx(math.exp(-t), rel=1e-6)


def test_scalar_only_image():
    def image(s):
        if np.ndim(s):
            return 0.0
        return 1.0 / s

    assert stehfest_invert(image, 3.0) == pytest.approx(1.0, rel=1e-9)


def test_errors():
    with pytest.raises(ParameterError):
        stehfest_invert(lambda s: 1.0 / s, 0.0)
    with pytest.raises(LaplaceInversionError):
        stehfest_invert(lambda s: np.full_like(s, np.nan), 1.0)
