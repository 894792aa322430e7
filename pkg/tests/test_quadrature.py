"""
Тесты квадратуры Гаусса-Лежандра
"""
import math

import numpy as np
import pytest

from analytics.quadrature import adaptive_integrate, gauss_legendre_panels, integrate_residence
from core.exceptions import QuadratureError


def test_panel_weights_sum_to_length():
    nodes, weights = gauss_legendre_panels(-1.0, 3.0, panels=5)
    assert nodes.size == weights.size == 40
    assert weights.sum() == pytest.approx(4.0)
    assert np.all((nodes > -1.0) & (nodes < 3.0))


def test_polynomial_exact():
    assert adaptive_integrate(lambda x: x ** 2, 0.0, 1.0) == pytest.approx(1 / 3, abs=1e-14)


def test_vector_integrand():
    k = np.array([1.0, 2.0, 3.0])
    result = adaptive_integrate(lambda x: np.cos(k[:, None] * x[None, :]), 0.0, math.pi / 2)
    np.testing.assert_allclose(result, np.sin(k * math.pi / 2) / k, atol=1e-12)


def test_endpoint_singularities():
    t = 2.0
    assert integrate_residence(lambda tau: 1 / np.sqrt(tau), t) == pytest.approx(2 * math.sqrt(t), rel=1e-10)
    value = integrate_residence(lambda tau: 1 / np.sqrt(tau * (t - tau)), t)
    assert value == pytest.approx(math.pi, rel=1e-10)


def test_zero_horizon():
    assert integrate_residence(lambda tau: np.ones_like(tau), 0.0) == 0.0


def test_no_convergence():
    with pytest.raises(QuadratureError):
        adaptive_integrate(lambda x: np.sign(x - 1 / 3), 0.0, 1.0, tol=1e-15, max_panels=8)
