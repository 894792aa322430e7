"""
Общие наборы параметров и генераторы
"""
import pytest

from core.params import KineticsParams, TransportParams
from utils.rng import make_rng


@pytest.fixture
def symmetric_kin():
    """lambda = mu = 5 (одномерные профили)"""
    return KineticsParams(lambda_=5.0, mu=5.0)


@pytest.fixture
def asymmetric_kin():
    return KineticsParams(lambda_=2.0, mu=5.0)


@pytest.fixture
def unit_kin():
    return KineticsParams(lambda_=1.0, mu=1.0)


@pytest.fixture
def unit_tp():
    """v = 1, D = 0.1"""
    return TransportParams(v=1.0, d_l=0.1, d_t=0.05)


@pytest.fixture
def planar_kin():
    """Полное двумерное поле: lambda = mu = 0.2"""
    return KineticsParams(lambda_=0.2, mu=0.2)


@pytest.fixture
def planar_tp():
    return TransportParams(v=1.0, d_l=0.5, d_t=0.1)


@pytest.fixture
def tailing_kin():
    """Условные моменты: lambda = mu = 0.05"""
    return KineticsParams(lambda_=0.05, mu=0.05)


@pytest.fixture
def tailing_tp():
    return TransportParams(v=0.3, d_l=0.3, d_t=0.03)


@pytest.fixture
def rng():
    return make_rng(12345)
