"""
Тесты стохастического моделирования частиц
"""
import numpy as np
import pytest

from analytics.giddings import continuous_cdf
from analytics.moments import moments_S, moments_S_discrete
from core.exceptions import ParameterError
from core.params import DiscreteKinetics, InitialCondition, KineticsParams, Phase, TransportParams, occupancy
from simulation.particle import (
    ParticleState,
    free_residence_histogram,
    residence_ks_distance,
    run_ensemble,
    run_ensemble_discrete,
    simulate_particle_ct,
    simulate_particle_dt,
    step_discrete,
)


def test_adsorbed_absorbing_state(rng):
    dk = DiscreteKinetics(a=0.0, b=0.5, dt=0.1, n=1)
    tp = TransportParams(v=1.0, d_l=0.3)
    state = ParticleState(x=2.0, phase=Phase.ADSORBED, tau_free=0.4)
    for _ in range(50):
        state = step_discrete(state, dk, tp, rng)
    assert state.phase is Phase.ADSORBED
    assert state.x == 2.0
    assert state.tau_free == 0.4


def test_free_deterministic_advection(rng):
    dk = DiscreteKinetics(a=0.5, b=0.0, dt=0.25, n=1)
    tp = TransportParams(v=2.0, d_l=0.0)
    state = step_discrete(ParticleState(), dk, tp, rng)
    assert state.phase is Phase.FREE
    assert state.x == pytest.approx(0.5)
    assert state.tau_free == pytest.approx(0.25)


def test_switch_uses_phase_at_interval_start(rng):
    # b = 1: частица смещается весь интервал, затем становится сорбированной
    dk = DiscreteKinetics(a=0.0, b=1.0, dt=0.1, n=1)
    state = step_discrete(ParticleState(), dk, TransportParams(v=1.0, d_l=0.0), rng)
    assert state.phase is Phase.ADSORBED
    assert state.x == pytest.approx(0.1)


def test_symmetric_chain_free_fraction(rng):
    dk = DiscreteKinetics(a=0.5, b=0.5, dt=1.0, n=20000)
    record = simulate_particle_dt(dk, TransportParams(v=0.0, d_l=0.0), Phase.FREE, rng)
    assert record.tau_free / dk.horizon == pytest.approx(0.5, abs=0.02)


def test_ct_no_adsorption(rng):
    record = simulate_particle_ct(KineticsParams(0.0, 1.0), TransportParams(v=1.5, d_l=0.0), 4.0, Phase.FREE, rng)
    assert record.x == pytest.approx(6.0)
    assert record.tau_free == 4.0
    assert record.phase is Phase.FREE


def test_ct_no_desorption(rng):
    record = simulate_particle_ct(KineticsParams(1.0, 0.0), TransportParams(v=1.0, d_l=0.5), 3.0,
                                  Phase.ADSORBED, rng)
    assert record.x == 0.0
    assert record.tau_free == 0.0


def test_ct_residence_bounded(rng):
    kin = KineticsParams(3.0, 2.0)
    tp = TransportParams(v=1.0, d_l=0.1, d_t=0.1)
    for _ in range(200):
        record = simulate_particle_ct(kin, tp, 2.0, Phase.FREE, rng, dims=2)
        assert 0.0 <= record.tau_free <= 2.0
        if record.tau_free == 0.0:
            assert record.x == 0.0


def test_single_particle_zero_variance():
    stats, records = run_ensemble(KineticsParams(1.0, 1.0), TransportParams(v=1.0, d_l=0.1), 5.0, 1)
    assert len(records) == 1
    assert stats.variance == 0.0


def test_invalid_ensemble_arguments():
    kin, tp = KineticsParams(1.0, 1.0), TransportParams(v=1.0, d_l=0.1)
    with pytest.raises(ParameterError):
        run_ensemble(kin, tp, 1.0, 0)
    with pytest.raises(ParameterError):
        run_ensemble(kin, tp, 1.0, 10, dims=3)
    with pytest.raises(ParameterError):
        run_ensemble(kin, tp, -1.0, 10)


def test_determinism_independent_of_threads():
    kin, tp = KineticsParams(1.0, 2.0), TransportParams(v=1.0, d_l=0.1, d_t=0.05)
    _, one = run_ensemble(kin, tp, 2.0, 10_000, seed=7, dims=2, threads=1)
    _, four = run_ensemble(kin, tp, 2.0, 10_000, seed=7, dims=2, threads=4)
    np.testing.assert_array_equal(one.x, four.x)
    np.testing.assert_array_equal(one.y, four.y)
    np.testing.assert_array_equal(one.tau_free, four.tau_free)

    _, other = run_ensemble(kin, tp, 2.0, 10_000, seed=8, dims=2)
    assert not np.array_equal(one.x, other.x)


def test_prefix_stable_when_n_grows():
    kin, tp = KineticsParams(1.0, 1.0), TransportParams(v=1.0, d_l=0.1)
    _, small = run_ensemble(kin, tp, 1.0, 5000, seed=3)
    _, large = run_ensemble(kin, tp, 1.0, 9000, seed=3)
    np.testing.assert_array_equal(small.x[:4096], large.x[:4096])


def test_2d_marginal_equals_1d_run():
    kin, tp = KineticsParams(1.0, 1.0), TransportParams(v=1.0, d_l=0.2, d_t=0.1)
    _, flat = run_ensemble(kin, tp, 3.0, 5000, seed=11, dims=1)
    _, planar = run_ensemble(kin, tp, 3.0, 5000, seed=11, dims=2)
    np.testing.assert_array_equal(flat.x, planar.x)
    assert np.all(flat.y == 0.0)


def test_record_view_and_frame():
    _, records = run_ensemble(KineticsParams(1.0, 1.0), TransportParams(v=1.0, d_l=0.1), 1.0, 100, seed=5)
    r = records.record(3)
    assert r.x == records.x[3]
    assert (r.phase is Phase.FREE) == bool(records.final_free[3])
    frame = records.to_frame()
    assert list(frame.columns) == ["id", "initial_phase", "final_phase", "x", "y", "tau_free"]
    assert set(frame["final_phase"]) <= {"free", "adsorbed"}
    assert records.phase_mask(Phase.FREE).sum() + records.phase_mask(Phase.ADSORBED).sum() == 100


def test_histogram_atoms_only():
    _, records = run_ensemble(KineticsParams(1.0, 0.0), TransportParams(v=1.0, d_l=0.1), 2.0, 500,
                              initial=InitialCondition.ADSORBED)
    hist = free_residence_histogram(records, bins=10)
    assert hist.atom_zero == 500
    assert hist.counts.sum() == 0

    _, records = run_ensemble(KineticsParams(0.0, 1.0), TransportParams(v=1.0, d_l=0.1), 2.0, 500,
                              initial=InitialCondition.FREE)
    hist = free_residence_histogram(records, bins=10)
    assert hist.atom_horizon == 500


def test_histogram_total_mass():
    _, records = run_ensemble(KineticsParams(2.0, 3.0), TransportParams(v=1.0, d_l=0.1), 1.0, 3000, seed=1)
    hist = free_residence_histogram(records, bins=25)
    assert hist.counts.sum() + hist.atom_zero + hist.atom_horizon == hist.total == 3000
    with pytest.raises(ParameterError):
        free_residence_histogram(records, bins=0)


@pytest.mark.slow
def test_residence_time_occupancy():
    kin = KineticsParams(1.0, 1.0)
    _, records = run_ensemble(kin, TransportParams(v=1.0, d_l=0.1), 5.0, 100_000, seed=42)
    fraction = records.tau_free / 5.0
    se = fraction.std() / np.sqrt(fraction.size)
    assert abs(fraction.mean() - 0.5) <= 3 * se + 1e-12


@pytest.mark.slow
def test_ensemble_matches_analytic_moments():
    kin, tp = KineticsParams(1.0, 1.0), TransportParams(v=1.0, d_l=0.1)
    stats, _ = run_ensemble(kin, tp, 5.0, 100_000, seed=42)
    analytic = moments_S(kin, tp, 5.0)
    assert analytic.mean == pytest.approx(2.5)
    assert abs(stats.centroid - analytic.mean) <= 3 * stats.standard_errors["mean"]
    assert stats.variance == pytest.approx(analytic.variance, rel=0.05)


@pytest.mark.slow
def test_final_phase_occupancy():
    kin = KineticsParams(2.0, 5.0)
    _, records = run_ensemble(kin, TransportParams(v=1.0, d_l=0.0), 0.3, 100_000,
                              initial=InitialCondition.FREE, seed=9)
    p_ff = occupancy(kin, 0.3)[0, 0]
    se = np.sqrt(p_ff * (1 - p_ff) / 100_000)
    assert abs(records.final_free.mean() - p_ff) <= 4 * se


@pytest.mark.slow
def test_no_kinetics_reduces_to_advection_dispersion():
    tp = TransportParams(v=1.0, d_l=0.2)
    stats, _ = run_ensemble(KineticsParams(0.0, 1.0), tp, 3.0, 50_000, initial=InitialCondition.FREE, seed=4)
    assert abs(stats.centroid - 3.0) <= 4 * stats.standard_errors["mean"]
    assert abs(stats.variance - 1.2) <= 4 * stats.standard_errors["variance"]


@pytest.mark.slow
def test_gaussian_limit_of_ensemble():
    kin, tp = KineticsParams(5.0, 5.0), TransportParams(v=1.0, d_l=0.0)
    stats, _ = run_ensemble(kin, tp, 16.0, 100_000, seed=2)
    exact = moments_S(kin, tp, 16.0)
    assert abs(exact.excess_kurtosis) < 0.05
    assert abs(stats.kurtosis - (exact.excess_kurtosis + 3.0)) <= 3 * stats.standard_errors["kurtosis"]
    assert abs(stats.skewness) < 0.05


@pytest.mark.slow
def test_residence_histogram_matches_density():
    kin = KineticsParams(5.0, 5.0)
    _, records = run_ensemble(kin, TransportParams(v=1.0, d_l=0.0), 1.0, 1_000_000,
                              initial=InitialCondition.FREE, seed=21, threads=4)
    cdf = continuous_cdf(InitialCondition.FREE, None, 1.0, kin)
    assert residence_ks_distance(records, cdf) <= 0.005


@pytest.mark.slow
def test_discrete_ensemble_matches_random_sum_formulas():
    kin, tp = KineticsParams(1.0, 1.0), TransportParams(v=1.0, d_l=0.1)
    dk = DiscreteKinetics.from_rates(kin, 0.1, 50)
    stats, _ = run_ensemble_discrete(dk, tp, 100_000, seed=13)
    expected = moments_S_discrete(dk, tp)
    assert abs(stats.centroid - expected.mean) <= 4 * stats.standard_errors["mean"]
    assert abs(stats.variance - expected.variance) <= 4 * stats.standard_errors["variance"]
