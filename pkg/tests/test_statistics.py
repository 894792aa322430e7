"""
Тесты статистик ансамбля
"""
import math

import numpy as np
import pytest

from core.params import Phase
from simulation.particle import ParticleRecords
from simulation.statistics import (
    batch_standard_errors,
    compute_stats,
    conditional_y_variance,
    histogram_2d,
    summarize,
)


def make_records(x, y, final_free, dims=2):
    x = np.asarray(x, dtype=float)
    return ParticleRecords(
        initial_free=np.ones(x.size, dtype=bool),
        final_free=np.asarray(final_free, dtype=bool),
        x=x,
        y=np.asarray(y, dtype=float),
        tau_free=np.zeros(x.size),
        t=1.0,
        dims=dims,
    )


def test_summarize_known_sample():
    s = summarize(np.array([1.0, 2.0, 3.0, 4.0]))
    assert s.count == 4
    assert s.mean == pytest.approx(2.5)
    assert s.variance == pytest.approx(1.25)
    assert s.skewness == pytest.approx(0.0, abs=1e-12)
    assert s.kurtosis == pytest.approx(1.64)


def test_summarize_degenerate():
    empty = summarize(np.array([]))
    assert empty.count == 0 and math.isnan(empty.mean)
    single = summarize(np.array([3.0]))
    assert single.variance == 0.0
    assert math.isnan(single.skewness) and math.isnan(single.kurtosis)


def test_batch_standard_errors(rng):
    values = rng.standard_normal(100_000)
    se = batch_standard_errors(values)
    assert se["mean"] == pytest.approx(1 / math.sqrt(values.size), rel=0.5)
    assert se["variance"] > 0
    short = batch_standard_errors(values[:30])
    assert all(math.isnan(v) for v in short.values())


def test_compute_stats_by_phase():
    records = make_records([0.0, 2.0, 10.0, 12.0], [1.0, -1.0, 1.0, -1.0], [True, True, False, False])
    stats = compute_stats(records)
    assert stats.count == 4
    assert stats.centroid == pytest.approx(6.0)
    assert stats.by_phase(Phase.FREE).mean == pytest.approx(1.0)
    assert stats.by_phase(Phase.ADSORBED).mean == pytest.approx(11.0)
    assert stats.y_total.mean == pytest.approx(0.0)
    assert stats.cross_moment == pytest.approx(0.0)


def test_conditional_y_variance_bins():
    x = np.array([0.1, 0.2, 0.3, 1.1, 1.2, 1.5])
    y = np.array([1.0, -1.0, 0.0, 2.0, -2.0, 0.0])
    records = make_records(x, y, np.ones(6))
    centers, variance, counts = conditional_y_variance(records, np.array([0.0, 1.0, 2.0, 3.0]), min_count=2)
    np.testing.assert_allclose(centers, [0.5, 1.5, 2.5])
    np.testing.assert_array_equal(counts, [3, 3, 0])
    assert variance[0] == pytest.approx(2 / 3)
    assert variance[1] == pytest.approx(8 / 3)
    assert math.isnan(variance[2])


def test_histogram_normalized_by_all_particles():
    records = make_records([0.5, 0.5, 1.5, 1.5], [0.5, 0.5, 0.5, 0.5], [True, False, True, False])
    edges = np.array([0.0, 1.0, 2.0])
    density = histogram_2d(records, edges, np.array([0.0, 1.0]))
    assert density.shape == (1, 2)
    assert density.sum() == pytest.approx(1.0)
    free = histogram_2d(records, edges, np.array([0.0, 1.0]), phase=Phase.FREE)
    assert free.sum() == pytest.approx(0.5)
