"""
Тесты блочных потоков случайных чисел
"""
import numpy as np

from utils.rng import BLOCK_SIZE, block_bounds, make_block_streams, make_rng, n_blocks


def test_block_count():
    assert n_blocks(1) == 1
    assert n_blocks(BLOCK_SIZE) == 1
    assert n_blocks(BLOCK_SIZE + 1) == 2


def test_block_bounds_cover_ensemble():
    n = 3 * BLOCK_SIZE + 17
    covered = [block_bounds(b, n) for b in range(n_blocks(n))]
    assert covered[0] == (0, BLOCK_SIZE)
    assert covered[-1] == (3 * BLOCK_SIZE, n)
    assert sum(stop - start for start, stop in covered) == n


def test_streams_reproducible():
    a = make_block_streams(42, 3)
    b = make_block_streams(42, 3)
    np.testing.assert_array_equal(a.phases.random(10), b.phases.random(10))
    np.testing.assert_array_equal(a.displacement.standard_normal(10), b.displacement.standard_normal(10))


def test_streams_independent():
    streams = make_block_streams(42, 0)
    other_block = make_block_streams(42, 1)
    other_seed = make_block_streams(43, 0)
    first = streams.phases.random(8)
    assert not np.array_equal(first, streams.displacement.random(8))
    assert not np.array_equal(first, other_block.phases.random(8))
    assert not np.array_equal(first, other_seed.phases.random(8))


def test_make_rng_reproducible():
    np.testing.assert_array_equal(make_rng(5).random(4), make_rng(5).random(4))
