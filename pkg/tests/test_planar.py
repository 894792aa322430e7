"""
Тесты двумерных полей облака
"""
import math

import numpy as np
import pytest

from analytics.contours import contour_export, contour_hausdorff, levels_from_fractions
from analytics.giddings import mixture_density
from analytics.planar import (
    DensityField2D,
    Grid2D,
    asymptotic_gaussian,
    conditional_y_variance,
    default_grid,
    early_gaussian,
    field_l1_distance,
    field_mass,
    full_2d,
    late_grid,
    line_centred_grid,
    marginal_x,
    transverse_only,
    transverse_variance_law,
)
from core.exceptions import ParameterError
from core.params import InitialCondition, KineticsParams, Phase, TransportParams
from simulation.particle import run_ensemble
from simulation.statistics import histogram_2d


def test_default_grid_extent(planar_kin, planar_tp):
    grid = default_grid(planar_kin, planar_tp, 4.0, nx=40, ny=20)
    assert grid.shape == (20, 40)
    x_lo, x_hi = grid.x_edges
    assert x_lo[0] == pytest.approx(-6.0 * math.sqrt(4.0))
    assert x_hi[-1] == pytest.approx(4.0 + 6.0 * math.sqrt(4.0))
    np.testing.assert_allclose(x_hi - x_lo, grid.dx)
    np.testing.assert_allclose(grid.y, -grid.y[::-1])
    assert not np.any(grid.y == 0.0)
    with pytest.raises(ParameterError):
        default_grid(planar_kin, planar_tp, 4.0, nx=1)


def test_transverse_only_columns():
    kin = KineticsParams(5.0, 5.0)
    v, d_t, t = 1.0, 0.1, 1.0
    grid = default_grid(kin, TransportParams(v=v, d_l=0.0, d_t=d_t), t, nx=50, ny=400, x_min=0.0, x_max=1.0)
    field = transverse_only(InitialCondition.EQUILIBRIUM, None, t, kin, v, d_t, grid)

    interior = (grid.x > 0.3) & (grid.x < 0.9)
    expected = mixture_density(InitialCondition.EQUILIBRIUM, None, grid.x / v, t, kin) / v
    np.testing.assert_allclose(marginal_x(field)[interior], expected[interior], rtol=1e-3)
    np.testing.assert_allclose(conditional_y_variance(field)[interior],
                               transverse_variance_law(grid.x[interior], v, d_t), rtol=1e-3)
    assert field.atom_line == pytest.approx(0.5 * math.exp(-5.0))
    assert field.line_y_variance == pytest.approx(0.2)


def test_transverse_only_zero_outside_support():
    kin = KineticsParams(1.0, 1.0)
    grid = Grid2D(x=np.array([-0.5, 0.5, 2.5]), y=np.array([-0.1, 0.1]))
    field = transverse_only(InitialCondition.FREE, None, 2.0, kin, 1.0, 0.1, grid)
    assert np.all(field.values[:, [0, 2]] == 0.0)
    assert np.all(field.values[:, 1] > 0.0)
    with pytest.raises(ParameterError):
        transverse_only(InitialCondition.FREE, None, 2.0, kin, 1.0, 0.0, grid)


def test_full_2d_requires_dispersion(planar_kin):
    grid = Grid2D(x=np.array([0.5, 1.5]), y=np.array([-0.1, 0.1]))
    with pytest.raises(ParameterError):
        full_2d(InitialCondition.EQUILIBRIUM, None, 1.0, planar_kin, TransportParams(v=1.0, d_l=0.0, d_t=0.1), grid)


def test_full_2d_symmetric_in_y(planar_kin, planar_tp):
    grid = default_grid(planar_kin, planar_tp, 2.0, nx=12, ny=6)
    field = full_2d(InitialCondition.EQUILIBRIUM, Phase.FREE, 2.0, planar_kin, planar_tp, grid, threads=2)
    np.testing.assert_allclose(field.values, field.values[::-1], rtol=1e-10)
    assert np.all(field.values >= 0)
    assert field.x_hat is not None and field.y_hat is not None


def test_full_2d_early_time_matches_kinetics_free_gaussian(planar_kin, planar_tp):
    t = 0.05
    grid = default_grid(planar_kin, planar_tp, t, nx=40, ny=40)
    field = full_2d(InitialCondition.FREE, Phase.FREE, t, planar_kin, planar_tp, grid)
    reference = early_gaussian(InitialCondition.FREE, t, planar_kin, planar_tp, grid)
    assert field_l1_distance(field, reference) < 1e-3


@pytest.mark.slow
@pytest.mark.parametrize("nx, ny", [(21, 21), (13, 9)])
def test_full_2d_mass_on_coarse_grids(planar_kin, planar_tp, nx, ny):
    grid = default_grid(planar_kin, planar_tp, 20.0, nx=nx, ny=ny)
    field = full_2d(InitialCondition.EQUILIBRIUM, Phase.FREE, 20.0, planar_kin, planar_tp, grid,
                    tol=1e-10, threads=4)
    assert field.cell_averaged
    assert field_mass(field) == pytest.approx(planar_kin.pi_f, abs=1e-6)


@pytest.mark.slow
def test_full_2d_matches_particle_histogram(planar_kin, planar_tp):
    t = 20.0
    grid = default_grid(planar_kin, planar_tp, t, nx=20, ny=20)
    field = full_2d(InitialCondition.EQUILIBRIUM, Phase.FREE, t, planar_kin, planar_tp, grid, tol=1e-9, threads=4)
    _, records = run_ensemble(planar_kin, planar_tp, t, 1_000_000, seed=17, dims=2, threads=4)
    x_lo, x_hi = grid.x_edges
    y_lo, y_hi = grid.y_edges
    density = histogram_2d(records, np.append(x_lo, x_hi[-1]), np.append(y_lo, y_hi[-1]), Phase.FREE)
    assert np.abs(density - field.values).sum() * grid.cell_area <= 0.02


@pytest.mark.slow
def test_full_2d_small_longitudinal_dispersion_limit(planar_kin):
    t, d_t = 1.0, 0.1
    tp = TransportParams(v=1.0, d_l=1e-4 * d_t, d_t=d_t)
    grid = line_centred_grid(tp.v, t, d_t)
    field = full_2d(InitialCondition.EQUILIBRIUM, None, t, planar_kin, tp, grid,
                    tol=1e-7, max_panels=8192, threads=2)
    limit = transverse_only(InitialCondition.EQUILIBRIUM, None, t, planar_kin, tp.v, d_t, grid, cell_average=True)
    assert field.atom_origin == pytest.approx(limit.atom_origin)
    assert field_l1_distance(field, limit) <= 1e-4


@pytest.mark.slow
def test_free_field_approaches_late_gaussian(planar_kin, planar_tp):
    t = 150.0
    grid = late_grid(planar_kin, planar_tp, t, nx=121, ny=61)
    field = full_2d(InitialCondition.EQUILIBRIUM, Phase.FREE, t, planar_kin, planar_tp, grid, threads=4)
    gauss = asymptotic_gaussian(Phase.FREE, t, planar_kin, planar_tp, grid)
    assert field_l1_distance(field, gauss) <= 0.05
    for fraction in (0.25, 0.5, 0.75):
        lines = contour_export(field, levels_from_fractions(field, [fraction]), scaled=False)
        reference = contour_export(gauss, levels_from_fractions(gauss, [fraction]), scaled=False)
        assert contour_hausdorff(lines, reference) <= 0.05


def test_transverse_only_cell_average_folds_line_atom():
    kin = KineticsParams(1.0, 1.0)
    v, d_t, t = 1.0, 0.1, 1.0
    grid = line_centred_grid(v, t, d_t, columns=10, ny=12)
    field = transverse_only(InitialCondition.EQUILIBRIUM, None, t, kin, v, d_t, grid, cell_average=True)
    assert field.cell_averaged
    assert field.atom_line == 0.0
    assert field_mass(field) == pytest.approx(1.0, abs=1e-8)
    assert np.all(field.values[:, -1] == 0.0)


def test_line_centred_grid():
    grid = line_centred_grid(2.0, 1.5, 0.1, columns=10, ny=8)
    assert grid.shape == (8, 12)
    assert grid.x[0] == 0.0
    assert grid.x[10] == pytest.approx(3.0)
    with pytest.raises(ParameterError):
        line_centred_grid(0.0, 1.5, 0.1)


def test_late_grid_centred_on_free_gaussian(planar_kin, planar_tp):
    grid = late_grid(planar_kin, planar_tp, 150.0, nx=81, ny=41)
    gauss = asymptotic_gaussian(Phase.FREE, 150.0, planar_kin, planar_tp, grid)
    assert np.argmax(marginal_x(gauss)) == 40
    assert field_mass(gauss) == pytest.approx(planar_kin.pi_f, abs=1e-6)


def test_cell_averaged_variance_corrected(planar_kin, planar_tp):
    grid = default_grid(planar_kin, planar_tp, 4.0, nx=10, ny=15)
    gauss = asymptotic_gaussian(None, 4.0, planar_kin, planar_tp, grid)
    columns = marginal_x(gauss) > 1e-3 * marginal_x(gauss).max()
    expected = 2.0 * planar_kin.pi_f * planar_tp.d_t * 4.0
    np.testing.assert_allclose(conditional_y_variance(gauss)[columns], expected, rtol=1e-4)


def test_asymptotic_gaussian_masses(planar_kin, planar_tp):
    grid = default_grid(planar_kin, planar_tp, 50.0, nx=400, ny=100, x_min=-60.0, x_max=110.0)
    free = asymptotic_gaussian(Phase.FREE, 50.0, planar_kin, planar_tp, grid)
    adsorbed = asymptotic_gaussian(Phase.ADSORBED, 50.0, planar_kin, planar_tp, grid)
    total = asymptotic_gaussian(None, 50.0, planar_kin, planar_tp, grid)
    assert field_mass(free) == pytest.approx(0.5, rel=1e-3)
    assert field_mass(free) + field_mass(adsorbed) == pytest.approx(field_mass(total), rel=1e-3)
    lead = (marginal_x(free) * grid.x).sum() / marginal_x(free).sum()
    lag = (marginal_x(adsorbed) * grid.x).sum() / marginal_x(adsorbed).sum()
    assert lead - lag == pytest.approx(planar_tp.v / planar_kin.total_rate, rel=1e-3)


def test_field_helpers():
    grid = Grid2D(x=np.array([0.0, 1.0]), y=np.array([0.0, 2.0]))
    values = np.array([[1.0, 0.0], [1.0, 2.0]])
    field = DensityField2D(grid=grid, values=values, phase=None, t=1.0,
                           initial=InitialCondition.EQUILIBRIUM, atom_origin=0.25)
    assert field_mass(field) == pytest.approx(2 * 4.0 + 0.25)
    np.testing.assert_allclose(marginal_x(field), [4.0, 4.0])
    np.testing.assert_allclose(conditional_y_variance(field), [2.0, 4.0])
    assert field_l1_distance(field, field) == 0.0

    other = DensityField2D(grid=Grid2D(x=np.array([0.0]), y=np.array([0.0])), values=np.ones((1, 1)),
                           phase=None, t=1.0, initial=InitialCondition.EQUILIBRIUM)
    with pytest.raises(ParameterError):
        field_l1_distance(field, other)
