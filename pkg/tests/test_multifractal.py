import math

import numpy as np
import pytest

from spinfractal import (
    AnalysisOptions,
    QGrid,
    ScalingRangeError,
    SpecError,
    analyze_distance_matrix,
    binomial_cascade_matrix,
    box_measures,
    fit_mass_exponents,
    generalized_dimensions,
    greedy_cover,
    hurst_exponents,
    lattice_distance_matrix,
    legendre_spectrum,
    partition_function,
    specific_heat,
)
from spinfractal.box_cover import BoxMeasures


def measures_from_sizes(radii, sizes_per_radius, n):
    return [
        BoxMeasures(radius=r, sizes=np.asarray(s, dtype=np.int64), n=n)
        for r, s in zip(radii, sizes_per_radius)
    ]


def test_qgrid_default():
    grid = QGrid.regular()
    assert len(grid) == 79  # 81 uniform points minus q = 0 and q = 1
    assert not np.any(np.isclose(grid.values, 0.0))
    assert not np.any(np.isclose(grid.values, 1.0))
    assert np.all(np.diff(grid.values) > 0)


def test_qgrid_validation():
    with pytest.raises(SpecError):
        QGrid(values=np.array([0.5, 0.5]))
    with pytest.raises(SpecError):
        QGrid(values=np.array([-1.0, 0.0, 2.0]))
    with pytest.raises(SpecError):
        QGrid.regular(2.0, 1.0, 0.5)
    with pytest.raises(SpecError):
        QGrid.regular(-1.0, 1.0, -0.5)


def test_partition_function_examples():
    grid = QGrid(values=np.array([2.0]))
    radii = [0.1, 0.2, 0.4, 0.8]
    table = partition_function(measures_from_sizes(radii, [[1, 1], [1, 1], [1, 1], [2]], 2), grid)
    # mu = (0.5, 0.5), q = 2 -> Z = 0.5
    assert np.exp(table.log_z[0, 0]) == pytest.approx(0.5, rel=1e-12)
    # q = 1 check row -> 1, q = 0 check row -> box count
    assert np.exp(table.log_z1) == pytest.approx(np.ones(4), abs=1e-12)
    assert table.box_counts.tolist() == [2, 2, 2, 1]


def test_partition_function_needs_four_radii():
    grid = QGrid.regular()
    with pytest.raises(ScalingRangeError):
        partition_function(measures_from_sizes([0.1, 0.2], [[1], [1]], 1), grid)


def test_exact_power_law_fit():
    # exact uniform splitting: 2^l equal boxes at radius 2^-l -> tau(q) = q - 1
    n = 1024
    grid = QGrid.regular()
    radii = [2.0**-l for l in range(8, 0, -1)]
    sizes = [[n >> l] * (1 << l) for l in range(8, 0, -1)]
    table = partition_function(measures_from_sizes(radii, sizes, n), grid)
    fit = fit_mass_exponents(table, (0.0, 1.0))
    assert fit.tau == pytest.approx(grid.values - 1.0, abs=1e-9)
    assert fit.tau_q0 == pytest.approx(-1.0, abs=1e-12)
    assert abs(fit.tau_q1_check) < 1e-12
    assert fit.d1 == pytest.approx(1.0, abs=1e-9)
    assert np.all(fit.r_squared > 1.0 - 1e-12)
    assert fit.warnings == []


def test_fit_window_too_small():
    grid = QGrid.regular()
    radii = [0.1, 0.2, 0.4, 0.8]
    # all radii saturated at one box -> excluded -> empty window
    table = partition_function(measures_from_sizes(radii, [[4]] * 4, 4), grid)
    with pytest.raises(ScalingRangeError):
        fit_mass_exponents(table)
    with pytest.raises(SpecError):
        fit_mass_exponents(table, (0.9, 0.1))


def test_lattice_oracle_exponents():
    # mid-range window: clear of the unit-spacing floor (local slope bias
    # ~1/(2k)) and of the integer box-count staircase at the top
    dist = lattice_distance_matrix(512)
    res = analyze_distance_matrix(dist, AnalysisOptions(fit_lo=0.3, fit_hi=0.5))
    i_q2 = int(np.argmin(np.abs(res.q - 2.0)))
    assert res.fit["tau_q0"] == pytest.approx(-1.0, abs=0.05)  # tau(0) = -1 +- 0.05
    assert res.tau[i_q2] == pytest.approx(1.0, abs=0.05)       # tau(2) = 1 +- 0.05
    assert res.d1 == pytest.approx(1.0, abs=0.05)              # D(1) = 1 +- 0.05
    assert res.d0() == pytest.approx(1.0, abs=0.05)


def test_hurst_identities():
    q = QGrid.regular().values
    assert hurst_exponents(q - 1.0, q) == pytest.approx(np.ones_like(q), abs=1e-12)
    assert hurst_exponents(np.array([0.0]), np.array([2.0]))[0] == pytest.approx(0.5)
    h = 0.7
    assert hurst_exponents(h * q - 1.0, q) == pytest.approx(np.full_like(q, h), abs=1e-12)
    with pytest.raises(SpecError):
        hurst_exponents(q - 1.0, np.array([-1.0, 0.0, 1.5]))


def test_dimension_identities():
    q = QGrid.regular().values
    assert generalized_dimensions(q - 1.0, q) == pytest.approx(np.ones_like(q), abs=1e-12)
    assert generalized_dimensions(np.array([-1.0]), np.array([0.0]))[0] == pytest.approx(1.0)
    with pytest.raises(SpecError):
        generalized_dimensions(q - 1.0, np.array([0.5, 1.0, 2.0]))


def test_legendre_linear_tau_degenerate_spectrum():
    q = QGrid.regular().values
    d = 1.3
    alpha, f = legendre_spectrum((q - 1.0) * d, q)
    assert alpha == pytest.approx(np.full_like(q, d), abs=1e-9)
    assert f == pytest.approx(np.full_like(q, d), abs=1e-9)


def test_legendre_quadratic_tau():
    # tau = q - 1 - c q^2 -> alpha = 1 - 2 c q, f = 1 - c q^2 (exact for
    # parabolas under second-order differences)
    q = QGrid.regular().values
    c = 0.03
    tau = q - 1.0 - c * q * q
    alpha, f = legendre_spectrum(tau, q, sort=False)
    assert alpha == pytest.approx(1.0 - 2.0 * c * q, abs=1e-9)
    assert f == pytest.approx(1.0 - c * q * q, abs=1e-9)
    # f(alpha(q)) = q alpha(q) - tau(q) identically
    assert f == pytest.approx(q * alpha - tau, abs=0)
    a_sorted, f_sorted = legendre_spectrum(tau, q)
    assert np.all(np.diff(a_sorted) >= 0)
    with pytest.raises(SpecError):
        legendre_spectrum(tau[:2], q[:2])


def test_specific_heat():
    q = np.arange(-10.0, 10.25, 0.25)
    assert specific_heat(2.0 * q - 1.0, q) == pytest.approx(np.zeros(len(q) - 2), abs=1e-9)
    c = specific_heat(q - 1.0 - 0.01 * q * q, q)
    assert c == pytest.approx(np.full(len(q) - 2, 0.02), abs=1e-9)
    rng = np.random.default_rng(2)
    tau = rng.normal(size=9)
    h = 0.5
    qq = np.arange(9) * h
    expected = -(tau[2:] - 2 * tau[1:-1] + tau[:-2]) / h**2
    assert specific_heat(tau, qq) == pytest.approx(expected, rel=1e-12)
    with pytest.raises(SpecError):
        specific_heat(tau, np.array([0.0, 0.1, 0.3, 0.35, 0.4, 0.42, 0.5, 0.6, 0.61]))
    with pytest.raises(SpecError):
        specific_heat(tau[:2], qq[:2])


def test_cascade_coverings_match_cell_oracle():
    # at radius 2^-l the coverings of the dyadic ultrametric must be exactly
    # the non-empty depth-l cells; compare against direct quantile counting
    levels, weight = 8, 0.3
    dist = binomial_cascade_matrix(levels, weight)
    n = dist.n

    u = (np.arange(n) + 0.5) / n
    cells = np.zeros(n, dtype=np.int64)
    lo = np.zeros(n)
    hi = np.ones(n)
    for _ in range(levels):
        split = lo + weight * (hi - lo)
        left = u <= split
        cells = 2 * cells + (~left)
        hi = np.where(left, split, hi)
        lo = np.where(~left, split, lo)

    for level in (2, 3, 4):
        cover = greedy_cover(dist, 2.0**-level)
        cell_counts = np.bincount(cells >> (levels - level), minlength=1 << level)
        expected = sorted(int(c) for c in cell_counts if c > 0)
        assert sorted(cover.sizes.tolist()) == expected


def test_full_grid_option():
    dist = lattice_distance_matrix(512)
    auto = analyze_distance_matrix(dist, AnalysisOptions(fit_lo=0.3, fit_hi=0.5))
    full = analyze_distance_matrix(dist, AnalysisOptions(max_radii=0, fit_lo=0.3, fit_hi=0.5))
    assert len(auto.radii) == 64
    assert len(full.radii) == 511
