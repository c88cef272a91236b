import numpy as np
import pytest

from shearmix.brownian import BrownianPath, sample_path
from shearmix.grid import PeriodicGrid1D
from shearmix.phase import (
    PhaseAccumulator,
    calibrate_sublevel_constant,
    check_inverse_derivative_integral,
    compute_phase_field,
    count_zeros_near_critical_points,
    sublevel_set,
)
from shearmix.shear import ShearProfile, analyze_critical_structure

COS_Y = ShearProfile.cos_power(1)
GRID = PeriodicGrid1D(512)


def _frozen_path(t_horizon=200.0, M=256):
    """A path with W identically zero: phi_t = t * b exactly."""
    times = np.linspace(0.0, t_horizon, M + 1)
    return BrownianPath(times=times, W=np.zeros(M + 1), B=np.zeros(M + 1),
                        seed=0, nu=0.0)


def test_inviscid_phase_is_t_times_b():
    path = sample_path(seed=5, t_horizon=50.0, M=1024)
    t = 37.5
    f = compute_phase_field(COS_Y, path, nu=0.0, t=t, grid=GRID)
    y = GRID.nodes
    np.testing.assert_allclose(f.phi, t * np.cos(y), atol=1e-9)
    np.testing.assert_allclose(f.S, -t * np.sin(y), atol=1e-9)
    np.testing.assert_allclose(f.S_prime_at(y), -t * np.cos(y), atol=1e-9)


def test_off_grid_evaluation_matches_grid():
    path = sample_path(seed=2, t_horizon=20.0, M=4096, nu=1e-2)
    f = compute_phase_field(COS_Y, path, nu=1e-2, t=20.0, grid=GRID)
    np.testing.assert_allclose(f.phi_at(GRID.nodes), f.phi, atol=1e-12)
    np.testing.assert_allclose(f.S_at(GRID.nodes), f.S, atol=1e-12)


def test_partial_step_queries_are_consistent():
    path = sample_path(seed=9, t_horizon=10.0, M=1000, nu=1e-2)
    acc = PhaseAccumulator(COS_Y, path, 1e-2)
    # t on a grid node vs just off it differ by O(dt), not a jump
    a = acc.field_at(5.0, GRID).phi
    b = acc.field_at(5.004, GRID).phi
    assert np.max(np.abs(a - b)) < 0.02


def test_horizon_guard():
    path = sample_path(seed=0, t_horizon=5.0, M=64)
    with pytest.raises(ValueError):
        compute_phase_field(COS_Y, path, nu=0.0, t=6.0, grid=GRID)


def test_sublevel_closed_form_measure():
    # S = -t sin y, threshold c sqrt(t): measure = 4 arcsin(c/sqrt(t))
    t, c = 100.0, 0.1
    f = compute_phase_field(COS_Y, _frozen_path(), nu=0.0, t=t, grid=GRID)
    rep = sublevel_set(f, c=c, N=1)
    assert rep.cover_count == 2
    assert rep.measure == pytest.approx(4 * np.arcsin(c / np.sqrt(t)), abs=1e-4)
    assert rep.measure == pytest.approx(0.0400007, abs=1e-4)


def test_sublevel_full_and_empty_covers():
    f = compute_phase_field(COS_Y, _frozen_path(), nu=0.0, t=100.0, grid=GRID)
    full = sublevel_set(f, c=200.0, N=1)    # threshold 2000 > sup|S| = 100
    assert full.measure == pytest.approx(2 * np.pi)
    assert full.complement == []
    tiny = sublevel_set(f, c=1e-12, N=1)
    assert tiny.measure < 1e-6              # zeros of sin y have measure zero


def test_complement_partitions_torus():
    f = compute_phase_field(COS_Y, _frozen_path(), nu=0.0, t=100.0, grid=GRID)
    rep = sublevel_set(f, c=0.1, N=1)
    comp_len = sum((b - a) % (2 * np.pi) or (b - a) for a, b in rep.complement)
    assert rep.measure + comp_len == pytest.approx(2 * np.pi, abs=1e-10)


def test_inverse_derivative_closed_form():
    # integral over {|S| > c sqrt(t)} of |(1/S)'| = 4 (1/(c sqrt t) - 1/t)
    t, c = 100.0, 0.1
    f = compute_phase_field(COS_Y, _frozen_path(), nu=0.0, t=t, grid=GRID)
    rep = sublevel_set(f, c=c, N=1)
    val = check_inverse_derivative_integral(f, rep)
    assert val == pytest.approx(4 * (1 / (c * np.sqrt(t)) - 1 / t), abs=1e-6)
    assert val == pytest.approx(3.96, abs=0.05)


def test_zero_counts_for_smooth_perturbation():
    structure = analyze_critical_structure(COS_Y)
    path = sample_path(seed=11, t_horizon=64.0, M=8192, nu=1e-4)
    f = compute_phase_field(COS_Y, path, nu=1e-4, t=64.0, grid=GRID)
    cs, csp = count_zeros_near_critical_points(f, structure, delta=0.3)
    assert all(c <= 1 for c in cs)
    assert all(c <= 1 for c in csp)


def test_calibrated_constant_localizes_sublevel():
    structure = analyze_critical_structure(COS_Y)
    nu = 1e-4
    accs = [
        PhaseAccumulator(COS_Y, sample_path(seed=0, t_horizon=64.0, M=8192,
                                            nu=nu, rng=None), nu)
    ]
    ts = [4.0, 16.0, 64.0]
    c = calibrate_sublevel_constant(COS_Y, structure, 0.3, accs, ts, GRID)
    assert c > 0
    # with the calibrated c, the sublevel set stays inside the 2delta balls
    f = accs[0].field_at(64.0, GRID)
    rep = sublevel_set(f, c=c, N=1)
    from shearmix.shear import torus_distance
    for a, b in rep.intervals:
        mid = 0.5 * (a + b)
        assert min(torus_distance(mid, yi) for yi in structure.points) < 2 * 0.3


def test_cover_count_merge_cap():
    f = compute_phase_field(COS_Y, _frozen_path(), nu=0.0, t=100.0, grid=GRID)
    rep = sublevel_set(f, c=0.1, N=1, max_intervals=1)
    assert rep.cover_count == 1
    assert rep.measure >= 0.04  # merging only adds measure
