import numpy as np
import pytest

from shearmix.brownian import sample_path
from shearmix.fkmc import (
    estimate_solution,
    measure_preservation_check,
    sample_flow_map,
)
from shearmix.grid import PeriodicGrid2D, ScalarField
from shearmix.shear import ShearProfile
from shearmix.solver import EvolutionConfig, solve_exact_inviscid, solve_viscous

COS_Y = ShearProfile.cos_power(1)


def _f0(fn, n_x=16, n_y=32):
    return ScalarField.from_function(fn, PeriodicGrid2D(n_x, n_y))


def test_inviscid_single_path_is_exact():
    # at nu = 0 every path gives the deterministic composition
    f0 = _f0(lambda x, y: np.cos(x) * np.sin(y) + 0.3 * np.cos(2 * x))
    t = 6.0
    est = estimate_solution(f0, COS_Y, nu=0.0, t=t, n_paths=2)
    ref = solve_exact_inviscid(f0, COS_Y, t)
    np.testing.assert_allclose(est.field.values, ref.values, atol=1e-12)
    assert est.max_standard_error < 1e-13


def test_antithetic_requires_even_paths():
    f0 = _f0(lambda x, y: np.cos(x) * np.sin(y))
    with pytest.raises(ValueError):
        estimate_solution(f0, COS_Y, nu=1e-3, t=1.0, n_paths=3)


def test_viscous_agrees_with_spectral_solver():
    f0 = _f0(lambda x, y: np.cos(x) * np.sin(y))
    nu, t = 1e-2, 2.0
    est = estimate_solution(f0, COS_Y, nu=nu, t=t, n_paths=400, master_seed=3)
    (_, ref), = solve_viscous(f0, COS_Y, EvolutionConfig(nu=nu, sample_times=[t]))
    err = np.abs(est.field.values - ref.values)
    tol = 3.0 * est.standard_error + 5e-4
    frac = np.mean(err <= tol)
    assert frac >= 0.99


def test_estimator_reproducible():
    f0 = _f0(lambda x, y: np.cos(x) * np.sin(y))
    a = estimate_solution(f0, COS_Y, nu=1e-3, t=1.0, n_paths=8, master_seed=5)
    b = estimate_solution(f0, COS_Y, nu=1e-3, t=1.0, n_paths=8, master_seed=5)
    np.testing.assert_array_equal(a.field.values, b.field.values)


def test_flow_map_shapes_and_range():
    path = sample_path(seed=1, t_horizon=3.0, M=512, nu=1e-2)
    pts = np.random.default_rng(0).uniform(0, 2 * np.pi, (50, 2))
    img = sample_flow_map(COS_Y, path, nu=1e-2, t=3.0, points=pts)
    assert img.shape == (50, 2)
    assert np.all(img >= 0) and np.all(img < 2 * np.pi)
    with pytest.raises(ValueError):
        sample_flow_map(COS_Y, path, nu=1e-2, t=3.0, points=np.zeros((4, 3)))


def test_flow_map_inviscid_closed_form():
    path = sample_path(seed=1, t_horizon=5.0, M=512, nu=0.0)
    pts = np.array([[1.0, 0.5], [3.0, 2.0]])
    img = sample_flow_map(COS_Y, path, nu=0.0, t=5.0, points=pts)
    np.testing.assert_allclose(img[:, 1], pts[:, 1], atol=1e-12)
    np.testing.assert_allclose(
        img[:, 0], np.mod(pts[:, 0] - 5.0 * np.cos(pts[:, 1]), 2 * np.pi),
        atol=1e-9)


def test_flow_map_shifts_y_uniformly():
    # the y-component of the flow is a rigid translation by sqrt(2 nu) W_t
    nu = 1e-2
    path = sample_path(seed=4, t_horizon=2.0, M=512, nu=nu)
    pts = np.random.default_rng(1).uniform(0, 2 * np.pi, (20, 2))
    img = sample_flow_map(COS_Y, path, nu=nu, t=2.0, points=pts)
    shifts = np.mod(img[:, 1] - pts[:, 1], 2 * np.pi)
    assert np.ptp(shifts) < 1e-10


def test_measure_preservation():
    out = measure_preservation_check(COS_Y, nu=1e-3, t=4.0, n_points=1 << 14,
                                     bins=64, seed=2)
    assert out["ok"]
    assert out["chi2_x"] <= out["threshold"]
    assert out["chi2_y"] <= out["threshold"]
