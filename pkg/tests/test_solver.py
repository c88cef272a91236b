import numpy as np
import pytest
from scipy.special import j0

from shearmix.grid import PeriodicGrid2D, ScalarField
from shearmix.shear import ShearProfile
from shearmix.solver import (
    EvolutionConfig,
    default_dt,
    solve_exact_inviscid,
    solve_viscous,
)

COS_Y = ShearProfile.cos_power(1)


def _f0(fn, n_x=32, n_y=128):
    return ScalarField.from_function(fn, PeriodicGrid2D(n_x, n_y))


def test_inviscid_closed_form():
    f0 = _f0(lambda x, y: np.cos(x) * np.sin(y))
    t = 7.3
    f = solve_exact_inviscid(f0, COS_Y, t)
    X, Y = f.grid.meshgrid()
    np.testing.assert_allclose(
        f.values, np.cos(X - t * np.cos(Y)) * np.sin(Y), atol=1e-12)


def test_inviscid_x_average_is_bessel():
    # y-average of the k=1 column of cos(x - t cos y) is J0(t) cos x
    f0 = _f0(lambda x, y: np.cos(x) + 0.0 * y, n_y=1024)
    t = 12.0
    f = solve_exact_inviscid(f0, COS_Y, t)
    prof = f.values.mean(axis=1)
    np.testing.assert_allclose(prof, j0(t) * np.cos(f.grid.x), atol=1e-10)


def test_viscous_reduces_to_inviscid_at_nu_zero():
    f0 = _f0(lambda x, y: np.cos(x) * np.sin(y) + 0.4 * np.sin(2 * x + y))
    cfg = EvolutionConfig(nu=0.0, sample_times=[2.0, 5.0])
    for t, f in solve_viscous(f0, COS_Y, cfg):
        ref = solve_exact_inviscid(f0, COS_Y, t)
        np.testing.assert_allclose(f.values, ref.values, atol=1e-11)


def test_viscous_pure_heat_decay():
    # zero shear: cos x decays as e^{-nu t}, sin(2y) as e^{-4 nu t}
    zero = ShearProfile.from_fourier([(1, 0.0, 0.0)])
    f0 = _f0(lambda x, y: np.cos(x) + np.sin(2 * y))
    nu, t = 0.05, 3.0
    (_, f), = solve_viscous(f0, zero, EvolutionConfig(nu=nu, sample_times=[t]))
    X, Y = f.grid.meshgrid()
    ref = np.exp(-nu * t) * np.cos(X) + np.exp(-4 * nu * t) * np.sin(2 * Y)
    np.testing.assert_allclose(f.values, ref, atol=1e-12)


def test_splitting_second_order():
    f0 = _f0(lambda x, y: np.cos(x) * np.sin(y))
    t = 2.0

    def err(dt):
        cfg = EvolutionConfig(nu=0.02, sample_times=[t], dt=dt)
        (_, f), = solve_viscous(f0, COS_Y, cfg)
        cfg_fine = EvolutionConfig(nu=0.02, sample_times=[t], dt=dt / 16)
        (_, ref), = solve_viscous(f0, COS_Y, cfg_fine)
        return np.max(np.abs(f.values - ref.values))

    ratio = err(0.1) / err(0.05)
    assert 3.0 < ratio < 5.0


def test_mean_preserved_and_l2_monotone():
    f0 = _f0(lambda x, y: np.cos(x) * np.sin(y) + 0.3 * np.cos(2 * x))
    cfg = EvolutionConfig(nu=1e-2, sample_times=[1.0, 4.0, 16.0, 64.0])
    prev = np.sqrt(np.mean(f0.values**2))
    for _, f in solve_viscous(f0, COS_Y, cfg):
        assert abs(np.mean(f.values)) < 1e-13
        cur = np.sqrt(np.mean(f.values**2))
        assert cur <= prev + 1e-13
        prev = cur


def test_l2_conserved_inviscid():
    f0 = _f0(lambda x, y: np.cos(x) * np.sin(y))
    cfg = EvolutionConfig(nu=0.0, sample_times=[50.0])
    (_, f), = solve_viscous(f0, COS_Y, cfg)
    assert abs(np.mean(f.values**2) - np.mean(f0.values**2)) < 1e-12


def test_y_resample_override():
    f0 = _f0(lambda x, y: np.cos(x) * np.sin(y), n_y=64)
    cfg = EvolutionConfig(nu=0.0, sample_times=[3.0], n_y=256)
    (_, f), = solve_viscous(f0, COS_Y, cfg)
    assert f.grid.n_y == 256
    X, Y = f.grid.meshgrid()
    np.testing.assert_allclose(f.values, np.cos(X - 3.0 * np.cos(Y)) * np.sin(Y),
                               atol=1e-11)


def test_config_validation():
    with pytest.raises(ValueError):
        EvolutionConfig(nu=-1.0, sample_times=[1.0])
    with pytest.raises(ValueError):
        EvolutionConfig(nu=0.1, sample_times=[2.0, 1.0])
    with pytest.raises(ValueError):
        EvolutionConfig(nu=0.1, sample_times=[1.0], dt=0.0)


def test_mean_zero_enforcement():
    f0 = _f0(lambda x, y: np.cos(x) * np.sin(y) + np.cos(y))
    cfg = EvolutionConfig(nu=0.0, sample_times=[1.0], require_mean_zero=True)
    with pytest.raises(ValueError):
        solve_viscous(f0, COS_Y, cfg)


def test_default_dt_scales_with_frequency():
    assert default_dt(1, 1.0) == pytest.approx(0.05)
    assert default_dt(8, 1.0) == pytest.approx(0.1 / 8)
