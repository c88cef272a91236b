import numpy as np
import pytest
from scipy.special import iv

from shearmix.grid import (
    PeriodicGrid1D,
    PeriodicGrid2D,
    ScalarField,
    analyze,
    periodic_primitive,
    quadrature,
    spectral_derivative,
    spectral_interpolate,
    synthesize,
)


def _field(fn, n_x=32, n_y=64):
    return ScalarField.from_function(fn, PeriodicGrid2D(n_x, n_y))


def test_grid_requires_power_of_two():
    with pytest.raises(ValueError):
        PeriodicGrid1D(48)
    with pytest.raises(ValueError):
        PeriodicGrid2D(32, 100)


def test_scalar_field_rejects_nan():
    vals = np.zeros((4, 4))
    vals[1, 2] = np.nan
    with pytest.raises(ValueError):
        ScalarField(PeriodicGrid2D(4, 4), vals)


def test_analyze_synthesize_round_trip():
    f = _field(lambda x, y: np.cos(3 * x) * np.sin(2 * y) + 0.2 * np.sin(x))
    g = synthesize(analyze(f))
    np.testing.assert_allclose(g.values, f.values, atol=1e-13)


def test_analyze_coefficient_convention():
    # f = cos x has f_{+1} = f_{-1} = 1/2 constant in y
    f = _field(lambda x, y: np.cos(x) + 0.0 * y)
    modes = analyze(f)
    i = list(modes.wavenumbers).index(1)
    np.testing.assert_allclose(modes.profiles[i], 0.5, atol=1e-13)


def test_conjugate_symmetry_defect_zero_for_real_fields():
    f = _field(lambda x, y: np.cos(2 * x + y) + np.sin(x))
    assert analyze(f).conjugate_symmetry_defect() < 1e-13


def test_parseval():
    f = _field(lambda x, y: np.cos(x) * np.sin(3 * y) + 0.5 * np.cos(2 * y))
    c = np.fft.fft2(f.values) / f.values.size
    assert abs(np.mean(f.values**2) - np.sum(np.abs(c) ** 2)) < 1e-13


def test_quadrature_bessel_oracle():
    # integral over T of e^{cos y} dy = 2*pi*I_0(1)
    y = PeriodicGrid1D(128).nodes
    val = quadrature(np.exp(np.cos(y)))
    assert abs(val - 2 * np.pi * iv(0, 1.0)) < 1e-12
    assert abs(val - 7.95492652101284) < 1e-8


def test_spectral_derivative_exact_on_band_limited():
    y = PeriodicGrid1D(64).nodes
    h = np.sin(3 * y) + 0.5 * np.cos(5 * y)
    np.testing.assert_allclose(
        spectral_derivative(h, 1), 3 * np.cos(3 * y) - 2.5 * np.sin(5 * y),
        atol=1e-12)
    np.testing.assert_allclose(
        spectral_derivative(h, 2), -9 * np.sin(3 * y) - 12.5 * np.cos(5 * y),
        atol=1e-11)


def test_periodic_primitive_inverts_derivative():
    y = PeriodicGrid1D(128).nodes
    h = np.cos(2 * y)  # mean zero
    H = periodic_primitive(h, "MeanZero")
    np.testing.assert_allclose(spectral_derivative(H, 1), h, atol=1e-12)
    np.testing.assert_allclose(H, 0.5 * np.sin(2 * y), atol=1e-12)


def test_periodic_primitive_centerings():
    y = PeriodicGrid1D(256).nodes
    h = np.cos(y) + 0.3 * np.sin(2 * y)
    Hs = periodic_primitive(h, "MinMaxCenter")
    assert abs(Hs.max() + Hs.min()) < 1e-12       # sup-optimal centering
    Hm = periodic_primitive(h, "Median")
    assert abs(np.median(Hm)) < 1e-12
    # sup-centered primitive has the smallest possible sup norm
    assert np.max(np.abs(Hs)) <= np.max(np.abs(Hm)) + 1e-12


def test_periodic_primitive_rejects_nonzero_mean():
    with pytest.raises(ValueError):
        periodic_primitive(np.cos(PeriodicGrid1D(64).nodes) + 1.0)


def test_x_mean_residual():
    f = _field(lambda x, y: np.cos(x) * np.sin(y))
    assert f.x_mean_residual() < 1e-14
    g = _field(lambda x, y: np.cos(x) * np.sin(y) + 0.25 * np.cos(y))
    assert abs(g.x_mean_residual() - 0.25) < 1e-13


def test_spectral_interpolate_matches_closed_form():
    f = _field(lambda x, y: np.cos(x) * np.sin(y) + 0.3 * np.cos(2 * x + 3 * y))
    rng = np.random.default_rng(0)
    xs = rng.uniform(0, 2 * np.pi, 40)
    ys = rng.uniform(0, 2 * np.pi, 40)
    ref = np.cos(xs) * np.sin(ys) + 0.3 * np.cos(2 * xs + 3 * ys)
    np.testing.assert_allclose(spectral_interpolate(f, xs, ys), ref, atol=1e-12)
