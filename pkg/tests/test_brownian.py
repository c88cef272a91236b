import numpy as np
import pytest

from shearmix.brownian import (
    BrownianPath,
    GoodEventParams,
    classify_good_event,
    default_phase_steps,
    derive_rng,
    gaussian_upper_tail,
    sample_path,
)


def test_derive_rng_deterministic_and_independent():
    a = derive_rng(7, 3).standard_normal(5)
    b = derive_rng(7, 3).standard_normal(5)
    c = derive_rng(7, 4).standard_normal(5)
    np.testing.assert_array_equal(a, b)
    assert not np.allclose(a, c)


def test_sample_path_shape_and_start():
    p = sample_path(seed=1, t_horizon=4.0, M=100)
    assert p.times.shape == p.W.shape == p.B.shape == (101,)
    assert p.W[0] == 0.0 and p.B[0] == 0.0
    assert p.horizon == pytest.approx(4.0)
    assert p.n_steps == 100


def test_sample_path_validation():
    with pytest.raises(ValueError):
        sample_path(seed=0, t_horizon=1.0, M=1)
    with pytest.raises(ValueError):
        sample_path(seed=0, t_horizon=0.0, M=16)


def test_path_increment_moments():
    # empirical variance of W_T over many paths matches T
    T, n = 2.5, 4000
    finals = np.array([
        sample_path(seed=0, t_horizon=T, M=64, rng=derive_rng(0, i)).W[-1]
        for i in range(n)
    ])
    assert abs(finals.mean()) < 4 * np.sqrt(T / n)
    assert abs(finals.var() - T) < 5 * T * np.sqrt(2.0 / n)


def test_w_and_b_uncorrelated():
    n = 4000
    pairs = np.array([
        (lambda p: (p.W[-1], p.B[-1]))(
            sample_path(seed=0, t_horizon=1.0, M=32, rng=derive_rng(1, i)))
        for i in range(n)
    ])
    corr = np.corrcoef(pairs.T)[0, 1]
    assert abs(corr) < 4.0 / np.sqrt(n)


def test_good_event_params_validation():
    GoodEventParams(delta=0.3, p=0.8, N=1)     # (1/2, 1) is fine
    with pytest.raises(ValueError):
        GoodEventParams(delta=0.3, p=0.5, N=1)  # at the lower endpoint
    with pytest.raises(ValueError):
        GoodEventParams(delta=0.3, p=1.0, N=1)
    with pytest.raises(ValueError):
        GoodEventParams(delta=-0.1, p=0.8, N=1)
    with pytest.raises(ValueError):
        GoodEventParams(delta=0.3, p=0.55, N=2)  # below (N+1)/(N+3) = 0.6
    GoodEventParams(delta=0.3, p=0.7, N=2)


def test_default_p_is_interior():
    for N in (1, 2, 3):
        params = GoodEventParams.with_default_p(0.3, N)
        lo = (N + 1) / (N + 3)
        assert lo < params.p < 1.0


def test_t_nu_values():
    params = GoodEventParams(delta=0.3, p=0.8, N=1)
    assert params.t_nu(1e-4) == pytest.approx(1e-4 ** -0.8)
    assert params.t_nu(0.0) == np.inf


def test_separation_condition():
    params = GoodEventParams(delta=0.3, p=0.8, N=1)
    params.validate_separation(np.pi)       # delta < pi/4 holds
    with pytest.raises(ValueError):
        params.validate_separation(1.0)     # delta >= 0.25


def test_classify_good_event_threshold():
    params = GoodEventParams(delta=0.3, p=0.8, N=1)
    nu = 1e-2
    times = np.linspace(0.0, 10.0, 11)
    small = BrownianPath(times=times, W=np.zeros(11), B=np.zeros(11),
                         seed=0, nu=nu)
    assert classify_good_event(small, params, nu)
    W = np.zeros(11)
    W[5] = (params.delta + 0.01) / np.sqrt(2 * nu)
    big = BrownianPath(times=times, W=W, B=np.zeros(11), seed=0, nu=nu)
    assert not classify_good_event(big, params, nu)


def test_classify_good_event_ignores_excursion_after_t_nu():
    params = GoodEventParams(delta=0.3, p=0.8, N=1)
    nu = 0.1  # t_nu ~ 6.3
    times = np.linspace(0.0, 10.0, 101)
    W = np.zeros(101)
    W[-1] = 100.0  # excursion at t = 10 > t_nu
    path = BrownianPath(times=times, W=W, B=np.zeros(101), seed=0, nu=nu)
    assert classify_good_event(path, params, nu)


def test_inviscid_paths_always_good():
    params = GoodEventParams(delta=0.3, p=0.8, N=1)
    path = sample_path(seed=3, t_horizon=100.0, M=64)
    assert classify_good_event(path, params, nu=0.0)


def test_gaussian_tail_closed_form():
    from scipy.stats import norm
    assert gaussian_upper_tail(1.3) == pytest.approx(norm.sf(1.3), rel=1e-12)


def test_default_phase_steps_resolution():
    assert default_phase_steps(10.0) >= 1000   # ds <= 0.01
    assert default_phase_steps(1e5) >= 2048    # never fewer than 2048 steps
