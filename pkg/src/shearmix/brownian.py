"""Brownian path sampling, the good noise event, and its tail bound.

Paths are stored unscaled (standard Brownian motion); the sqrt(2*nu)
factor is applied at use sites.  Seeding is counter-based: path i of a
sweep uses the Philox stream of the master seed jumped by i, so parallel
sweeps reproduce serial ones path-for-path.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import erfc, sqrt

import numpy as np

# prefactor of the Gaussian tail bound exp(-delta^2 / (8 nu^(1-p))):
# 4/sqrt(4 pi a) * int_delta^inf exp(-z^2/(4a)) dz
#   <= 4/sqrt(4 pi a) * exp(-delta^2/(8a)) * sqrt(2 pi a) = 2 sqrt(2) * exp(...)
TAIL_BOUND_PREFACTOR = 2.0 * np.sqrt(2.0)


def derive_rng(master_seed: int, index: int) -> np.random.Generator:
    """Counter-based per-path generator: Philox jumped by the path index."""
    return np.random.Generator(np.random.Philox(key=master_seed).jumped(index))


def gaussian_upper_tail(x: float) -> float:
    """P(Z > x) for standard normal Z."""
    return 0.5 * erfc(x / sqrt(2.0))


@dataclass
class BrownianPath:
    times: np.ndarray       # uniform grid, 0 = s_0 < ... < s_M
    W: np.ndarray
    B: np.ndarray
    seed: int
    nu: float = 0.0         # bookkeeping only; values are unscaled

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @property
    def n_steps(self) -> int:
        return len(self.times) - 1


def default_phase_steps(t_horizon: float) -> int:
    # ds = min(0.01, horizon/2048), so quadrature error in the phase
    # integrals sits below the lemma tolerances
    ds = min(0.01, t_horizon / 2048.0)
    return max(2048, int(np.ceil(t_horizon / ds)))


def sample_path(seed: int, t_horizon: float, M: int, nu: float = 0.0,
                rng: np.random.Generator | None = None) -> BrownianPath:
    """One (W, B) realization on a uniform grid of M steps."""
    if M < 2:
        raise ValueError(f"need at least 2 steps, got M={M}")
    if t_horizon <= 0:
        raise ValueError(f"t_horizon must be positive, got {t_horizon}")
    if rng is None:
        rng = np.random.Generator(np.random.Philox(key=seed))
    ds = t_horizon / M
    incr = rng.standard_normal((2, M)) * np.sqrt(ds)
    W = np.concatenate([[0.0], np.cumsum(incr[0])])
    B = np.concatenate([[0.0], np.cumsum(incr[1])])
    times = np.linspace(0.0, t_horizon, M + 1)
    return BrownianPath(times=times, W=W, B=B, seed=seed, nu=nu)


@dataclass(frozen=True)
class GoodEventParams:
    """Threshold delta and timescale exponent p, with t_nu = nu^(-p)."""

    delta: float
    p: float
    N: int

    def __post_init__(self):
        lo = (self.N + 1) / (self.N + 3)
        if not (lo < self.p < 1.0):
            raise ValueError(
                f"p={self.p} outside the open interval ({lo:.4f}, 1) for N={self.N}"
            )
        if self.delta <= 0:
            raise ValueError("delta must be positive")

    @staticmethod
    def with_default_p(delta: float, N: int) -> "GoodEventParams":
        lo = (N + 1) / (N + 3)
        return GoodEventParams(delta=delta, p=0.5 * (lo + 1.0), N=N)

    def t_nu(self, nu: float) -> float:
        if nu <= 0:
            return np.inf
        return nu ** (-self.p)

    def validate_separation(self, min_pairwise_distance: float):
        if self.delta >= 0.25 * min_pairwise_distance:
            raise ValueError(
                f"delta={self.delta} violates the separation condition "
                f"delta < {0.25 * min_pairwise_distance:.4f}"
            )


def classify_good_event(path: BrownianPath, params: GoodEventParams,
                        nu: float) -> bool:
    """True iff max_{s <= min(t_nu, horizon)} |sqrt(2 nu) W_s| <= delta.

    Paths shorter than t_nu are classified over their own horizon: the
    analysis at time t only constrains the noise up to t.
    """
    if nu == 0:
        return True
    t_nu = params.t_nu(nu)
    mask = path.times <= t_nu
    return bool(np.sqrt(2.0 * nu) * np.max(np.abs(path.W[mask])) <= params.delta)


def verify_tail_bound(nu: float, params: GoodEventParams, n_paths: int,
                      master_seed: int = 0, M: int = 2048,
                      chunk: int = 2048) -> dict:
    """Empirical bad-event probability against the reflection-principle bounds.

    Returns empirical P(bad), the Gaussian bracket [2, 4] * upper_tail(delta/sigma)
    with sigma = sqrt(2 nu t_nu), the explicit exponential bound, and the
    power-law threshold t_nu^(-1/(N+1)).
    """
    if n_paths < 10**4:
        raise ValueError("tail verification needs at least 1e4 paths")
    t_nu = params.t_nu(nu)
    scale = np.sqrt(2.0 * nu)
    ds = t_nu / M
    n_bad = 0
    done = 0
    dyadic_t = 2.0 ** np.arange(0, int(np.floor(np.log2(t_nu))) + 1)
    dyadic_idx = np.minimum((dyadic_t / ds).astype(int), M)
    n_bad_by_t = np.zeros(len(dyadic_t), dtype=int)
    chunk_index = 0
    while done < n_paths:
        m = min(chunk, n_paths - done)
        rng = derive_rng(master_seed, chunk_index)
        incr = rng.standard_normal((m, M)) * np.sqrt(ds)
        W = np.cumsum(incr, axis=1)
        sup = np.maximum.accumulate(np.abs(W), axis=1)
        n_bad += int(np.count_nonzero(scale * sup[:, -1] > params.delta))
        for j, idx in enumerate(dyadic_idx):
            n_bad_by_t[j] += int(
                np.count_nonzero(scale * sup[:, max(idx - 1, 0)] > params.delta)
            )
        done += m
        chunk_index += 1

    empirical_p = n_bad / n_paths
    sigma = np.sqrt(2.0 * nu * t_nu)
    tail = gaussian_upper_tail(params.delta / sigma)
    exp_bound = TAIL_BOUND_PREFACTOR * np.exp(
        -params.delta**2 / (8.0 * nu ** (1.0 - params.p))
    )
    power_threshold = t_nu ** (-1.0 / (params.N + 1))
    return {
        "nu": nu,
        "t_nu": t_nu,
        "n_paths": n_paths,
        "empirical_p": empirical_p,
        "gaussian_lower": 2.0 * tail,
        "gaussian_upper": min(4.0 * tail, 1.0),
        "exp_bound": exp_bound,
        "power_threshold": power_threshold,
        "pass_exp_bound": empirical_p <= exp_bound,
        "pass_power_bound": empirical_p <= power_threshold,
        "dyadic_t": dyadic_t,
        "empirical_p_by_t": n_bad_by_t / n_paths,
    }
