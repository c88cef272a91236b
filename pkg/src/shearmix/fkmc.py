"""Monte Carlo evaluation of the stochastic flow representation.

The solution of the advection-diffusion equation is the expectation of the
initial data composed with the random flow map

    Phi_t(x, y) = (x + sqrt(2 nu) B_t - phi_t(y),  y + sqrt(2 nu) W_t),

taken mod 2*pi in both coordinates.  One sampled path deforms the whole
grid at once: every row shares the y-shift sqrt(2 nu) W_t and every column
shares the x-offset sqrt(2 nu) B_t - phi_t(y_j), so the composed field is
synthesized with two FFT passes per path instead of per-point evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from .brownian import BrownianPath, default_phase_steps, derive_rng, sample_path
from .grid import PeriodicGrid2D, ScalarField, TWO_PI
from .phase import PhaseAccumulator
from .shear import ShearProfile


def sample_flow_map(b: ShearProfile, path: BrownianPath, nu: float, t: float,
                    points: np.ndarray) -> np.ndarray:
    """Apply Phi_t along one path to an array of points, shape (n, 2).

    Returns the image points mod 2*pi; the whole batch shares the single
    realization (shared-path contract), which is what makes the image a
    rigid deformation of the input set.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != 2:
        raise ValueError(f"points must have shape (n, 2), got {pts.shape}")
    acc = PhaseAccumulator(b, path, nu)
    fld = acc.field_at(t, _scratch_grid())
    root = np.sqrt(2.0 * nu)
    w_t, b_t = _endpoint(path, t)
    x = pts[:, 0] + root * b_t - fld.phi_at(pts[:, 1])
    y = pts[:, 1] + root * w_t
    return np.stack([np.mod(x, TWO_PI), np.mod(y, TWO_PI)], axis=1)


def _scratch_grid():
    from .grid import PeriodicGrid1D

    return PeriodicGrid1D(2)


def _endpoint(path: BrownianPath, t: float):
    """(W_t, B_t) with linear interpolation inside the last step."""
    if t > path.horizon + 1e-12:
        raise ValueError(f"t={t} beyond path horizon {path.horizon}")
    w = float(np.interp(t, path.times, path.W))
    bb = float(np.interp(t, path.times, path.B))
    return w, bb


@dataclass
class MCEstimate:
    """Sample-mean field with a per-node standard error of the mean."""

    field: ScalarField
    standard_error: np.ndarray
    n_paths: int
    t: float
    nu: float
    master_seed: int

    @property
    def max_standard_error(self) -> float:
        return float(np.max(self.standard_error))


class _KahanAccumulator:
    """Compensated elementwise summation for the per-node running mean."""

    def __init__(self, shape):
        self.total = np.zeros(shape)
        self._carry = np.zeros(shape)

    def add(self, v: np.ndarray):
        y = v - self._carry
        t = self.total + y
        self._carry = (t - self.total) - y
        self.total = t


def _composed_values(mode_hat: np.ndarray, k: np.ndarray, l: np.ndarray,
                     phi_vals: np.ndarray, shift_y: float,
                     shift_x: float) -> np.ndarray:
    """Synthesize f0(Phi_t(x_i, y_j)) on the tensor grid for one path.

    mode_hat is the full 2D coefficient array (fft2 / (n_x n_y)).  The
    y-shift is applied spectrally, the column-dependent x-offset becomes a
    per-(k, column) phase, and one inverse FFT in x rebuilds the values.
    """
    # f_k(y_j + shift_y): inverse y-transform with a modulation
    shifted = np.fft.ifft(mode_hat * np.exp(1j * l[None, :] * shift_y),
                          axis=1) * mode_hat.shape[1]
    offs = shift_x - phi_vals                       # per-column x offset
    shifted *= np.exp(1j * np.multiply.outer(k, offs))
    vals = np.fft.ifft(shifted, axis=0) * mode_hat.shape[0]
    return vals.real


def estimate_solution(f0: ScalarField, b: ShearProfile, nu: float, t: float,
                      n_paths: int, master_seed: int = 0,
                      antithetic: bool = True,
                      phase_steps: int | None = None) -> MCEstimate:
    """Monte Carlo mean of f0 composed with the stochastic flow at time t.

    Antithetic pairing runs each path together with its sign-flipped
    mirror (W, B) -> (-W, -B); sample variance is computed over the pair
    means, so n_paths must then be even.
    """
    if n_paths < 1:
        raise ValueError("n_paths must be >= 1")
    if antithetic and n_paths % 2 != 0:
        raise ValueError("antithetic sampling requires an even path count")
    grid = f0.grid
    n_x, n_y = grid.n_x, grid.n_y
    hat = np.fft.fft2(f0.values) / (n_x * n_y)
    k = np.fft.fftfreq(n_x, d=1.0 / n_x)
    l = np.fft.fftfreq(n_y, d=1.0 / n_y)
    y_nodes = grid.y
    root = np.sqrt(2.0 * nu)
    M = phase_steps if phase_steps is not None else default_phase_steps(t)

    n_samples = n_paths // 2 if antithetic else n_paths
    mean_acc = _KahanAccumulator((n_x, n_y))
    sq_acc = _KahanAccumulator((n_x, n_y))

    for i in range(n_samples):
        rng = derive_rng(master_seed, i)
        path = sample_path(seed=master_seed, t_horizon=t, M=M, nu=nu, rng=rng)
        sample = _path_sample(b, path, nu, t, hat, k, l, y_nodes, root)
        if antithetic:
            mirror = BrownianPath(times=path.times, W=-path.W, B=-path.B,
                                  seed=path.seed, nu=path.nu)
            sample = 0.5 * (sample + _path_sample(b, mirror, nu, t, hat, k, l,
                                                  y_nodes, root))
        mean_acc.add(sample)
        sq_acc.add(sample * sample)

    mean = mean_acc.total / n_samples
    if n_samples > 1:
        var = (sq_acc.total / n_samples - mean * mean) * (
            n_samples / (n_samples - 1.0))
        se = np.sqrt(np.maximum(var, 0.0) / n_samples)
    else:
        se = np.zeros_like(mean)
    return MCEstimate(field=ScalarField(grid, mean), standard_error=se,
                      n_paths=n_paths, t=t, nu=nu, master_seed=master_seed)


def _path_sample(b, path, nu, t, hat, k, l, y_nodes, root):
    acc = PhaseAccumulator(b, path, nu)
    Ic, Is = acc._integrals_at(t)
    a, s = b.harmonics(0)
    phi_cos = a * Ic + s * Is
    phi_sin = s * Ic - a * Is
    kk = np.arange(len(phi_cos), dtype=float)
    ky = np.multiply.outer(kk, y_nodes)
    phi_vals = phi_cos @ np.cos(ky) + phi_sin @ np.sin(ky)
    w_t, b_t = _endpoint(path, t)
    return _composed_values(hat, k, l, phi_vals, root * w_t, root * b_t)


def measure_preservation_check(b: ShearProfile, nu: float, t: float,
                               n_points: int = 1 << 16, bins: int = 256,
                               seed: int = 0) -> dict:
    """Chi-squared uniformity test of the image of uniform points under Phi_t.

    The flow map is measure preserving, so pushing forward uniform samples
    must leave both marginals uniform.  Returns the joint-bin statistic on
    a bins-cell partition of each coordinate and the 0.999 quantile it is
    compared against.
    """
    rng = derive_rng(seed, 0)
    pts = rng.uniform(0.0, TWO_PI, size=(n_points, 2))
    path = sample_path(seed=seed, t_horizon=t, M=default_phase_steps(t),
                       nu=nu, rng=derive_rng(seed, 1))
    img = sample_flow_map(b, path, nu, t, pts)
    out = {}
    expected = n_points / bins
    for axis, name in ((0, "x"), (1, "y")):
        counts, _ = np.histogram(img[:, axis], bins=bins, range=(0.0, TWO_PI))
        stat = float(np.sum((counts - expected) ** 2 / expected))
        out[f"chi2_{name}"] = stat
    out["dof"] = bins - 1
    out["threshold"] = float(stats.chi2.ppf(0.999, bins - 1))
    out["ok"] = bool(out["chi2_x"] <= out["threshold"]
                     and out["chi2_y"] <= out["threshold"])
    return out
