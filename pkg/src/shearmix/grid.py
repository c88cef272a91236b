"""Periodic grids on T and T^2, Fourier analysis/synthesis, and quadrature.

Conventions used throughout the package:
  * mode coefficients f_k = (2*pi)^{-1} * integral of e^{-ikx} f dx,
    i.e. numpy fft / n;
  * norms use the normalized measure dy/(2*pi) (see norms module);
  * quadrature() returns the plain (unnormalized) integral over T.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * np.pi


def _check_power_of_two(n: int, name: str):
    if n < 2 or (n & (n - 1)) != 0:
        raise ValueError(f"{name} must be a power of two, got {n}")


@dataclass(frozen=True)
class PeriodicGrid1D:
    n: int

    def __post_init__(self):
        _check_power_of_two(self.n, "n")

    @property
    def nodes(self) -> np.ndarray:
        return np.arange(self.n) * (TWO_PI / self.n)

    @property
    def spacing(self) -> float:
        return TWO_PI / self.n

    @property
    def wavenumbers(self) -> np.ndarray:
        return np.fft.fftfreq(self.n, d=1.0 / self.n).astype(int)


@dataclass(frozen=True)
class PeriodicGrid2D:
    n_x: int
    n_y: int

    def __post_init__(self):
        _check_power_of_two(self.n_x, "n_x")
        _check_power_of_two(self.n_y, "n_y")

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.n_x) * (TWO_PI / self.n_x)

    @property
    def y(self) -> np.ndarray:
        return np.arange(self.n_y) * (TWO_PI / self.n_y)

    def meshgrid(self):
        return np.meshgrid(self.x, self.y, indexing="ij")

    @property
    def ygrid(self) -> PeriodicGrid1D:
        return PeriodicGrid1D(self.n_y)


@dataclass
class ScalarField:
    """Real field f(x, y) sampled on a periodic grid; values shape (n_x, n_y)."""

    grid: PeriodicGrid2D
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.grid.n_x, self.grid.n_y):
            raise ValueError(
                f"values shape {self.values.shape} does not match grid "
                f"({self.grid.n_x}, {self.grid.n_y})"
            )
        if not np.all(np.isfinite(self.values)):
            raise ValueError("non-finite values in scalar field")

    @staticmethod
    def from_function(func, grid: PeriodicGrid2D) -> "ScalarField":
        xx, yy = grid.meshgrid()
        return ScalarField(grid, func(xx, yy))

    def x_mean_residual(self) -> float:
        """Max over y of |row mean in x| (mean-zero condition check)."""
        return float(np.max(np.abs(self.values.mean(axis=0))))


@dataclass
class ModeField:
    """Per-x-wavenumber complex profiles f_k(y); coefficients convention fft/n."""

    wavenumbers: np.ndarray        # integer k in fft order
    profiles: np.ndarray           # complex, shape (n_k, n_y)
    grid: PeriodicGrid1D

    def conjugate_symmetry_defect(self) -> float:
        k = self.wavenumbers
        idx = {int(kk): i for i, kk in enumerate(k)}
        worst = 0.0
        for kk, i in idx.items():
            j = idx.get(-kk)
            if j is not None:
                worst = max(
                    worst,
                    float(np.max(np.abs(self.profiles[i] - np.conj(self.profiles[j])))),
                )
        return worst


def analyze(field: ScalarField) -> ModeField:
    """Discrete x-Fourier analysis; exact on band-limited inputs."""
    vals = field.values
    if not np.all(np.isfinite(vals)):
        raise ValueError("non-finite values")
    coeffs = np.fft.fft(vals, axis=0) / field.grid.n_x
    k = np.fft.fftfreq(field.grid.n_x, d=1.0 / field.grid.n_x).astype(int)
    return ModeField(k, coeffs, field.grid.ygrid)


def synthesize(modes: ModeField, n_x: int | None = None) -> ScalarField:
    """Inverse of analyze (real part; imaginary residue is round-off)."""
    n_x = n_x if n_x is not None else len(modes.wavenumbers)
    vals = np.fft.ifft(modes.profiles * n_x, axis=0)
    grid = PeriodicGrid2D(n_x, modes.grid.n)
    return ScalarField(grid, vals.real)


def spectral_derivative(h: np.ndarray, order: int = 1) -> np.ndarray:
    """d^order/dy^order of a periodic sample array along its last axis."""
    h = np.asarray(h)
    n = h.shape[-1]
    k = np.fft.fftfreq(n, d=1.0 / n)
    mult = (1j * k) ** order
    if order % 2 == 1:
        # zero the unpaired Nyquist mode for odd derivatives
        mult[n // 2] = 0.0
    out = np.fft.ifft(np.fft.fft(h, axis=-1) * mult, axis=-1)
    return out.real if np.isrealobj(h) else out


def periodic_primitive(h: np.ndarray, centering: str = "MinMaxCenter") -> np.ndarray:
    """Spectral antiderivative H with H' = h, for mean-zero periodic h.

    centering: 'MinMaxCenter' (sup-optimal, (min+max)/2 subtracted),
    'MeanZero' (zero average), or 'Median' (L1-optimal).
    """
    h = np.asarray(h, dtype=float)
    n = h.shape[-1]
    scale = np.max(np.abs(h)) if h.size else 0.0
    mean = abs(float(np.mean(h)))
    if scale > 0 and mean > 1e-8 * scale:
        raise ValueError(f"periodic_primitive requires mean-zero input, mean={mean:g}")
    hk = np.fft.fft(h)
    k = np.fft.fftfreq(n, d=1.0 / n)
    with np.errstate(divide="ignore", invalid="ignore"):
        Hk = np.where(k == 0, 0.0, hk / (1j * np.where(k == 0, 1.0, k)))
    H = np.fft.ifft(Hk).real
    if centering == "MinMaxCenter":
        H -= 0.5 * (H.max() + H.min())
    elif centering == "MeanZero":
        pass  # k=0 coefficient already zero
    elif centering == "Median":
        H -= np.median(H)
    else:
        raise ValueError(f"unknown centering {centering!r}")
    return H


def quadrature(h: np.ndarray) -> float:
    """Integral over T by the rectangle rule (spectrally accurate)."""
    h = np.asarray(h)
    if not np.all(np.isfinite(h)):
        raise ValueError("non-finite values")
    return float(np.sum(h.real) * (TWO_PI / h.shape[-1]))


def spectral_interpolate(field: ScalarField, x, y, tol: float = 1e-12) -> np.ndarray:
    """Evaluate a band-limited field at scattered points by direct mode sums.

    Only modes with |coefficient| above tol * max are kept, so the cost is
    (number of significant modes) x (number of points); intended for the
    sparse initial data used in the flow-map experiments.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    hat = np.fft.fft2(field.values) / (field.grid.n_x * field.grid.n_y)
    kx = np.fft.fftfreq(field.grid.n_x, d=1.0 / field.grid.n_x)
    ky = np.fft.fftfreq(field.grid.n_y, d=1.0 / field.grid.n_y)
    keep = np.abs(hat) > tol * max(np.abs(hat).max(), 1e-300)
    ki, li = np.nonzero(keep)
    out = np.zeros(np.broadcast(x, y).shape, dtype=complex)
    for a, b in zip(ki, li):
        out += hat[a, b] * np.exp(1j * (kx[a] * x + ky[b] * y))
    return out.real if out.ndim else float(out.real)
