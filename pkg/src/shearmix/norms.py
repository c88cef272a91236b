"""Norms measuring mixing: H^-1, l2_k(W^{1,1}_y), dual surrogates, and l(t).

All norms use the normalized measure (dx dy / (2 pi)^2 on T^2, dy / 2 pi
on T) and the coefficient convention f_k = (2 pi)^{-1} int e^{-ikx} f dx.

The W^{-1,infty} and W^{-1,1} dual norms are computed through an
equivalent primitive-based surrogate: |y-mean| plus the optimally
centered periodic primitive of the fluctuation (sup-centering for the
L^infty flavor, median-centering for the L^1 flavor).  The pairing
estimate  int h g = -int H g' <= ||H||_inf ||g'||_1  makes the surrogate
an upper bound for the dual pairing against W^{1,1} test functions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import ScalarField, TWO_PI

NORM_IDS = (
    "Hminus1", "L2", "L2kW11", "L2kWm1inf", "LinfW1inf", "LinfWm11",
    "LengthScale",
)


@dataclass
class NormSeries:
    norm_id: str
    nu: float
    profile_id: str
    f0_id: str
    times: list
    values: list

    def __post_init__(self):
        if self.norm_id not in NORM_IDS:
            raise ValueError(f"unknown norm id {self.norm_id!r}")
        t = np.asarray(self.times, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if np.any(np.diff(t) <= 0):
            raise ValueError("times must be strictly increasing")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValueError("norm values must be finite and nonnegative")

    def append(self, t, value):
        if self.times and t <= self.times[-1]:
            raise ValueError("times must be strictly increasing")
        self.times.append(float(t))
        self.values.append(float(value))


def _coeffs2d(field: ScalarField) -> np.ndarray:
    return np.fft.fft2(field.values) / (field.grid.n_x * field.grid.n_y)


def l2(field: ScalarField) -> float:
    """L^2 with normalized measure: sqrt(mean of f^2)."""
    return float(np.sqrt(np.mean(field.values**2)))


def h_minus1(field: ScalarField) -> float:
    """(sum_{(k,l) != 0} |f_kl|^2 / (k^2 + l^2))^(1/2); requires zero mean."""
    c = _coeffs2d(field)
    scale = np.max(np.abs(field.values))
    if scale > 0 and abs(c[0, 0]) > 1e-8 * scale:
        raise ValueError(f"field has nonzero total mean {c[0, 0]:.3g}")
    kx = np.fft.fftfreq(field.grid.n_x, d=1.0 / field.grid.n_x)
    ky = np.fft.fftfreq(field.grid.n_y, d=1.0 / field.grid.n_y)
    k2 = kx[:, None] ** 2 + ky[None, :] ** 2
    k2[0, 0] = np.inf
    return float(np.sqrt(np.sum(np.abs(c) ** 2 / k2)))


def _mode_profiles(field: ScalarField) -> np.ndarray:
    """f_k(y), complex, shape (n_x, n_y); row k in fft order."""
    return np.fft.fft(field.values, axis=0) / field.grid.n_x


def _dy(profiles: np.ndarray) -> np.ndarray:
    n_y = profiles.shape[-1]
    ly = np.fft.fftfreq(n_y, d=1.0 / n_y)
    mult = 1j * ly
    mult[n_y // 2] = 0.0
    return np.fft.ifft(np.fft.fft(profiles, axis=-1) * mult, axis=-1)


def l2k_w11(field: ScalarField) -> float:
    """l^2 over k of ||f_k||_{L1} + ||d_y f_k||_{L1} (normalized measure)."""
    fk = _mode_profiles(field)
    dfk = _dy(fk)
    w11 = np.mean(np.abs(fk), axis=1) + np.mean(np.abs(dfk), axis=1)
    return float(np.sqrt(np.sum(w11**2)))


def _primitive_k(profile: np.ndarray) -> np.ndarray:
    """Periodic primitive of the fluctuation of a (complex) 1D profile."""
    n = profile.shape[-1]
    hk = np.fft.fft(profile)
    ly = np.fft.fftfreq(n, d=1.0 / n)
    with np.errstate(divide="ignore", invalid="ignore"):
        Hk = np.where(ly == 0, 0.0, hk / (1j * np.where(ly == 0, 1.0, ly)))
    return np.fft.ifft(Hk)


def _sup_centered_sup(H: np.ndarray) -> float:
    """min over centers of ||H - z||_inf, real/imag parts centered separately."""
    cr = 0.5 * (H.real.max() + H.real.min())
    ci = 0.5 * (H.imag.max() + H.imag.min())
    return float(np.max(np.abs(H - (cr + 1j * ci))))


def l2k_wm1inf_surrogate(field: ScalarField) -> float:
    """l^2 over k != 0 of |y-mean of f_k| + sup-centered primitive sup."""
    fk = _mode_profiles(field)
    n_x = field.grid.n_x
    vals = []
    for row in range(n_x):
        k = row if row <= n_x // 2 else row - n_x
        if k == 0:
            continue
        prof = fk[row]
        mean = np.mean(prof)
        H = _primitive_k(prof - mean)
        vals.append(abs(mean) + _sup_centered_sup(H))
    return float(np.sqrt(np.sum(np.asarray(vals) ** 2)))


def linf_wm11_surrogate(field: ScalarField) -> float:
    """max over x-columns of |y-mean| + L1 norm of the median-centered primitive."""
    vals = field.values
    means = vals.mean(axis=1, keepdims=True)
    fluct = vals - means
    H = _primitive_k(fluct).real          # row-wise primitive along y
    H -= np.median(H, axis=1, keepdims=True)
    col_norm = np.abs(means[:, 0]) + np.mean(np.abs(H), axis=1)
    return float(np.max(col_norm))


def linf_w1inf(field: ScalarField) -> float:
    """max over x of sup_y |f| + sup_y |d_y f| (spectral derivative)."""
    vals = field.values
    dvals = _dy(vals.astype(complex)).real
    return float(np.max(np.max(np.abs(vals), axis=1) + np.max(np.abs(dvals), axis=1)))


def length_scale(field: ScalarField) -> float:
    """l(t) = ||f||_{L2} / ||grad f||_{L2}, gradients spectral."""
    c = _coeffs2d(field)
    kx = np.fft.fftfreq(field.grid.n_x, d=1.0 / field.grid.n_x)
    ky = np.fft.fftfreq(field.grid.n_y, d=1.0 / field.grid.n_y)
    k2 = kx[:, None] ** 2 + ky[None, :] ** 2
    e = np.sum(np.abs(c) ** 2)
    ge = np.sum(k2 * np.abs(c) ** 2)
    if ge == 0:
        raise ValueError("zero gradient: length scale undefined for constants")
    return float(np.sqrt(e / ge))


EVALUATORS = {
    "Hminus1": h_minus1,
    "L2": l2,
    "L2kW11": l2k_w11,
    "L2kWm1inf": l2k_wm1inf_surrogate,
    "LinfW1inf": linf_w1inf,
    "LinfWm11": linf_wm11_surrogate,
    "LengthScale": length_scale,
}


def evaluate_norm(norm_id: str, field: ScalarField) -> float:
    try:
        return EVALUATORS[norm_id](field)
    except KeyError:
        raise ValueError(f"unknown norm id {norm_id!r}") from None


def fit_decay_exponent(series: NormSeries, t_min: float, t_max: float) -> dict:
    """Least-squares slope of log(value) against log(t) on [t_min, t_max]."""
    t = np.asarray(series.times, dtype=float)
    v = np.asarray(series.values, dtype=float)
    sel = (t >= t_min) & (t <= t_max)
    t, v = t[sel], v[sel]
    if len(t) < 5:
        raise ValueError(f"need at least 5 samples in window, got {len(t)}")
    if np.any(v <= 0):
        raise ValueError("nonpositive values cannot be fit in log-log")
    lt, lv = np.log(t), np.log(v)
    slope, intercept = np.polyfit(lt, lv, 1)
    resid = lv - (slope * lt + intercept)
    ss_tot = np.sum((lv - lv.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss_tot if ss_tot > 0 else 1.0
    return {"exponent": float(slope), "constant": float(np.exp(intercept)),
            "r2": float(r2)}


def envelope_constant(series: NormSeries, exponent: float,
                      t_min: float, t_max: float) -> float:
    """max over the window of value * t^(-exponent): the sharp constant in
    value <= C t^exponent, i.e. the quantity a uniform-in-nu bound controls."""
    t = np.asarray(series.times, dtype=float)
    v = np.asarray(series.values, dtype=float)
    sel = (t >= t_min) & (t <= t_max)
    return float(np.max(v[sel] * t[sel] ** (-exponent)))
