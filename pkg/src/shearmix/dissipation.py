"""Enhanced-dissipation timescale of the viscous shear evolution.

With a shear whose steepest critical point has order N, the L^2 norm of a
mean-zero-in-x datum decays on the timescale nu^{-(N+1)/(N+3)}, much faster
than the plain heat timescale nu^{-1}.  Only the exponent is checked here;
the prefactor in the decay estimate is not explicit.
"""

from __future__ import annotations

import numpy as np

from .grid import ScalarField
from .shear import ShearProfile
from .solver import _ModeEvolver, default_dt


class HorizonExhausted(RuntimeError):
    """The norm never crossed the threshold within the search horizon."""


def half_life(b: ShearProfile, nu: float, f0: ScalarField,
              threshold: float = np.e ** -1, dt: float | None = None,
              horizon: float | None = None) -> float:
    """First time ||f(t)||_{L^2} drops below threshold * ||f0||_{L^2}.

    The stepper walks forward monitoring the norm each step and the
    crossing is located by log-linear interpolation inside the last step
    (the decay is exponential to leading order).
    """
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must be in (0,1), got {threshold}")
    if nu <= 0.0:
        raise ValueError("half_life requires nu > 0")
    if f0.x_mean_residual() > 1e-8:
        raise ValueError("initial datum must be mean-zero in x")
    n_x, n_y = f0.grid.n_x, f0.grid.n_y
    coeffs = np.fft.fft(f0.values, axis=0) / n_x
    k_all = np.fft.fftfreq(n_x, d=1.0 / n_x).astype(int)
    row_amp = np.max(np.abs(coeffs), axis=1)
    active = row_amp > 1e-14 * max(row_amp.max(), 1e-300)
    active &= k_all != 0
    ev = _ModeEvolver(k_all[active], coeffs[active], b, nu, n_y)

    dt = dt or default_dt(int(np.max(np.abs(k_all[active]))), b.sup_norm())
    # heat decay alone crosses at |log threshold| / nu; generous cap above it
    horizon = horizon or 10.0 * abs(np.log(threshold)) / nu

    def norm_now():
        return float(np.sqrt(np.sum(np.abs(ev.state) ** 2) / n_y))

    target = threshold * norm_now()
    prev_t, prev_n = 0.0, norm_now()
    while ev.t < horizon:
        ev.advance(ev.t + dt, dt)
        n = norm_now()
        if n <= target:
            # log-linear interpolation between the bracketing steps
            if prev_n <= 0 or n <= 0:
                return ev.t
            frac = (np.log(prev_n) - np.log(target)) / (
                np.log(prev_n) - np.log(n))
            return prev_t + frac * (ev.t - prev_t)
        prev_t, prev_n = ev.t, n
    raise HorizonExhausted(
        f"norm still {prev_n / (target / threshold):.3g} of initial at "
        f"t={horizon:.4g}")


def half_life_sweep(b: ShearProfile, nus, f0: ScalarField,
                    threshold: float = np.e ** -1) -> dict:
    """Half-lives over a nu sweep plus the log-log slope of t_half vs nu."""
    nus = sorted(float(v) for v in nus)
    times = [half_life(b, nu, f0, threshold) for nu in nus]
    if len(nus) >= 2:
        line = np.polynomial.Polynomial.fit(
            np.log(nus), np.log(times), 1).convert()
        intercept, slope = line.coef
    else:
        intercept, slope = np.log(times[0]), np.nan
    return {"nu": nus, "half_life": times, "slope": float(slope),
            "log_constant": float(intercept)}


def crossover_consistency(nu: float, N: int, p: float) -> dict:
    """Margin of exp(-nu^((N+1)/(N+3)) t) <= 1/t on dyadic t in [t_nu, 10 t_nu].

    This is the inequality that lets the enhanced-dissipation regime take
    over from the power-law mixing bound past the crossover time.
    """
    if nu <= 0:
        raise ValueError("nu must be positive")
    rate = nu ** ((N + 1.0) / (N + 3.0))
    t_nu = nu ** -p
    ts = [t_nu]
    while ts[-1] * 2.0 < 10.0 * t_nu:
        ts.append(ts[-1] * 2.0)
    ts.append(10.0 * t_nu)
    # margin in log space: log(1/t) - (-rate * t); positive means the
    # dissipation factor is below the power law
    margins = [(-np.log(t)) - (-rate * t) for t in ts]
    min_margin = float(min(margins))
    return {"t": ts, "min_margin": min_margin,
            "ok": bool(min_margin >= 0.0),
            "boundary": bool(abs(p - (N + 1.0) / (N + 3.0)) < 1e-12)}
