"""Image curves of vertical segments under the stochastic flow map.

On an interval I where |S_t| stays above a threshold, the image of the
vertical segment {x0} x I is a monotone curve

    y |-> (X(y), Y(y)),  X(y) = x0 + sqrt(2 nu) B_t - phi_t(y),
                         Y(y) = y + sqrt(2 nu) W_t,

which crosses the torus horizontally |X(I)| / 2*pi times.  Cutting X(I) at
integer multiples of 2*pi decomposes the curve into full-width monotone
graphs h_j over T plus at most two partial remainder pieces.  The graph
slope is h_j'(x) = -1 / S_t(h_j(x) - sqrt(2 nu) W_t), and the stretching
factor J_t = (1 + S_t^2)^{-1/2} makes the arclength change of variables
exact: J_t * sqrt(1 + h_j'^2) = 1 / |S_t|.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .brownian import BrownianPath
from .grid import ScalarField, TWO_PI, spectral_interpolate
from .phase import LemmaViolationError, PhaseField

_GL_NODES = 192
_NEWTON_MAX_ITER = 60


def _gl_rule(a: float, b: float, n: int = _GL_NODES):
    xi, w = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (xi + 1.0), half * w


@dataclass
class GraphPiece:
    """One full horizontal crossing, stored as a graph over x in [0, 2*pi)."""

    window: int                 # unwrapped window [2*pi*n, 2*pi*(n+1)]
    x_nodes: np.ndarray         # Gauss-Legendre nodes within the window offset
    weights: np.ndarray
    h: np.ndarray               # graph values (Y coordinate, unwrapped)
    h_prime: np.ndarray         # exact slope -1/S at the preimage
    y_param: np.ndarray         # preimage parameter values in I

    def max_slope(self) -> float:
        return float(np.max(np.abs(self.h_prime)))


@dataclass
class JacobianField:
    """Stretching factor J_t = (1 + S_t^2)^{-1/2} along the parameter grid."""

    y_param: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if np.any(self.values <= 0.0) or np.any(self.values > 1.0 + 1e-12):
            raise ValueError("Jacobian factor must lie in (0, 1]")


@dataclass
class ImageCurve:
    """Graph decomposition of the image of a vertical segment under the flow."""

    interval: tuple             # source interval I = (a, b), unwrapped
    x0: float
    t: float
    nu: float
    path_seed: int
    shift_x: float              # sqrt(2 nu) B_t
    shift_y: float              # sqrt(2 nu) W_t
    graphs: list
    wraps: int                  # M = number of full crossings
    remainder_y: list           # parameter subintervals of the partial pieces
    remainder_arclength: float
    field: PhaseField
    min_abs_S: float

    def max_slope(self) -> float:
        if not self.graphs:
            return 0.0
        return max(g.max_slope() for g in self.graphs)

    def jacobian(self, y_param) -> JacobianField:
        y = np.asarray(y_param, dtype=float)
        vals = 1.0 / np.sqrt(1.0 + self.field.S_at(y) ** 2)
        return JacobianField(y_param=y, values=vals)

    def x_of(self, y):
        return self.x0 + self.shift_x - self.field.phi_at(y)


def _endpoint(path: BrownianPath, t: float):
    if t > path.horizon + 1e-12:
        raise ValueError(f"t={t} beyond path horizon {path.horizon}")
    return (float(np.interp(t, path.times, path.W)),
            float(np.interp(t, path.times, path.B)))


def _invert_monotone(field: PhaseField, x_targets: np.ndarray,
                     x_probe: np.ndarray, y_probe: np.ndarray,
                     x_of, a: float, b: float) -> np.ndarray:
    """Solve X(y) = x for each target on a strictly monotone branch."""
    if x_probe[0] > x_probe[-1]:
        x_sorted, y_sorted = x_probe[::-1], y_probe[::-1]
    else:
        x_sorted, y_sorted = x_probe, y_probe
    y = np.interp(x_targets, x_sorted, y_sorted)
    tol = 1e-12 * max(1.0, float(np.max(np.abs(x_targets))))
    for _ in range(_NEWTON_MAX_ITER):
        r = x_of(y) - x_targets
        if np.max(np.abs(r)) < tol:
            break
        y = np.clip(y + r / field.S_at(y), a, b)
    else:
        raise RuntimeError("monotone inversion did not converge")
    return y


def build_image_curve(field: PhaseField, path: BrownianPath, nu: float,
                      x0: float, interval, n_probe: int = 2048) -> ImageCurve:
    """Decompose the image of {x0} x I into monotone graphs plus remainder.

    Precondition: S_t keeps a fixed sign on I (a complement interval of the
    sublevel set); a sign change raises LemmaViolationError since it breaks
    the monotonicity the graph decomposition rests on.
    """
    a, b = float(interval[0]), float(interval[1])
    if not b > a:
        raise ValueError(f"empty interval {interval}")
    w_t, b_t = _endpoint(path, field.t)
    root = np.sqrt(2.0 * nu)
    shift_y, shift_x = root * w_t, root * b_t

    y_probe = np.linspace(a, b, n_probe)
    s_probe = field.S_at(y_probe)
    if np.min(s_probe) < 0.0 < np.max(s_probe):
        raise LemmaViolationError(
            f"S_t changes sign on {interval}; interval is not a valid "
            f"sublevel-complement piece")
    min_abs_s = float(np.min(np.abs(s_probe)))
    if min_abs_s == 0.0:
        raise LemmaViolationError(f"S_t vanishes on {interval}")

    def x_of(y):
        return x0 + shift_x - field.phi_at(y)

    x_probe = x_of(y_probe)
    x_lo, x_hi = float(min(x_probe[0], x_probe[-1])), float(
        max(x_probe[0], x_probe[-1]))
    n_first = int(np.ceil(x_lo / TWO_PI))
    n_last = int(np.floor(x_hi / TWO_PI))
    # guard endpoints landing exactly on a cut
    if n_first * TWO_PI < x_lo:
        n_first += 1
    if n_last * TWO_PI > x_hi:
        n_last -= 1
    wraps = max(0, n_last - n_first)

    graphs = []
    xi, wq = _gl_rule(0.0, TWO_PI)
    for n in range(n_first, n_last):
        x_targets = n * TWO_PI + xi
        y_star = _invert_monotone(field, x_targets, x_probe, y_probe,
                                  x_of, a, b)
        s_star = field.S_at(y_star)
        graphs.append(GraphPiece(window=n, x_nodes=xi.copy(),
                                 weights=wq.copy(), h=y_star + shift_y,
                                 h_prime=-1.0 / s_star, y_param=y_star))

    # partial pieces at both ends, kept as parameter subintervals
    if n_last >= n_first:
        cut_xs = np.array([n_first * TWO_PI, n_last * TWO_PI])
        y_cuts = _invert_monotone(field, cut_xs, x_probe, y_probe, x_of, a, b)
        y_cuts = np.sort(y_cuts)
        remainder_y = []
        if y_cuts[0] > a:
            remainder_y.append((a, float(y_cuts[0])))
        if y_cuts[1] < b:
            remainder_y.append((float(y_cuts[1]), b))
    else:
        remainder_y = [(a, b)]

    rem_len = 0.0
    for (ra, rb) in remainder_y:
        yq, wq2 = _gl_rule(ra, rb)
        rem_len += float(np.sum(wq2 * np.sqrt(1.0 + field.S_at(yq) ** 2)))

    return ImageCurve(interval=(a, b), x0=x0, t=field.t, nu=nu,
                      path_seed=field.path_seed, shift_x=shift_x,
                      shift_y=shift_y, graphs=graphs, wraps=wraps,
                      remainder_y=remainder_y, remainder_arclength=rem_len,
                      field=field, min_abs_S=min_abs_s)


def line_integral_mean_zero(curve: ImageCurve, f0: ScalarField) -> list:
    """Arclength integral of f0 over each full graph of the curve.

    For data with zero x-average every nearly horizontal graph integral is
    small: the integral of f0 along an exactly horizontal line vanishes.
    """
    out = []
    for g in curve.graphs:
        vals = spectral_interpolate(f0, np.mod(g.x_nodes, TWO_PI),
                                    np.mod(g.h, TWO_PI))
        out.append(float(np.sum(g.weights * vals
                                * np.sqrt(1.0 + g.h_prime ** 2))))
    return out


def change_of_variables_check(curve: ImageCurve, f0: ScalarField,
                              g) -> dict:
    """Both sides of the fiber change of variables; gap should be round-off.

    lhs = int_I f0(Phi_t(x0, y)) g(y) dy by direct quadrature;
    rhs = sum over graphs of the arclength integral of
          f0 * (g o Phi^{-1}) * J_t plus the same over the remainder pieces.
    """
    a, b = curve.interval
    fld = curve.field

    def lhs_integrand(y):
        x = np.mod(curve.x_of(y), TWO_PI)
        yy = np.mod(y + curve.shift_y, TWO_PI)
        return spectral_interpolate(f0, x, yy) * g(y)

    lhs = 0.0
    for (pa, pb) in _panels(a, b, 8):
        yq, wq = _gl_rule(pa, pb)
        lhs += float(np.sum(wq * lhs_integrand(yq)))

    rhs = 0.0
    for gp in curve.graphs:
        vals = spectral_interpolate(f0, np.mod(gp.x_nodes, TWO_PI),
                                    np.mod(gp.h, TWO_PI))
        jac = 1.0 / np.sqrt(1.0 + fld.S_at(gp.y_param) ** 2)
        rhs += float(np.sum(gp.weights * vals * g(gp.y_param)
                            * jac * np.sqrt(1.0 + gp.h_prime ** 2)))
    for (ra, rb) in curve.remainder_y:
        yq, wq = _gl_rule(ra, rb)
        x = np.mod(curve.x_of(yq), TWO_PI)
        yy = np.mod(yq + curve.shift_y, TWO_PI)
        jac = 1.0 / np.sqrt(1.0 + fld.S_at(yq) ** 2)
        arc = np.sqrt(1.0 + fld.S_at(yq) ** 2)
        rhs += float(np.sum(wq * spectral_interpolate(f0, x, yy) * g(yq)
                            * jac * arc))

    return {"lhs": lhs, "rhs": rhs, "gap": abs(lhs - rhs)}


def _panels(a: float, b: float, n: int):
    edges = np.linspace(a, b, n + 1)
    return list(zip(edges[:-1], edges[1:]))
