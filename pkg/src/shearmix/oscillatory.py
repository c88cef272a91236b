"""Oscillatory integrals against the random phase and the decay estimate.

The central object is I(t) = int_T e^{-ik phi_t(y)} F(y) g(y) dy, which for
nu = 0 reduces to the classical integral with phase k t b(y).  The decay
statement tested here: on good-event paths |I(t)| <= C t^{-1/(N+1)}
||F||_{W^{1,1}} ||g||_{W^{1,1}} with one constant across t, k, and nu.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .brownian import GoodEventParams, classify_good_event, derive_rng, \
    default_phase_steps, sample_path
from .grid import TWO_PI
from .phase import PhaseAccumulator, PhaseField
from .shear import ShearProfile

_CAUCHY_TOL = 1e-8
_MAX_NODES = 1 << 22
_NORM_GRID = 1 << 14


class ResolutionError(RuntimeError):
    """Quadrature refinement hit the node cap before converging."""


@dataclass(frozen=True)
class TestFunction:
    """A 2*pi-periodic test function with an exact derivative and W^{1,1} size.

    The norm uses the normalized measure dy/(2*pi):
    ||g||_{W^{1,1}} = mean |g| + mean |g'|.
    """

    __test__ = False  # keep pytest from collecting this as a test class

    name: str
    fn: Callable[[np.ndarray], np.ndarray]
    dfn: Callable[[np.ndarray], np.ndarray]
    w11: float = field(default=None)

    def __post_init__(self):
        if self.w11 is None:
            y = np.arange(_NORM_GRID) * (TWO_PI / _NORM_GRID)
            val = float(np.mean(np.abs(self.fn(y)))
                        + np.mean(np.abs(self.dfn(y))))
            object.__setattr__(self, "w11", val)

    def __call__(self, y):
        return self.fn(y)

    def scaled(self, lam: float) -> "TestFunction":
        return TestFunction(
            name=f"{lam}*{self.name}",
            fn=lambda y: lam * self.fn(y),
            dfn=lambda y: lam * self.dfn(y),
            w11=abs(lam) * self.w11,
        )


def _sawtooth_pair():
    # Fourier sawtooth with a Gaussian mollifier on the coefficients: keeps
    # the profile in W^{1,1} with an exact term-wise derivative.
    ks = np.arange(1, 33, dtype=float)
    amp = np.exp(-0.005 * ks ** 2) / ks

    def fn(y):
        return np.tensordot(amp, np.sin(np.multiply.outer(ks, y)), axes=(0, 0))

    def dfn(y):
        return np.tensordot(amp * ks, np.cos(np.multiply.outer(ks, y)),
                            axes=(0, 0))

    return fn, dfn


def _bump_pair(center: float = np.pi, width: float = 1.5):
    def u_of(y):
        return (np.mod(y - center + np.pi, TWO_PI) - np.pi) / width

    def fn(y):
        u = u_of(y)
        out = np.zeros_like(u)
        inside = np.abs(u) < 1.0
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - u[inside] ** 2))
        return out

    def dfn(y):
        u = u_of(y)
        out = np.zeros_like(u)
        inside = np.abs(u) < 1.0
        ui = u[inside]
        out[inside] = np.exp(1.0 - 1.0 / (1.0 - ui ** 2)) * (
            -2.0 * ui / (1.0 - ui ** 2) ** 2) / width
        return out

    return fn, dfn


_saw_fn, _saw_dfn = _sawtooth_pair()
_bump_fn, _bump_dfn = _bump_pair()

TEST_FUNCTIONS = {
    "one": TestFunction("one", lambda y: np.ones_like(np.asarray(y, float)),
                        lambda y: np.zeros_like(np.asarray(y, float)),
                        w11=1.0),
    "sin_y": TestFunction("sin_y", np.sin, np.cos, w11=4.0 / np.pi),
    "sawtooth": TestFunction("sawtooth", _saw_fn, _saw_dfn),
    "bump": TestFunction("bump", _bump_fn, _bump_dfn),
}


def _refine(integrand: Callable[[np.ndarray], np.ndarray], n0: int) -> complex:
    """Periodic rectangle-rule quadrature, doubling until Cauchy-stable."""
    n = max(256, 1 << int(np.ceil(np.log2(max(n0, 2)))))
    prev = None
    while n <= _MAX_NODES:
        y = np.arange(n) * (TWO_PI / n)
        val = complex(np.sum(integrand(y)) * (TWO_PI / n))
        if prev is not None and abs(val - prev) < _CAUCHY_TOL:
            return val
        prev = val
        n *= 2
    raise ResolutionError(
        f"quadrature did not stabilize below {_CAUCHY_TOL} within "
        f"{_MAX_NODES} nodes")


def deterministic_integral(b: ShearProfile, k: int, t: float,
                           g: Callable, h: Callable) -> complex:
    """int_T e^{-i k b(y) t} g(y) h(y) dy, refined until stable."""
    if k == 0:
        raise ValueError("k must be a nonzero integer (mean-zero data)")
    n0 = int(8.0 * abs(k) * b.sup_norm() * max(abs(t), 1.0) / TWO_PI)

    def integrand(y):
        return np.exp(-1j * k * t * b.evaluate(y)) * g(y) * h(y)

    return _refine(integrand, n0)


def stochastic_integral(fieldv: PhaseField, k: int, F: Callable,
                        g: Callable) -> complex:
    """int_T e^{-i k phi_t(y)} F(y) g(y) dy along one realized phase."""
    if k == 0:
        raise ValueError("k must be a nonzero integer (mean-zero data)")
    sup_s = float(np.max(np.abs(fieldv.S))) * 1.05 + 1.0
    n0 = int(8.0 * abs(k) * sup_s)

    def integrand(y):
        return np.exp(-1j * k * fieldv.phi_at(y)) * F(y) * g(y)

    return _refine(integrand, n0)


@dataclass
class IbpReport:
    """Sweep of the oscillatory decay ratio over paths and times."""

    rows: list                 # dicts: seed, nu, k, t, abs_integral, ratio, good
    max_ratio: float           # over good-event rows only
    n_paths: int
    n_good: int
    N: int


def verify_lemma_ibp(b: ShearProfile, nu: float, k: int, F: TestFunction,
                     g: TestFunction, n_paths: int, t_list,
                     params: GoodEventParams, master_seed: int = 0,
                     grid_n: int = 1024) -> IbpReport:
    """Ratio |I(t)| t^{1/(N+1)} / (||F|| ||g||) across good-event paths.

    For nu = 0 the sweep collapses to a single deterministic realization.
    """
    from .grid import PeriodicGrid1D

    t_list = sorted(float(t) for t in t_list)
    horizon = t_list[-1]
    alpha = 1.0 / (params.N + 1)
    denom = F.w11 * g.w11
    if denom <= 0:
        raise ValueError("test functions must have positive W^{1,1} norms")
    grid = PeriodicGrid1D(grid_n)
    if nu == 0.0:
        n_paths = 1
    rows = []
    max_ratio = 0.0
    n_good = 0
    for i in range(n_paths):
        path = sample_path(seed=master_seed, t_horizon=horizon,
                           M=default_phase_steps(horizon), nu=nu,
                           rng=derive_rng(master_seed, i))
        good = classify_good_event(path, params, nu)
        if good:
            n_good += 1
        acc = PhaseAccumulator(b, path, nu)
        for t in t_list:
            fld = acc.field_at(t, grid)
            val = abs(stochastic_integral(fld, k, F, g))
            ratio = val * t ** alpha / denom
            rows.append({"seed": i, "nu": nu, "k": k, "t": t,
                         "abs_integral": val, "ratio": ratio, "good": good})
            if good:
                max_ratio = max(max_ratio, ratio)
    return IbpReport(rows=rows, max_ratio=max_ratio, n_paths=n_paths,
                     n_good=n_good, N=params.N)
