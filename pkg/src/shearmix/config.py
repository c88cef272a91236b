"""Experiment configuration: TOML loading, validation, defaults."""

from __future__ import annotations

import os
from dataclasses import dataclass, field as dc_field

import numpy as np
import tomli

from .brownian import GoodEventParams
from .shear import ShearProfile, analyze_critical_structure

_F0_LIBRARY = {
    "cos_x_sin_y": lambda x, y: np.cos(x) * np.sin(y),
    "cos_x": lambda x, y: np.cos(x) + 0.0 * y,
    "cos_x_cos_y": lambda x, y: np.cos(x) * np.cos(y),
    "cos_2x_sin_y": lambda x, y: np.cos(2 * x) * np.sin(y),
}

DEFAULT_NORM_IDS = ("Hminus1", "L2", "LinfWm11")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    shear: ShearProfile
    N: int
    nu_list: list
    f0_id: str
    norm_ids: tuple = DEFAULT_NORM_IDS
    t_min: float = 1.0
    t_max: float = 1024.0
    n_paths: int = 256
    master_seed: int = 0
    delta: float = 0.3
    p: float = 0.75
    c_mode: str = "calibrate"        # or a positive float as string/number
    out_dir: str = "out"
    n_x: int = 64
    n_y: int = 512
    threads: int = 1
    raw: dict = dc_field(default_factory=dict, repr=False)

    def __post_init__(self):
        if not self.nu_list:
            raise ConfigError("nu list must be non-empty")
        if any(nu < 0 or nu > 1 for nu in self.nu_list):
            raise ConfigError("every nu must lie in [0, 1]")
        for n, name in ((self.n_x, "n_x"), (self.n_y, "n_y")):
            if n < 2 or n & (n - 1):
                raise ConfigError(f"{name} must be a power of two, got {n}")
        if not 0 < self.t_min < self.t_max:
            raise ConfigError("need 0 < t_min < t_max")
        if self.f0_id not in _F0_LIBRARY:
            raise ConfigError(
                f"unknown initial datum {self.f0_id!r}; "
                f"choose from {sorted(_F0_LIBRARY)}")
        structure = analyze_critical_structure(self.shear)
        if structure.max_order != self.N:
            raise ConfigError(
                f"declared N={self.N} but the shear's steepest critical "
                f"point has order {structure.max_order}")
        # delta separation + p interval are enforced by GoodEventParams
        params = GoodEventParams(delta=self.delta, p=self.p, N=self.N)
        params.validate_separation(structure.min_separation())
        self.structure = structure
        self.good_event = params

    @property
    def f0_func(self):
        return _F0_LIBRARY[self.f0_id]

    def sample_times(self):
        """Dyadic schedule in [t_min, t_max], t_max always included."""
        ts = []
        t = self.t_min
        while t < self.t_max:
            ts.append(t)
            t *= 2.0
        ts.append(self.t_max)
        return ts

    def as_dict(self) -> dict:
        return {
            "shear": {"cos": list(self.shear.cos_coeffs),
                      "sin": list(self.shear.sin_coeffs),
                      "label": self.shear.label},
            "N": self.N, "nu_list": list(self.nu_list), "f0": self.f0_id,
            "norm_ids": list(self.norm_ids),
            "t_min": self.t_min, "t_max": self.t_max,
            "n_paths": self.n_paths, "master_seed": self.master_seed,
            "delta": self.delta, "p": self.p, "c_mode": str(self.c_mode),
            "n_x": self.n_x, "n_y": self.n_y,
        }


def _build_shear(tbl: dict) -> ShearProfile:
    family = tbl.get("family", "cos_power")
    if family == "cos_power":
        return ShearProfile.cos_power(int(tbl.get("m", 1)))
    if family == "fourier":
        return ShearProfile.from_fourier(
            [tuple(term) for term in tbl["terms"]])
    raise ConfigError(f"unknown shear family {family!r}")


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    """Parse and validate a TOML experiment configuration."""
    with open(path, "rb") as fh:
        raw = tomli.load(fh)
    overrides = overrides or {}

    def get(section, key, default):
        if key in overrides:
            return overrides[key]
        return raw.get(section, {}).get(key, default)

    try:
        cfg = ExperimentConfig(
            shear=_build_shear(raw.get("shear", {"family": "cos_power", "m": 1})),
            N=int(raw.get("shear", {}).get("N", 1)),
            nu_list=list(overrides.get("nu_list",
                                       raw.get("sweep", {}).get("nu", [0.0]))),
            f0_id=get("sweep", "f0", "cos_x_sin_y"),
            norm_ids=tuple(get("sweep", "norms", list(DEFAULT_NORM_IDS))),
            t_min=float(get("sweep", "t_min", 1.0)),
            t_max=float(get("sweep", "t_max", 1024.0)),
            n_paths=int(get("mc", "n_paths", 256)),
            master_seed=int(overrides.get("master_seed",
                                          raw.get("mc", {}).get("master_seed", 0))),
            delta=float(get("lemma", "delta", 0.3)),
            p=float(get("lemma", "p", 0.75)),
            c_mode=get("lemma", "c", "calibrate"),
            out_dir=str(overrides.get("out_dir", raw.get("output", {}).get("dir", "out"))),
            n_x=int(get("grid", "n_x", 64)),
            n_y=int(get("grid", "n_y", 512)),
            threads=resolve_threads(overrides.get("threads")),
            raw=raw,
        )
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc
    return cfg


def resolve_threads(cli_value=None) -> int:
    if cli_value:
        return max(1, int(cli_value))
    env = os.environ.get("SHEARMIX_THREADS")
    if env:
        return max(1, int(env))
    return 1
