"""Experiment orchestration behind the CLI subcommands.

Each run_* function sweeps one part of the verification suite, writes
schema-tagged CSVs plus SVG plots into the output directory, and returns a
summary dict.  All randomness flows from the master seed through
counter-based per-path derivation, so reruns with the same configuration
produce byte-identical CSVs.
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import dissipation, fkmc, geometry, io, norms, oscillatory
from .brownian import classify_good_event, default_phase_steps, derive_rng, \
    sample_path, verify_tail_bound
from .config import ExperimentConfig
from .grid import PeriodicGrid1D, PeriodicGrid2D, ScalarField
from .phase import PhaseAccumulator, calibrate_sublevel_constant, \
    check_inverse_derivative_integral, count_zeros_near_critical_points, \
    sublevel_set
from .plots import plot_norm_series
from .solver import EvolutionConfig, solve_exact_inviscid, solve_viscous


def _initial_field(cfg: ExperimentConfig) -> ScalarField:
    grid = PeriodicGrid2D(cfg.n_x, cfg.n_y)
    return ScalarField.from_function(cfg.f0_func, grid)


def _finish(out_dir, cfg: ExperimentConfig, t0: float) -> None:
    io.write_manifest(Path(out_dir) / "manifest.json", cfg.as_dict(),
                      cfg.master_seed, time.time() - t0)


def run_mix_decay(cfg: ExperimentConfig, out_dir) -> dict:
    """Norm decay sweep over nu: solver -> norm series -> power-law fits."""
    t0 = time.time()
    out_dir = Path(out_dir)
    f0 = _initial_field(cfg)
    ts = cfg.sample_times()
    chash = io.config_hash(cfg.as_dict())
    rows, fit_rows = [], []
    all_series = {nid: [] for nid in cfg.norm_ids}
    exponents = {}
    for nu in cfg.nu_list:
        if nu == 0.0:
            snaps = [(t, solve_exact_inviscid(f0, cfg.shear, t)) for t in ts]
        else:
            snaps = solve_viscous(f0, cfg.shear,
                                  EvolutionConfig(nu=nu, sample_times=ts))
        series = {nid: norms.NormSeries(norm_id=nid, nu=nu,
                                        profile_id=cfg.shear.label,
                                        f0_id=cfg.f0_id, times=[], values=[])
                  for nid in cfg.norm_ids}
        for t, fld in snaps:
            for nid in cfg.norm_ids:
                v = norms.evaluate_norm(nid, fld)
                series[nid].append(t, v)
                rows.append((chash, cfg.master_seed, nu, nid, t, v))
        t_hi = min(cfg.t_max, cfg.good_event.t_nu(nu))
        for nid in cfg.norm_ids:
            fit = norms.fit_decay_exponent(series[nid], cfg.t_min, t_hi)
            fit_rows.append((chash, cfg.master_seed, nu, nid,
                             fit["exponent"], fit["constant"],
                             fit["r2"]))
            exponents[(nu, nid)] = fit["exponent"]
            all_series[nid].append((f"nu={nu:g}", series[nid].times,
                                    series[nid].values))
    io.write_csv(out_dir / "mix_decay_series.csv", "mix-decay-series-v1",
                 ["config_hash", "seed", "nu", "norm", "t", "value"], rows)
    io.write_csv(out_dir / "mix_decay_fits.csv", "mix-decay-fits-v1",
                 ["config_hash", "seed", "nu", "norm", "exponent",
                  "constant", "r_squared"], fit_rows)
    for nid, sl in all_series.items():
        plot_norm_series(out_dir / f"mix_decay_{nid}.svg", sl, cfg.N,
                         title=f"{nid} decay, shear {cfg.shear.label}")
    _finish(out_dir, cfg, t0)
    return {"exponents": exponents}


def _lemma_one_path(args):
    (cfg, nu, i, horizon, t_list, c, M) = args
    path = sample_path(seed=cfg.master_seed, t_horizon=horizon, M=M, nu=nu,
                       rng=derive_rng(cfg.master_seed, i))
    good = classify_good_event(path, cfg.good_event, nu)
    acc = PhaseAccumulator(cfg.shear, path, nu)
    grid = PeriodicGrid1D(4096)
    m = cfg.structure.count
    alpha = 1.0 / (cfg.N + 1)
    out = []
    for t in t_list:
        fld = acc.field_at(t, grid)
        rep = sublevel_set(fld, c, cfg.N, max_intervals=m)
        integral = (check_inverse_derivative_integral(fld, rep)
                    if rep.complement else 0.0)
        zs, zsp = count_zeros_near_critical_points(fld, cfg.structure,
                                                   cfg.delta)
        ok = (rep.cover_count <= m
              and max(zs, default=0) <= 1 and max(zsp, default=0) <= 1)
        out.append({"seed": i, "nu": nu, "t": t, "good": good,
                    "measure": rep.measure,
                    "measure_scaled": rep.measure * t ** alpha,
                    "cover_count": rep.cover_count,
                    "inv_deriv_integral": integral,
                    "integral_scaled": integral * t ** alpha,
                    "zeros_S": max(zs, default=0),
                    "zeros_Sprime": max(zsp, default=0),
                    "structural_ok": ok})
    return out


def run_lemma_check(cfg: ExperimentConfig, out_dir, n_paths=None,
                    tail_paths: int = 0) -> dict:
    """Per-path sublevel structure checks on the random phase derivative.

    For every sampled path and dyadic t: sublevel-set measure and cover
    count, the total-variation integral of 1/S over the complement, and
    zero counts near each critical point.  Good-event paths must satisfy
    the structural bounds with a single constant.
    """
    t0 = time.time()
    out_dir = Path(out_dir)
    n_paths = n_paths or cfg.n_paths
    chash = io.config_hash(cfg.as_dict())
    rows = []
    summary = {}
    for nu in cfg.nu_list:
        horizon = min(cfg.t_max, cfg.good_event.t_nu(nu))
        t_list = [t for t in cfg.sample_times() if t <= horizon]
        M = default_phase_steps(horizon)
        # calibrate c on a short pilot set of paths
        pilot = [PhaseAccumulator(cfg.shear,
                                  sample_path(seed=cfg.master_seed,
                                              t_horizon=horizon, M=M, nu=nu,
                                              rng=derive_rng(cfg.master_seed,
                                                             10_000 + j)),
                                  nu)
                 for j in range(4)]
        c = (calibrate_sublevel_constant(cfg.shear, cfg.structure, cfg.delta,
                                         pilot, t_list, PeriodicGrid1D(2048),
                                         N=cfg.N)
             if cfg.c_mode == "calibrate" else float(cfg.c_mode))
        npaths_here = 1 if nu == 0.0 else n_paths
        args = [(cfg, nu, i, horizon, t_list, c, M)
                for i in range(npaths_here)]
        if cfg.threads > 1:
            with ThreadPoolExecutor(max_workers=cfg.threads) as ex:
                results = list(ex.map(_lemma_one_path, args))
        else:
            results = [_lemma_one_path(a) for a in args]
        n_good = 0
        n_pass = 0
        max_meas, max_int = 0.0, 0.0
        for per_path in results:
            goodness = per_path[0]["good"]
            n_good += bool(goodness)
            ok = all(r["structural_ok"] for r in per_path)
            n_pass += bool(goodness and ok)
            for r in per_path:
                if goodness:
                    max_meas = max(max_meas, r["measure_scaled"])
                    max_int = max(max_int, r["integral_scaled"])
                rows.append((chash, r["seed"], nu, c, r["t"],
                             int(r["good"]), r["measure"],
                             r["measure_scaled"], r["cover_count"],
                             r["inv_deriv_integral"], r["integral_scaled"],
                             r["zeros_S"], r["zeros_Sprime"],
                             int(r["structural_ok"])))
        summary[nu] = {"c": c, "n_paths": npaths_here, "n_good": n_good,
                       "pass_rate": (n_pass / n_good) if n_good else None,
                       "max_measure_scaled": max_meas,
                       "max_integral_scaled": max_int}
        if tail_paths and nu > 0:
            summary[nu]["tail"] = verify_tail_bound(
                nu, cfg.good_event, tail_paths,
                master_seed=cfg.master_seed)
    io.write_csv(out_dir / "lemma_check.csv", "lemma-check-v1",
                 ["config_hash", "seed", "nu", "c", "t", "good", "measure",
                  "measure_scaled", "cover_count", "inv_deriv_integral",
                  "integral_scaled", "zeros_S", "zeros_Sprime", "pass"],
                 rows)
    _finish(out_dir, cfg, t0)
    return summary


def run_fk_validate(cfg: ExperimentConfig, out_dir, t: float = 2.0,
                    n_paths=None) -> dict:
    """Monte Carlo flow-map estimate against the spectral reference."""
    t0 = time.time()
    out_dir = Path(out_dir)
    n_paths = n_paths or cfg.n_paths
    grid = PeriodicGrid2D(cfg.n_x, min(cfg.n_y, 128))
    f0 = ScalarField.from_function(cfg.f0_func, grid)
    chash = io.config_hash(cfg.as_dict())
    rows = []
    results = {}
    for nu in cfg.nu_list:
        est = fkmc.estimate_solution(f0, cfg.shear, nu, t, n_paths,
                                     master_seed=cfg.master_seed)
        if nu == 0.0:
            ref = solve_exact_inviscid(f0, cfg.shear, t)
        else:
            ref = solve_viscous(f0, cfg.shear,
                                EvolutionConfig(nu=nu, sample_times=[t],
                                                dt=0.005))[0][1]
        err = np.abs(est.field.values - ref.values)
        tol = 4.0 * est.standard_error + 5e-4
        ok = bool(np.all(err <= tol))
        rows.append((chash, cfg.master_seed, nu, t, n_paths,
                     float(err.max()), est.max_standard_error, int(ok)))
        io.write_field(out_dir / f"fk_estimate_nu{nu:g}.fld", est.field,
                       t, nu, cfg.master_seed)
        io.write_field(out_dir / f"fk_estimate_nu{nu:g}.se.fld",
                       ScalarField(grid, est.standard_error), t, nu,
                       cfg.master_seed)
        results[nu] = {"max_err": float(err.max()),
                       "max_se": est.max_standard_error, "ok": ok}
    io.write_csv(out_dir / "fk_validate.csv", "fk-validate-v1",
                 ["config_hash", "seed", "nu", "t", "n_paths", "max_err",
                  "max_se", "pass"], rows)
    _finish(out_dir, cfg, t0)
    return results


def run_oscillatory(cfg: ExperimentConfig, out_dir, ks=(1, 2, 4, 8),
                    pairs=(("one", "one"), ("sin_y", "bump")),
                    n_paths: int = 16) -> dict:
    """Oscillatory-decay ratio sweep over (nu, k, test-function pair)."""
    t0 = time.time()
    out_dir = Path(out_dir)
    chash = io.config_hash(cfg.as_dict())
    rows = []
    max_ratios = {}
    for nu in cfg.nu_list:
        t_hi = min(cfg.t_max, cfg.good_event.t_nu(nu))
        t_list = [t for t in cfg.sample_times() if t <= t_hi]
        for k in ks:
            for fa, fb in pairs:
                F = oscillatory.TEST_FUNCTIONS[fa]
                g = oscillatory.TEST_FUNCTIONS[fb]
                rep = oscillatory.verify_lemma_ibp(
                    cfg.shear, nu, k, F, g, n_paths, t_list,
                    cfg.good_event, master_seed=cfg.master_seed)
                max_ratios[(nu, k, fa, fb)] = rep.max_ratio
                for r in rep.rows:
                    rows.append((chash, r["seed"], nu, k, fa, fb, r["t"],
                                 r["abs_integral"], r["ratio"],
                                 int(r["good"])))
    io.write_csv(out_dir / "oscillatory.csv", "oscillatory-v1",
                 ["config_hash", "seed", "nu", "k", "F", "g", "t",
                  "abs_integral", "ratio", "good"], rows)
    _finish(out_dir, cfg, t0)
    return {"max_ratios": max_ratios}


def run_geometry(cfg: ExperimentConfig, out_dir, x0: float = 1.0,
                 n_paths: int = 4) -> dict:
    """Image-curve sweep: slope law, wrap counts, change of variables."""
    t0 = time.time()
    out_dir = Path(out_dir)
    chash = io.config_hash(cfg.as_dict())
    f0 = _initial_field(cfg)
    grid1 = PeriodicGrid1D(4096)
    rows = []
    worst = {"max_slope_ratio": 0.0, "max_cov_gap": 0.0,
             "max_line_integral_scaled": 0.0}
    scale = max(abs(float(np.max(f0.values))), 1.0)
    for nu in cfg.nu_list:
        horizon = min(cfg.t_max, cfg.good_event.t_nu(nu))
        t_list = [t for t in cfg.sample_times() if 1.0 <= t <= horizon]
        npaths_here = 1 if nu == 0.0 else n_paths
        for i in range(npaths_here):
            path = sample_path(seed=cfg.master_seed, t_horizon=horizon,
                               M=default_phase_steps(horizon), nu=nu,
                               rng=derive_rng(cfg.master_seed, i))
            if not classify_good_event(path, cfg.good_event, nu):
                continue
            acc = PhaseAccumulator(cfg.shear, path, nu)
            for t in t_list:
                fld = acc.field_at(t, grid1)
                rep = sublevel_set(fld, 1.0, cfg.N,
                                   max_intervals=cfg.structure.count)
                for (ja, jb) in rep.complement:
                    curve = geometry.build_image_curve(fld, path, nu, x0,
                                                       (ja, jb))
                    slope_ratio = curve.max_slope() * t ** (1.0 / (cfg.N + 1))
                    lint = geometry.line_integral_mean_zero(curve, f0)
                    max_lint = max((abs(v) for v in lint), default=0.0)
                    cov = geometry.change_of_variables_check(curve, f0,
                                                             np.cos)
                    rows.append((chash, i, nu, t, ja, jb, curve.wraps,
                                 curve.max_slope(), slope_ratio,
                                 max_lint, cov["gap"],
                                 curve.remainder_arclength))
                    worst["max_slope_ratio"] = max(
                        worst["max_slope_ratio"], slope_ratio)
                    worst["max_cov_gap"] = max(worst["max_cov_gap"],
                                               cov["gap"] / scale)
                    worst["max_line_integral_scaled"] = max(
                        worst["max_line_integral_scaled"],
                        max_lint * t ** (1.0 / (cfg.N + 1)))
    io.write_csv(out_dir / "geometry.csv", "geometry-v1",
                 ["config_hash", "seed", "nu", "t", "interval_lo",
                  "interval_hi", "wraps", "max_slope", "slope_ratio",
                  "max_line_integral", "cov_gap", "remainder_arclength"],
                 rows)
    _finish(out_dir, cfg, t0)
    return worst


def run_dissipation(cfg: ExperimentConfig, out_dir,
                    threshold: float = 1e-3) -> dict:
    """Half-life sweep over positive nu plus the crossover-margin check."""
    t0 = time.time()
    out_dir = Path(out_dir)
    chash = io.config_hash(cfg.as_dict())
    f0 = _initial_field(cfg)
    nus = [nu for nu in cfg.nu_list if nu > 0]
    if not nus:
        raise ValueError("dissipation sweep needs at least one positive nu")
    sweep = dissipation.half_life_sweep(cfg.shear, nus, f0,
                                        threshold=threshold)
    rows = [(chash, cfg.master_seed, nu, cfg.N, hl, sweep["slope"])
            for nu, hl in zip(sweep["nu"], sweep["half_life"])]
    io.write_csv(out_dir / "dissipation.csv", "dissipation-v1",
                 ["config_hash", "seed", "nu", "N", "half_life", "slope"],
                 rows)
    crossover = {nu: dissipation.crossover_consistency(nu, cfg.N, cfg.p)
                 for nu in nus}
    _finish(out_dir, cfg, t0)
    return {"sweep": sweep, "crossover": crossover}


def run_all(cfg: ExperimentConfig, out_dir) -> dict:
    out_dir = Path(out_dir)
    return {
        "mix_decay": run_mix_decay(cfg, out_dir / "mix-decay"),
        "lemma_check": run_lemma_check(cfg, out_dir / "lemma-check"),
        "fk_validate": run_fk_validate(cfg, out_dir / "fk-validate"),
        "oscillatory": run_oscillatory(cfg, out_dir / "oscillatory"),
        "geometry": run_geometry(cfg, out_dir / "geometry"),
        "dissipation": run_dissipation(cfg, out_dir / "dissipation"),
    }
