import numpy as np
import pytest

from shearmix import harness
from shearmix.config import ExperimentConfig
from shearmix.io import read_csv
from shearmix.shear import ShearProfile


@pytest.fixture
def cfg():
    return ExperimentConfig(
        shear=ShearProfile.cos_power(1), N=1, nu_list=[0.0, 1e-3],
        f0_id="cos_x_sin_y", norm_ids=("Hminus1", "L2"),
        t_min=1.0, t_max=16.0, n_paths=4, master_seed=7,
        delta=0.3, p=0.75, n_x=16, n_y=64)


def test_run_mix_decay_outputs(cfg, tmp_path):
    out = harness.run_mix_decay(cfg, tmp_path)
    assert set(out["exponents"]) == {(nu, nid) for nu in (0.0, 1e-3)
                                     for nid in ("Hminus1", "L2")}
    schema, header, rows = read_csv(tmp_path / "mix_decay_series.csv")
    assert schema == "mix-decay-series-v1"
    # 2 nus x 2 norms x 5 sample times
    assert len(rows) == 2 * 2 * 5
    assert (tmp_path / "mix_decay_fits.csv").exists()
    assert (tmp_path / "mix_decay_Hminus1.svg").exists()
    assert (tmp_path / "manifest.json").exists()


def test_run_lemma_check_summary(cfg, tmp_path):
    out = harness.run_lemma_check(cfg, tmp_path, n_paths=4)
    for nu in (0.0, 1e-3):
        s = out[nu]
        assert s["c"] > 0
        assert s["n_good"] >= 1
        assert s["pass_rate"] == 1.0
        assert s["max_measure_scaled"] < 2 * np.pi * 16**0.5
    schema, _, rows = read_csv(tmp_path / "lemma_check.csv")
    assert schema == "lemma-check-v1"
    assert rows  # one row per (path, t)


def test_run_lemma_check_threaded_matches_serial(cfg, tmp_path):
    serial = harness.run_lemma_check(cfg, tmp_path / "s", n_paths=4)
    cfg.threads = 3
    threaded = harness.run_lemma_check(cfg, tmp_path / "t", n_paths=4)
    a = (tmp_path / "s" / "lemma_check.csv").read_bytes()
    b = (tmp_path / "t" / "lemma_check.csv").read_bytes()
    assert a == b
    assert serial[0.0]["c"] == threaded[0.0]["c"]


def test_run_fk_validate(cfg, tmp_path):
    out = harness.run_fk_validate(cfg, tmp_path, t=1.0, n_paths=64)
    for nu in (0.0, 1e-3):
        assert out[nu]["ok"]
    assert (tmp_path / "fk_estimate_nu0.fld").exists()
    assert (tmp_path / "fk_estimate_nu0.001.se.fld").exists()


def test_run_oscillatory(cfg, tmp_path):
    out = harness.run_oscillatory(cfg, tmp_path, ks=(1,),
                                  pairs=(("one", "one"),), n_paths=2)
    ratios = out["max_ratios"]
    assert (0.0, 1, "one", "one") in ratios
    assert all(v > 0 for v in ratios.values())
    schema, _, rows = read_csv(tmp_path / "oscillatory.csv")
    assert schema == "oscillatory-v1"


def test_run_geometry(cfg, tmp_path):
    out = harness.run_geometry(cfg, tmp_path, n_paths=2)
    assert out["max_cov_gap"] < 1e-6
    assert 0 < out["max_slope_ratio"] < 10.0
    schema, header, rows = read_csv(tmp_path / "geometry.csv")
    assert schema == "geometry-v1"
    assert rows


def test_run_dissipation(cfg, tmp_path):
    cfg.nu_list = [1e-2, 3e-3, 1e-3]
    out = harness.run_dissipation(cfg, tmp_path)
    assert -1.0 < out["sweep"]["slope"] < -0.3
    # the crossover inequality is asymptotic in nu: holds at 1e-3, not 1e-2
    assert out["crossover"][1e-3]["ok"]


def test_run_dissipation_requires_positive_nu(cfg, tmp_path):
    cfg.nu_list = [0.0]
    with pytest.raises(ValueError):
        harness.run_dissipation(cfg, tmp_path)


def test_run_all_writes_subdirectories(cfg, tmp_path):
    cfg.nu_list = [0.0, 1e-2]
    out = harness.run_all(cfg, tmp_path)
    assert set(out) == {"mix_decay", "lemma_check", "fk_validate",
                        "oscillatory", "geometry", "dissipation"}
    for sub in ("mix-decay", "lemma-check", "fk-validate", "oscillatory",
                "geometry", "dissipation"):
        assert (tmp_path / sub / "manifest.json").exists()
