"""Experiment drivers: schedules, fits, seeding, reports, output files."""

import json
import math
import os
from dataclasses import replace

import numpy as np
import pytest

from windtree.errors import ConfigError, DomainError, InsufficientData
from windtree.experiments import (DEVIATION_CLASSES, ExperimentConfig,
                                  angle_rng, fit_exponent, geometric_schedule,
                                  is_rational_slope, run_consistency,
                                  run_deviation_spectrum, run_diffusion,
                                  run_lyapunov, sample_angle, sample_angles)
from windtree.tables import TableParams, veech_params

SQUARE = TableParams(0.5, 0.5)


def small_config(**kw):
    base = dict(table=SQUARE, angle_count=2, t_max=1.0e3, seed=0)
    base.update(kw)
    return ExperimentConfig(**base)


def test_fit_exponent_recovers_power_laws():
    t = geometric_schedule(1.0e7)
    slope, err = fit_exponent(t, t ** (2.0 / 3.0))
    assert slope == pytest.approx(2.0 / 3.0, abs=1e-12)
    assert err == pytest.approx(0.0, abs=1e-12)
    slope, _err = fit_exponent(t, np.ones_like(t))
    assert slope == 0.0


def test_fit_exponent_logarithmic_growth_reads_near_zero():
    # the slow-growth control: a log t log log t profile over the fit
    # window must sit well below any diffusive exponent
    t = geometric_schedule(1.0e7)
    v = np.log(t) * np.log(np.log(t + 2.0))
    slope, _ = fit_exponent(t, v)
    assert 0.0 < slope < 0.15


def test_fit_exponent_rejects_bad_input():
    t = geometric_schedule(1.0e7)
    with pytest.raises(DomainError):
        fit_exponent(t, t[:-1])
    with pytest.raises(ConfigError):
        fit_exponent(t, t, window_fraction=0.0)
    with pytest.raises(InsufficientData):
        fit_exponent(t[:6], t[:6], window_fraction=0.5)
    v = np.ones_like(t)
    v[-3] = -1.0
    with pytest.raises(InsufficientData):
        fit_exponent(t, v)


def test_geometric_schedule_shape():
    ts = geometric_schedule(1.0e7)
    assert len(ts) == 95
    assert ts[0] == 1.0
    assert ts[-1] == 1.0e7
    assert np.all(np.diff(ts) > 0.0)
    ratios = ts[1:-1] / ts[:-2]
    assert np.allclose(ratios, 2.0 ** 0.25, rtol=1e-12)
    with pytest.raises(ConfigError):
        geometric_schedule(0.5)
    with pytest.raises(ConfigError):
        geometric_schedule(1.0e5, ratio=1.0)


def test_angle_slots_are_independent_and_reproducible():
    eight = sample_angles(0, 8)
    assert sample_angles(0, 8) == eight
    assert sample_angles(0, 4) == eight[:4]
    assert all(0.0 < th < math.pi / 2.0 for th in eight)
    assert not any(is_rational_slope(th) for th in eight)
    assert sample_angles(1, 8) != eight


def test_rational_slope_rejection():
    assert is_rational_slope(math.pi / 4.0)
    assert is_rational_slope(math.atan(1.0 / 3.0))
    assert is_rational_slope(math.pi / 2.0)
    assert not is_rational_slope(sample_angle(angle_rng(3, 0)))


def test_config_validation_and_digest():
    cfg = small_config()
    moved = replace(cfg, out_dir="/tmp/somewhere", threads=4)
    assert moved.digest() == cfg.digest()
    assert replace(cfg, seed=1).digest() != cfg.digest()
    assert ExperimentConfig.veech(0.5, 0.5, 2).table == veech_params(0.5, 0.5, 2)
    for bad in (dict(angle_count=0), dict(t_max=100.0),
                dict(schedule_ratio=1.0), dict(threads=0),
                dict(retry_cap=0), dict(fit_window_fraction=0.0)):
        with pytest.raises(ConfigError):
            small_config(**bad)


def test_diffusion_report_is_scheduling_independent():
    one = run_diffusion(small_config(angle_count=3, seed=5), write=False)
    two = run_diffusion(small_config(angle_count=3, seed=5, threads=2),
                        write=False)
    assert one.rows == two.rows
    assert one.median == two.median
    assert one.digest == two.digest


def test_forced_corridor_direction_is_ballistic():
    rep = run_diffusion(small_config(), forced_angle=math.pi / 2.0,
                        write=False)
    assert rep.median == pytest.approx(1.0, abs=1e-9)
    assert rep.iqr == pytest.approx(0.0, abs=1e-12)


def test_deviation_spectrum_report_keys():
    reps = run_deviation_spectrum(small_config(), write=False)
    assert sorted(reps) == sorted(DEVIATION_CLASSES)
    for rep in reps.values():
        assert len(rep.rows) == 2
        assert not any(r.aborted for r in rep.rows)
    only = run_deviation_spectrum(small_config(), cocycles=("dual",),
                                  write=False)
    assert list(only) == ["dual"]
    # the holonomy-dual class makes linear progress at any horizon
    assert only["dual"].median == pytest.approx(1.0, abs=0.1)
    with pytest.raises(ConfigError):
        run_deviation_spectrum(small_config(), cocycles=("bogus",))


def test_lyapunov_report_smoke():
    rep = run_lyapunov(small_config(seed=7, n_accel=400), write=False)
    assert len(rep.rows) == 2
    assert sorted(rep.medians) == sorted(rep.TARGETS)
    s1, s2 = rep.pairing_sums
    assert s1 == pytest.approx(5.0 / 3.0, abs=0.3)
    assert s2 == pytest.approx(2.0, abs=0.3)
    assert rep.csv().splitlines()[0].startswith("angle_index,")
    with pytest.raises(InsufficientData):
        run_lyapunov(small_config(n_accel=5), write=False)


def test_consistency_suite_names_and_smoke():
    suite = run_consistency(small_config(n_samples=2, n_events=2000),
                            write=False)
    assert [c.name for c in suite.checks] == [
        "sqrt2_bound", "sqrt2_fault_detected", "oracle_differential",
        "time_reversal", "surface_invariants", "step_unimodularity",
        "integer_nondecay", "torus_exponent", "report_determinism"]
    assert suite.passed, suite.describe()
    assert all(c.line().startswith("PASS ") for c in suite.checks)


def test_output_files(tmp_path):
    cfg = small_config(out_dir=str(tmp_path / "diff"))
    rep = run_diffusion(cfg)
    report_path = tmp_path / "diff" / "report.csv"
    lines = report_path.read_text().splitlines()
    assert lines[0].startswith("angle_index,")
    assert len(lines) == 1 + cfg.angle_count
    manifest = json.loads((tmp_path / "diff" / "manifest.json").read_text())
    assert manifest["digest"] == cfg.digest()
    assert manifest["results"]["median"] == rep.median
    assert manifest["wall_time_s"] > 0.0
    for row in rep.rows:
        if not row.aborted:
            assert (tmp_path / "diff" / f"series_{row.index}.csv").exists()

    dev_cfg = small_config(out_dir=str(tmp_path / "dev"))
    run_deviation_spectrum(dev_cfg, cocycles=("dual",))
    assert (tmp_path / "dev" / "report_dual.csv").exists()
    assert (tmp_path / "dev" / "manifest.json").exists()

    chk_cfg = small_config(n_samples=2, n_events=2000,
                           out_dir=str(tmp_path / "chk"))
    suite = run_consistency(chk_cfg)
    text = (tmp_path / "chk" / "checks.txt").read_text()
    assert text == suite.describe()
    assert os.path.exists(tmp_path / "chk" / "manifest.json")
