"""Command line interface, exercised in process through main(argv)."""

import json

import pytest

from windtree.cli import main
from windtree.errors import RetryExhausted, WindtreeError
from windtree.version import __version__


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0
    assert capsys.readouterr().out.strip() == __version__


def test_subcommand_required():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_iet_prints_invariants_and_exchange(capsys):
    rc = main(["iet", "--seed", "0"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "genus 5" in out
    assert "genus 2" in out
    assert "first-return exchange on 4 intervals" in out
    assert "deck labels:" in out


def test_iet_accepts_algebraic_table(capsys):
    rc = main(["iet", "--veech", "0.5", "0.5", "2", "--seed", "0"])
    assert rc == 0
    assert "table a=" in capsys.readouterr().out


def test_diffuse_writes_reports(tmp_path, capsys):
    out_dir = tmp_path / "run"
    rc = main(["diffuse", "--angles", "2", "--tmax", "1000", "--seed", "5",
               "--out", str(out_dir)])
    assert rc == 0
    assert "exponent median" in capsys.readouterr().out
    assert (out_dir / "report.csv").exists()
    manifest = json.loads((out_dir / "manifest.json").read_text())
    assert manifest["config"]["angle_count"] == 2
    assert (out_dir / "series_0.csv").exists()


def test_diffuse_corridor_is_ballistic(capsys):
    rc = main(["diffuse", "--corridor", "--angles", "2", "--tmax", "1000"])
    assert rc == 0
    assert "exponent median 1.0000" in capsys.readouterr().out


def test_deviations_reports_each_class(capsys):
    rc = main(["deviations", "--angles", "2", "--tmax", "1000"])
    out = capsys.readouterr().out
    assert rc == 0
    for name in ("f:", "dual:", "minus:"):
        assert name in out


def test_lyapunov_prints_spectra(capsys):
    rc = main(["lyapunov", "--angles", "2", "--steps", "400", "--seed", "7"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "character spectra over 2 directions" in out
    assert "pairing sums:" in out


def test_check_runs_the_suite(capsys):
    rc = main(["check", "--angles", "2", "--samples", "2",
               "--events", "2000", "--tmax", "1000"])
    out = capsys.readouterr().out
    assert rc == 0
    assert out.count("PASS") == 9
    assert "FAIL" not in out


def test_bad_table_exits_2(capsys):
    rc = main(["diffuse", "--a", "1.5", "--angles", "2", "--tmax", "1000"])
    assert rc == 2
    assert "configuration error" in capsys.readouterr().err


def test_bad_discriminant_exits_2(capsys):
    rc = main(["iet", "--veech", "0.5", "0.5", "4"])
    assert rc == 2
    assert "configuration error" in capsys.readouterr().err


def test_bad_config_exits_2(capsys):
    rc = main(["diffuse", "--angles", "0", "--tmax", "1000"])
    assert rc == 2
    assert "configuration error" in capsys.readouterr().err


def test_run_failure_exits_1(monkeypatch, capsys):
    def fail(*_a, **_k):
        raise RetryExhausted("every slot aborted")

    monkeypatch.setattr("windtree.cli.run_diffusion", fail)
    rc = main(["diffuse", "--angles", "2", "--tmax", "1000"])
    assert rc == 1
    assert "run failed" in capsys.readouterr().err


def test_generic_error_exits_1(monkeypatch, capsys):
    def fail(*_a, **_k):
        raise WindtreeError("stream broke")

    monkeypatch.setattr("windtree.cli.run_lyapunov", fail)
    rc = main(["lyapunov", "--angles", "2", "--steps", "400"])
    assert rc == 1
    assert "error:" in capsys.readouterr().err
