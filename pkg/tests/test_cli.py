import json
import re
from pathlib import Path

import pytest

from crspin.cli import main


def write_config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


HEIS_IDENTITIES = {
    "model": {"kind": "heisenberg", "m": 1, "sectors": [0]},
    "checks": ["identities"],
}

TORUS_ALL = {
    "model": {"kind": "torus_bundle", "m": 2, "ell": 0, "flux": 1, "sectors": [0]},
    "checks": ["identities", "spectrum", "cohomology", "vanishing", "conformal"],
}


def test_identities_pass_exit_zero(tmp_path, capsys):
    cfg = write_config(tmp_path, HEIS_IDENTITIES)
    out = tmp_path / "art"
    assert main(["run", "--config", cfg, "--out", str(out)]) == 0
    captured = capsys.readouterr()
    assert "check identities: PASS" in captured.out
    report = json.loads((out / "identities_report.json").read_text())
    assert report["passed"] is True
    assert report["model"] == "heisenberg(m=1, ell=0)"
    assert (out / "identities_residuals.csv").exists()


def test_negative_tolerance_is_config_error(tmp_path, capsys):
    cfg = write_config(
        tmp_path,
        {"model": {"kind": "heisenberg", "m": 1}, "tolerances": {"spectral": -1}},
    )
    assert main(["identities", "--config", cfg, "--out", str(tmp_path / "a")]) == 2
    assert "tolerances.spectral" in capsys.readouterr().err


def test_sphere_spectrum_reports_missing_sections(tmp_path, capsys):
    cfg = write_config(tmp_path, {"model": {"kind": "sphere", "m": 2}, "checks": ["spectrum"]})
    out = tmp_path / "art"
    assert main(["run", "--config", cfg, "--out", str(out)]) == 1
    assert "sphere model has no section space" in capsys.readouterr().out
    report = json.loads((out / "spectrum_report.json").read_text())
    assert report["passed"] is False
    assert "no section space" in report["error"]


def test_unknown_key_rejected_with_path(tmp_path, capsys):
    cfg = write_config(
        tmp_path,
        {"model": {"kind": "torus_bundle", "m": 2, "fluxx": 1}, "checks": ["identities"]},
    )
    assert main(["run", "--config", cfg]) == 2
    assert "model.fluxx: unknown key" in capsys.readouterr().err


def test_parse_error_includes_line(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text('{"model": {,}')
    assert main(["run", "--config", str(path)]) == 2
    assert "line 1" in capsys.readouterr().err


def test_unknown_check_rejected(tmp_path, capsys):
    cfg = write_config(
        tmp_path, {"model": {"kind": "heisenberg", "m": 1}, "checks": ["identitties"]}
    )
    assert main(["run", "--config", cfg]) == 2
    assert "unknown check" in capsys.readouterr().err


def test_missing_model_dimension(tmp_path, capsys):
    cfg = write_config(tmp_path, {"model": {"kind": "heisenberg"}, "checks": ["identities"]})
    assert main(["run", "--config", cfg]) == 2
    assert "model.m" in capsys.readouterr().err


def test_no_checks_requested(tmp_path, capsys):
    cfg = write_config(tmp_path, {"model": {"kind": "heisenberg", "m": 1}})
    assert main(["run", "--config", cfg]) == 2
    assert "no checks requested" in capsys.readouterr().err


def test_sectors_must_be_nonempty(tmp_path, capsys):
    cfg = write_config(
        tmp_path, {"model": {"kind": "heisenberg", "m": 1, "sectors": []}, "checks": ["identities"]}
    )
    assert main(["run", "--config", cfg]) == 2
    assert "model.sectors" in capsys.readouterr().err


def test_sphere_rejects_sector_list(tmp_path, capsys):
    cfg = write_config(
        tmp_path, {"model": {"kind": "sphere", "m": 2, "sectors": [0]}, "checks": ["vanishing"]}
    )
    assert main(["run", "--config", cfg]) == 2
    assert "model.sectors: unknown key" in capsys.readouterr().err


def test_zero_flux_rejected(tmp_path, capsys):
    cfg = write_config(
        tmp_path, {"model": {"kind": "torus_bundle", "m": 2, "flux": 0}, "checks": ["identities"]}
    )
    assert main(["run", "--config", cfg]) == 2
    assert "model.flux" in capsys.readouterr().err


def test_full_run_byte_identical(tmp_path):
    cfg = write_config(tmp_path, TORUS_ALL)
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--config", cfg, "--out", str(out_a)]) == 0
    assert main(["run", "--config", cfg, "--out", str(out_b)]) == 0
    files_a = sorted(p.name for p in out_a.iterdir())
    files_b = sorted(p.name for p in out_b.iterdir())
    assert files_a == files_b
    assert len(files_a) >= 10
    for name in files_a:
        assert (out_a / name).read_bytes() == (out_b / name).read_bytes()


def test_single_check_subcommand(tmp_path):
    cfg = write_config(
        tmp_path, {"model": {"kind": "sphere", "m": 2, "ell": 4}, "checks": []}
    )
    out = tmp_path / "art"
    assert main(["vanishing", "--config", cfg, "--out", str(out)]) == 0
    table = (out / "vanishing_table.csv").read_text()
    assert "VanKR-3" in table
    assert not (out / "identities_report.json").exists()


def test_check_flag_overrides_config_list(tmp_path):
    cfg = write_config(
        tmp_path,
        {"model": {"kind": "heisenberg", "m": 1, "sectors": [0]}, "checks": ["identities"]},
    )
    out = tmp_path / "art"
    assert main(["run", "--config", cfg, "--out", str(out), "--check", "vanishing"]) == 0
    assert (out / "vanishing_report.json").exists()
    assert not (out / "identities_report.json").exists()


def test_strict_promotes_shell_warnings(tmp_path, capsys):
    cfg = write_config(
        tmp_path,
        {"model": {"kind": "torus_bundle", "m": 2, "flux": 1, "sectors": [1]}, "checks": ["spectrum"]},
    )
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "plain")]) == 0
    assert "warning" in capsys.readouterr().out
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "strict"), "--strict"]) == 1
    assert "strict" in capsys.readouterr().out


def test_obstruction_verdict_through_cli(tmp_path):
    cfg = write_config(
        tmp_path,
        {"model": {"kind": "torus_bundle", "m": 2, "ell": 0, "flux": 1, "sectors": [0]},
         "checks": ["vanishing"]},
    )
    out = tmp_path / "art"
    assert main(["run", "--config", cfg, "--out", str(out)]) == 0
    report = json.loads((out / "vanishing_report.json").read_text())
    obstruction = report["results"]["obstruction"]
    assert obstruction["status"] == "obstructed"
    assert obstruction["q_hat"] == "1"
    assert "positive Webster scalar curvature" in obstruction["message"]


def test_json_table_format(tmp_path):
    cfg = write_config(tmp_path, HEIS_IDENTITIES)
    out = tmp_path / "art"
    assert main(["run", "--config", cfg, "--out", str(out), "--format", "json"]) == 0
    rows = json.loads((out / "identities_residuals.json").read_text())
    assert rows and {"sector", "residual", "value", "tolerance", "passed"} == set(rows[0])
    assert not list(out.glob("*.csv"))


def test_csv_uses_full_precision_scientific(tmp_path):
    cfg = write_config(
        tmp_path,
        {"model": {"kind": "heisenberg", "m": 1, "sectors": [1]}, "checks": ["spectrum"]},
    )
    out = tmp_path / "art"
    assert main(["run", "--config", cfg, "--out", str(out)]) == 0
    lines = (out / "spectrum_sector1.csv").read_text().splitlines()
    assert lines[0] == "q,eigenvalue,multiplicity"
    for line in lines[1:]:
        eig = line.split(",")[1]
        assert re.fullmatch(r"-?\d\.\d{17}e[+-]\d+", eig), eig


def test_custom_truncation_accepted(tmp_path):
    cfg = write_config(
        tmp_path,
        {"model": {"kind": "heisenberg", "m": 1, "sectors": [0],
                   "truncation": {"fourier_radius": 2, "ladder_levels": 4}},
         "checks": ["identities"]},
    )
    assert main(["run", "--config", cfg, "--out", str(tmp_path / "art")]) == 0


def test_bad_truncation_rejected(tmp_path, capsys):
    cfg = write_config(
        tmp_path,
        {"model": {"kind": "heisenberg", "m": 1,
                   "truncation": {"ladder_levels": 1}},
         "checks": ["identities"]},
    )
    assert main(["run", "--config", cfg]) == 2
    assert "ladder_levels" in capsys.readouterr().err
