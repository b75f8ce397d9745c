import json

import numpy as np
import pytest

from hoermander_kit import spectra
from hoermander_kit.cli import main


def test_norm_command(tmp_path):
    lat = spectra.Lattice(sizes=(16, 16), periods=(2 * np.pi, 2 * np.pi))
    field = spectra.SpectralField.single_mode(lat, (3, 5))
    path = tmp_path / "field.bin"
    spectra.save_field(field, path)
    rc = main(["norm", "--field", str(path), "--s", "2.0",
               "--out", str(tmp_path / "rep")])
    assert rc == 0
    payload = json.loads((tmp_path / "rep" / "norm.json").read_text())
    assert payload["norm"] == pytest.approx(15.0, rel=1e-12)


def test_interp_check_command(tmp_path, capsys):
    rc = main(["interp-check", "--resolutions", "8", "--trials", "5",
               "--out", str(tmp_path)])
    assert rc == 0
    payload = json.loads((tmp_path / "interp-check.json").read_text())
    assert payload["passed"]


def test_compat_check_command(tmp_path):
    rc = main(["compat-check", "--nx", "32", "--nt", "32", "--s", "3.0",
               "--out", str(tmp_path)])
    assert rc == 0
    payload = json.loads((tmp_path / "compat-check.json").read_text())
    assert payload["passed"] and payload["count"] == 1


def test_compat_check_config(tmp_path):
    cfg = {
        "geometry": {"kind": "interval", "nx": 32},
        "tau": 1.0,
        "s": 3.0,
        "a": {"2": "1"},
        "boundary": {"kind": "dirichlet"},
    }
    cfg_path = tmp_path / "problem.json"
    cfg_path.write_text(json.dumps(cfg))
    rc = main(["compat-check", "--config", str(cfg_path), "--nt", "32"])
    assert rc == 0


def test_trace_check_command(tmp_path):
    rc = main(["trace-check", "--trials", "3", "--out", str(tmp_path)])
    assert rc == 0
    payload = json.loads((tmp_path / "trace-check.json").read_text())
    assert payload["max_identity_error"] <= 1e-9


def test_iso_bench_command(tmp_path, capsys):
    rc = main([
        "iso-bench", "--geometry", "interval", "--s-grid", "3.0",
        "--resolutions", "16,32", "--trials", "30", "--csv",
        "--out", str(tmp_path),
    ])
    assert rc == 0
    csv_text = (tmp_path / "iso-bench.csv").read_text()
    assert "condition" in csv_text.splitlines()[0]


def test_jump_study_command(tmp_path):
    rc = main([
        "jump-study", "--resolutions", "16,32", "--trials", "30",
        "--out", str(tmp_path),
    ])
    assert rc == 0
    payload = json.loads((tmp_path / "jump-study.json").read_text())
    assert len(payload["rows"]) == 2


def test_iso_bench_config(tmp_path):
    cfg = {
        "geometry": "interval",
        "s_grid": [3.0],
        "phi": [{"kind": "Constant", "value": 1.0}],
        "trials": 30,
        "resolutions": [16, 32],
        "seed": 2,
    }
    cfg_path = tmp_path / "case.json"
    cfg_path.write_text(json.dumps(cfg))
    rc = main(["iso-bench", "--config", str(cfg_path), "--out", str(tmp_path)])
    assert rc == 0
    payload = json.loads((tmp_path / "iso-bench.json").read_text())
    assert payload["case"]["s_grid"] == [3.0]
