import csv
import json
import subprocess
import sys

import pytest

from lbmix import __version__
from lbmix.cli import fmt, main


def run_cli(tmp_path, command, config, *extra, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(config))
    out = tmp_path / f"out_{command}"
    code = main([command, "--config", str(path), "--out", str(out), "--quiet", *extra])
    report = json.loads((out / "report.json").read_text()) if (out / "report.json").exists() else None
    return code, out, report


def test_classify_natural(tmp_path):
    code, _, rep = run_cli(tmp_path, "classify", {"coefficients": ["1", "2"]})
    assert code == 0
    assert rep["result"]["regime"]["regime"] == "Natural"
    assert rep["version"] == __version__
    assert rep["config"]["coefficients"] == ["1", "2"]


def test_solve_zero_field(tmp_path):
    code, out, rep = run_cli(tmp_path, "solve", {"coefficients": ["1"], "grid": {"nx": 5, "ny": 7}})
    assert code == 0
    rows = list(csv.reader((out / "field.csv").open()))
    assert rows[0] == ["x", "y", "u"]
    assert len(rows) == 1 + 35
    assert all(float(r[2]) == 0.0 for r in rows[1:])
    ys = [float(r[1]) for r in rows[1:]]
    xs = [float(r[0]) for r in rows[1:]]
    assert ys[0] == -1.0 and ys[-1] == 1.0 and ys == sorted(ys)
    assert xs[:5] == [0.0, 0.25, 0.5, 0.75, 1.0]


def test_solve_degenerate_exit_2(tmp_path):
    cfg = {"coefficients": ["3/4"], "boundary": {"phi": [{"type": "sine", "terms": [[9, 1.0]]}]}}
    code, _, rep = run_cli(tmp_path, "solve", cfg)
    assert code == 2
    assert rep["error"]["ks"] == [9]


def test_solve_degenerate_orthogonal_ok(tmp_path):
    cfg = {"coefficients": ["3/4"], "boundary": {"phi": [{"type": "sine", "terms": [[6, 1.0]]}]}}
    code, _, rep = run_cli(tmp_path, "solve", cfg)
    assert code == 0
    assert rep["result"]["degenerate_modes"] == [{"k": 5, "data_orthogonal": True, "homogeneous_dim": 1}]
    assert rep["result"]["unique"] is False


@pytest.mark.parametrize("cfg", [
    {"coefficients": ["2", "1"]},
    {"coefficients": [1, 2]},
    {"nothing": True},
    {"coefficients": ["1"], "grid": {"nx": 1, "ny": 5}},
    {"coefficients": ["1"], "boundary": {"phi": [{"type": "spline"}]}},
])
def test_config_errors(tmp_path, cfg):
    code, _, rep = run_cli(tmp_path, "solve", cfg)
    assert code == 3 and rep["error"]["kind"] == "config"


def test_unreadable_config(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["classify", "--config", str(bad), "--out", str(tmp_path), "--quiet"]) == 3


def test_convergence_failure_exit_4(tmp_path):
    cfg = {"coefficients": ["1", "2"], "boundary": {"phi": [{"type": "bump", "width": 0.2}]}, "k_cap": 64}
    code, _, rep = run_cli(tmp_path, "solve", cfg)
    assert code == 4 and rep["error"]["kind"] == "CapExceeded"


def test_analyze_outputs(tmp_path):
    code, out, rep = run_cli(tmp_path, "analyze", {"coefficients": ["3/4"]}, "--kmax", "20")
    assert code == 0
    rows = list(csv.reader((out / "determinants.csv").open()))
    assert rows[0] == ["k", "log_delta1", "delta_ratio", "delta2_closed", "degenerate"]
    assert [int(r[0]) for r in rows[1:]] == list(range(1, 21))
    assert [int(r[0]) for r in rows[1:] if r[4] == "1"] == [5, 9, 13, 17]
    assert rep["result"]["regime"]["period"] == 8
    assert rep["config"]["kmax"] == 20


def test_byte_stable(tmp_path):
    cfg = {
        "coefficients": ["1/2", "3/2"],
        "boundary": {"phi": [{"type": "polynomial", "order": 4}, {"type": "bump", "width": 0.5}],
                     "psi": [{"type": "sine", "terms": [[1, 1.0], [2, 0.5]]}, None]},
        "grid": {"nx": 9, "ny": 9},
    }
    outs = []
    for sub in ("a", "b"):
        (tmp_path / sub).mkdir()
        outs.append(run_cli(tmp_path / sub, "solve", cfg)[1])
    out1, out2 = outs
    for name in ("field.csv", "report.json"):
        assert (out1 / name).read_bytes() == (out2 / name).read_bytes()


def test_verify_suites(tmp_path):
    code, _, rep = run_cli(tmp_path, "verify", {"coefficients": ["3/4"], "seed": 3})
    assert code == 0 and rep["result"]["passed"]
    assert set(rep["result"]["suites"]) == {"oracle_n1", "manufactured", "fd", "estimate"}


def test_fmt_shortest_roundtrip():
    for v in (0.1, 1 / 3, 1e-300, -2.5e17, 0.0):
        assert float(fmt(v)) == v and len(fmt(v).replace("-", "").replace(".", "").split("e")[0]) <= 17
    assert fmt(True) == "1" and fmt(7) == "7"


def test_module_entry_point(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"coefficients": ["1", "2"]}))
    out = subprocess.run(
        [sys.executable, "-m", "lbmix", "classify", "--config", str(cfg), "--out", str(tmp_path)],
        capture_output=True, text=True,
    )
    assert out.returncode == 0 and '"Natural"' in out.stdout
