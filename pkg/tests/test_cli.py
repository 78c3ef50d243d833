import json

import pandas as pd
import pytest

from stochlab import __version__
from stochlab.main import EXIT_FAILED, EXIT_INVALID, EXIT_OK, build_parser, main
from stochlab.utils.io_utils import sha256_of_file

MIXED_TOML = """
seed = 3

[parrondo]
M = 3
p = [0.295, 0.62, 0.62]
t = 100
"""


def _config(tmp_path, text=MIXED_TOML):
    path = tmp_path / "run.toml"
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_parrondo_from_config(tmp_path, out_dir):
    assert main(["parrondo", "--config", _config(tmp_path), "--out-dir", str(out_dir)]) == EXIT_OK

    summary = json.loads((out_dir / "summary.json").read_text())
    assert summary["r"] == pytest.approx(0.005234741795, abs=1e-9)
    assert summary["parity_class"] == "odd"

    manifest = json.loads((out_dir / "manifest.json").read_text())
    assert manifest["version"] == __version__
    assert manifest["config"]["seed"] == 3
    assert manifest["config"]["params"]["t"] == 100
    for artifact in manifest["artifacts"]:
        assert artifact["sha256"] == sha256_of_file(out_dir / artifact["name"])
    assert {"pmf.csv", "rung_sum.csv", "summary.json"} <= {a["name"] for a in manifest["artifacts"]}


def test_flags_override_config(tmp_path, out_dir):
    argv = ["parrondo", "--config", _config(tmp_path), "--t", "10", "--out-dir", str(out_dir)]
    assert main(argv) == EXIT_OK
    assert json.loads((out_dir / "summary.json").read_text())["t"] == 10


def test_emit_filters_artifacts(out_dir):
    argv = ["parrondo", "--p", "0.6", "--t", "20", "--out-dir", str(out_dir), "--emit", "summary.json"]
    assert main(argv) == EXIT_OK
    names = sorted(path.name for path in out_dir.iterdir())
    assert names == ["manifest.json", "summary.json"]


def test_json_tables(out_dir):
    argv = ["parrondo", "--p", "0.6", "--t", "4", "--format", "json", "--out-dir", str(out_dir)]
    assert main(argv) == EXIT_OK
    records = json.loads((out_dir / "rung_sum.json").read_text())
    assert sum(r["mass"] for r in records) == pytest.approx(1.0)


def test_runs_are_deterministic(tmp_path):
    outputs = []
    for name in ("a", "b"):
        out = tmp_path / name
        argv = ["parrondo", "--history", "0.9,0.1,0.7,0.3", "--mc-steps", "200", "--seed", "5", "--out-dir", str(out)]
        assert main(argv) == EXIT_OK
        outputs.append((out / "summary.json").read_bytes())
    assert outputs[0] == outputs[1]


def test_envelope_command(out_dir):
    assert main(["envelope", "--t", "50", "--out-dir", str(out_dir)]) == EXIT_OK
    summary = json.loads((out_dir / "summary.json").read_text())
    assert summary["r"] == pytest.approx(1.45)
    assert summary["mean"] == pytest.approx(summary["predicted_mean"])
    capital = pd.read_csv(out_dir / "capital.csv")
    assert capital["mass"].sum() == pytest.approx(1.0)


def test_vol_command(ohlc_csv, out_dir):
    path = ohlc_csv(days=120, seed=1)
    assert main(["vol", "--input", str(path), "--window", "10", "--out-dir", str(out_dir)]) == EXIT_OK
    frame = pd.read_csv(out_dir / "volatility.csv")
    assert len(frame) == 120 - 10


def test_missing_input_is_invalid(tmp_path, out_dir):
    argv = ["vol", "--input", str(tmp_path / "missing.csv"), "--out-dir", str(out_dir)]
    assert main(argv) == EXIT_INVALID


def test_unknown_parameter_is_invalid(tmp_path, out_dir):
    config = _config(tmp_path, "[parrondo]\nM = 1\np = [0.6]\nbogus = 1\n")
    assert main(["parrondo", "--config", config, "--out-dir", str(out_dir)]) == EXIT_INVALID


def test_missing_config_is_invalid(tmp_path, out_dir):
    argv = ["parrondo", "--config", str(tmp_path / "nope.toml"), "--out-dir", str(out_dir)]
    assert main(argv) == EXIT_INVALID


def test_domain_error_is_invalid(out_dir):
    argv = ["parrondo", "--M", "3", "--p", "0.5,0.5", "--out-dir", str(out_dir)]
    assert main(argv) == EXIT_INVALID


def test_parser_requires_command():
    with pytest.raises(SystemExit):
        build_parser().parse_args([])


def test_selfcheck_passes(out_dir, capsys):
    assert main(["selfcheck", "--out-dir", str(out_dir)]) == EXIT_OK
    printed = capsys.readouterr().out
    assert "FAIL" not in printed
    assert "parrondo.rate_triangle" in printed
    summary = json.loads((out_dir / "summary.json").read_text())
    assert summary["failed"] == 0


def test_selfcheck_reports_failures(monkeypatch, out_dir):
    from stochlab import selfcheck

    def broken():
        raise RuntimeError("boom")

    monkeypatch.setattr(selfcheck, "CHECKS", [("broken", broken), ("ok", lambda: (True, ""))])
    assert main(["selfcheck", "--out-dir", str(out_dir)]) == EXIT_FAILED
    table = pd.read_csv(out_dir / "selfcheck.csv")
    assert list(table["passed"]) == [False, True]


def test_ladder_profile_table(tmp_path, out_dir):
    argv = ["parrondo", "--config", _config(tmp_path), "--profile-points", "9", "--out-dir", str(out_dir)]
    assert main(argv) == EXIT_OK
    profile = pd.read_csv(out_dir / "profile.csv")
    assert len(profile) == 9
    assert {"rung_0", "rung_1", "rung_2"} <= set(profile.columns)
    assert profile["x"].between(-1 / 3, 1 / 3).all()
