import csv
import json
import math
import shutil
from pathlib import Path

import pytest

from qfourier.cli import main

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def run(*argv):
    return main([str(a) for a in argv])


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_simulate_and_manifest(tmp_path):
    out = tmp_path / "sim"
    assert run("simulate", "--config", CONFIGS / "white_noise.yaml", "--out", out, "--set", "simulate.n=100") == 0
    rows = read_csv(out / "trajectory.csv")
    assert len(rows) == 100 and rows[0]["k"] == "1"
    man = json.loads((out / "manifest.json").read_text())
    assert man["command"] == "simulate"
    assert man["seed"] == 7
    assert man["config"]["simulate"]["n"] == 100
    assert man["overrides"] == [{"field": "simulate.n", "value": 100}]
    assert [o["path"] for o in man["outputs"]] == ["trajectory.csv"]
    assert len(man["outputs"][0]["sha256"]) == 64


def test_seed_override_changes_output(tmp_path):
    cfg = CONFIGS / "white_noise.yaml"
    run("simulate", "--config", cfg, "--out", tmp_path / "a", "--set", "simulate.n=20")
    run("simulate", "--config", cfg, "--out", tmp_path / "b", "--set", "simulate.n=20", "--seed", 8)
    assert (tmp_path / "a" / "trajectory.csv").read_text() != (tmp_path / "b" / "trajectory.csv").read_text()


def test_bad_kernel_reports_line(tmp_path, capsys):
    code = run("simulate", "--config", CONFIGS / "bad_kernel.yaml", "--out", tmp_path)
    err = capsys.readouterr().err
    assert code == 2
    assert "bad_kernel.yaml:6:" in err and "row 1" in err


def test_malformed_yaml(tmp_path, capsys):
    cfg = tmp_path / "broken.yaml"
    cfg.write_text("seed: 1\nprocess: [unclosed\n")
    assert run("simulate", "--config", cfg, "--out", tmp_path / "o") == 2
    assert "broken.yaml" in capsys.readouterr().err


def test_bad_override(tmp_path, capsys):
    code = run("simulate", "--config", CONFIGS / "ar1.yaml", "--out", tmp_path, "--set", "simulate.n=abc")
    assert code == 2
    assert "must be an integer" in capsys.readouterr().err


def test_excluded_frequency_refused(tmp_path, capsys):
    code = run("quenched", "--config", CONFIGS / "ar1.yaml", "--out", tmp_path, "--frequencies", repr(math.pi))
    assert code == 2
    assert "excluded" in capsys.readouterr().err


def test_periodogram_of_stored_impulse(tmp_path):
    cfg_dir = tmp_path / "cfg"
    cfg_dir.mkdir()
    shutil.copy(CONFIGS / "impulse.yaml", cfg_dir)
    shutil.copy(CONFIGS / "impulse.csv", cfg_dir)
    out = tmp_path / "imp"
    assert run("periodogram", "--config", cfg_dir / "impulse.yaml", "--out", out) == 0
    rows = read_csv(out / "periodogram.csv")
    assert len(rows) == 7
    for r in rows:
        assert float(r["I"]) == pytest.approx(1 / (16 * math.pi), rel=1e-12)


def test_long_memory_conditions_out_of_scope(tmp_path):
    out = tmp_path / "lrd"
    assert run("conditions", "--config", CONFIGS / "long_memory.yaml", "--out", out) == 0
    rows = read_csv(out / "variance_divergence.csv")
    assert [r["n"] for r in rows] == ["256", "1024", "4096"]
    assert float(rows[-1]["ratio"]) == pytest.approx(4**0.6, rel=0.15)
    man = json.loads((out / "manifest.json").read_text())
    assert man["flags"] == {"variance_divergence_exhibited": True}


def test_martingale_and_replay(tmp_path, capsys):
    out = tmp_path / "mg"
    cfg = tmp_path / "chain.yaml"
    cfg.write_text((CONFIGS / "three_state.yaml").read_text().replace("ns: [256, 1024, 4096]", "ns: [128, 512]"))
    assert run("martingale", "--config", cfg, "--out", out, "--set", "martingale.R=200") == 0
    rows = read_csv(out / "gap.csv")
    assert [r["n"] for r in rows] == ["128", "512"]
    assert run("replay", out / "manifest.json", "--out", tmp_path / "again") == 0
    assert "byte-for-byte" in capsys.readouterr().out
    for name in ("gap.csv", "report.json"):
        assert (out / name).read_bytes() == (tmp_path / "again" / name).read_bytes()


def test_replay_detects_tampering(tmp_path):
    out = tmp_path / "sim"
    run("simulate", "--config", CONFIGS / "white_noise.yaml", "--out", out, "--set", "simulate.n=10")
    man_path = out / "manifest.json"
    man = json.loads(man_path.read_text())
    man["outputs"][0]["sha256"] = "0" * 64
    man_path.write_text(json.dumps(man))
    assert run("replay", man_path, "--out", tmp_path / "again") == 1


def test_failures_file_and_exit_code(tmp_path):
    out = tmp_path / "q"
    code = run(
        "quenched", "--config", CONFIGS / "ar1.yaml", "--out", out,
        "--set", "quenched.n=128", "--set", "quenched.R=100", "--set", "quenched.tolerances.ks=0.0",
    )
    assert code == 1
    failures = json.loads((out / "failures.json").read_text())
    assert any("ks" in f for f in failures["failures"])
