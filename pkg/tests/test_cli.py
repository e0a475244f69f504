import json
import subprocess
import sys
from pathlib import Path

import pytest

from hrmap.cli import main


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture(scope="module")
def data(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    for kind, extra in (("minjerk", []), ("planted", ["--noise", "0.0"]), ("rigid", ["--noise", "0.001"]),
                        ("features", []), ("demos", ["--length", "24"]), ("pnp", []), ("retarget", ["--length", "8"])):
        assert main(["synth", "--kind", kind, "--out", str(root / kind), *extra]) == 0
    assert main(["align", "--humans", str(root / "demos/humans"), "--robots", str(root / "demos/robots"),
                 "--out", str(root / "mapping.jsonl")]) == 0
    assert main(["retrieve", "--human", str(root / "planted/human.json"), "--robot", str(root / "planted/robot.json"),
                 "--out", str(root / "segments.jsonl")]) == 0
    return root


def commands(root, tmp):
    """Every subcommand with a small workload; outputs go to stdout or ``tmp``."""
    d, p = root / "demos", root / "planted"
    return {
        "align": ["align", "--humans", d / "humans", "--robots", d / "robots"],
        "align-visual": ["align", "--humans", d / "humans", "--robots", d / "robots", "--metric", "visual"],
        "retrieve": ["retrieve", "--human", p / "human.json", "--robot", p / "robot.json"],
        "retrieve-visual": ["retrieve", "--human", p / "human.json", "--robot", p / "robot.json",
                            "--metric", "visual", "--epsilon", "0.2"],
        "retrieve-eval": ["retrieve-eval", "--segments", root / "segments.jsonl", "--truth", p / "truth.json"],
        "mixup": ["mixup", "--epochs", "20", "--epochs-to-zero", "10"],
        "mixup-beta": ["mixup", "--schedule", "beta", "--epochs", "20", "--beta-a", "2"],
        "batch": ["batch", "--humans", d / "humans", "--robots", d / "robots", "--mapping", root / "mapping.jsonl",
                  "--batch-size", "8", "--k", "4", "--epochs", "2", "--schedule", "beta", "--out", tmp / "b.trjb"],
        "retarget": ["retarget", "--chain", root / "retarget/chain.json",
                     "--keypoints", root / "retarget/keypoints.jsonl", "--smooth", "0.1"],
        "sparc": ["sparc", "--input", root / "minjerk/minjerk.json"],
        "ad": ["ad", "--humans", d / "humans", "--robots", d / "robots"],
        "calibrate": ["calibrate", "--input", root / "rigid/points.csv"],
        "pnp": ["pnp", "--input", root / "pnp/problem.json"],
        "synth": ["synth", "--kind", "demos", "--out", tmp / "s", "--length", "10"],
    }


def snapshot(tmp):
    return {str(f.relative_to(tmp)): f.read_bytes() for f in sorted(tmp.rglob("*")) if f.is_file()}


@pytest.mark.parametrize("name", list(commands(Path("."), Path("."))))
def test_threads_and_repeats_byte_identical(name, data, tmp_path, capsys):
    results = []
    for i, threads in enumerate((1, 4, 1, 4)):
        tmp = tmp_path / str(i)
        tmp.mkdir()
        code, out, err = run([*commands(data, tmp)[name], "--threads", threads, "--seed", 3], capsys)
        assert code == 0, err
        results.append((out, snapshot(tmp)))
    assert all(r == results[0] for r in results[1:])
    assert results[0][0] or results[0][1]


def test_align_output_schema(data, capsys):
    code, out, _ = run(commands(data, data)["align"], capsys)
    assert code == 0
    seen = set()
    for line in out.splitlines():
        rec = json.loads(line)
        assert set(rec) == {"human_demo", "t", "pairs"} and rec["pairs"]
        assert all(set(p) == {"robot_demo", "t_prime"} for p in rec["pairs"])
        seen.add((rec["human_demo"], rec["t"]))
    humans = sorted(f.stem for f in (data / "demos/humans").glob("*.json"))
    for h in humans:
        n = len(json.loads((data / "demos/humans" / f"{h}.json").read_text())["frames"])
        assert all((h, t) in seen for t in range(n))


def test_retrieve_planted_perfect(data, capsys):
    code, out, _ = run(commands(data, data)["retrieve-eval"], capsys)
    assert code == 0
    assert out.splitlines() == ["miou,acc_at_0.5", "1.0,1.0"]


def test_calibrate_and_pnp_recover_truth(data, capsys):
    import numpy as np

    _, out, _ = run(commands(data, data)["pnp"], capsys)
    got = json.loads(out)
    truth = json.loads((data / "pnp/truth.json").read_text())
    assert got["rmse_px"] < 1e-6
    assert np.allclose(got["translation"], truth["translation"], atol=1e-8)
    _, out, _ = run(commands(data, data)["calibrate"], capsys)
    truth = json.loads((data / "rigid/truth.json").read_text())
    assert np.allclose(json.loads(out)["translation"], truth["translation"], atol=1e-2)


def test_mixup_schedule_table(capsys):
    code, out, _ = run(["mixup", "--epochs", "4", "--epochs-to-zero", "2"], capsys)
    assert code == 0
    assert out.splitlines() == ["epoch,alpha", "0,1.0", "1,0.5", "2,0.0", "3,0.0"]


def test_help_lists_defaults(capsys):
    code, out, _ = run(["retrieve", "--help"], capsys)
    out = " ".join(out.split())
    assert code == 0
    assert "default: 32" in out and "default: 0.06" in out
    code, out, _ = run(["--help"], capsys)
    assert code == 0 and "retarget" in out


def test_exit_codes(data, tmp_path, capsys):
    assert run(["bogus"], capsys)[0] == 1
    assert run(["sparc", "--input", data / "minjerk/minjerk.json", "--nope"], capsys)[0] == 1
    assert run(["sparc"], capsys)[0] == 1
    code, _, err = run(["sparc", "--input", tmp_path / "missing.json"], capsys)
    assert code == 2 and "missing.json" in err
    bad = tmp_path / "bad.json"
    bad.write_text('{"frames": []}')
    code, _, err = run(["sparc", "--input", bad], capsys)
    assert code == 1 and err.startswith("hrmap: error:") and err.count("\n") == 1
    assert run(["mixup", "--threads", "0"], capsys)[0] == 1


def test_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"epochs_to_zero": 2, "epochs": 3}))
    _, out, _ = run(["mixup", "--config", cfg], capsys)
    assert out.splitlines()[1:] == ["0,1.0", "1,0.5", "2,0.0"]
    _, out, _ = run(["mixup", "--config", cfg, "--epochs-to-zero", "4"], capsys)
    assert out.splitlines()[1:] == ["0,1.0", "1,0.75", "2,0.5"]
    cfg.write_text(json.dumps({"no_such_option": 1}))
    assert run(["mixup", "--config", cfg], capsys)[0] == 1


def test_entry_point_subprocess(tmp_path):
    res = subprocess.run([sys.executable, "-m", "hrmap.cli", "mixup", "--epochs", "2"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0 and res.stdout.startswith("epoch,alpha")
