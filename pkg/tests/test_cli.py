import csv
import json
import subprocess
import sys

import pytest

from spectral_ht.cli import main

from test_harness import make_instance_file


def write_json(path, obj):
    path.write_text(json.dumps(obj))
    return path


def read_csv(path, drop=("wall_ms",)):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    keep = [i for i, h in enumerate(rows[0]) if h not in drop]
    return [[r[i] for i in keep] for r in rows]


def test_convergence_refuses_existing_output(tmp_path, capsys):
    cfg = write_json(tmp_path / "c.json", {"n": 31, "m": 31, "k": 1})
    out = tmp_path / "trace.csv"
    out.write_text("keep me")
    assert main(["convergence", "--config", str(cfg), "--out", str(out)]) == 1
    assert out.read_text() == "keep me"
    assert "OutputExists" in capsys.readouterr().err
    assert main(["convergence", "--config", str(cfg), "--out", str(out), "--force"]) == 0
    assert read_csv(out)[0] == ["iter", "nmse", "hhat", "grad_norm_sq"]


def test_phase_csv_deterministic(tmp_path):
    cfg = write_json(tmp_path / "p.json", {"n": 16, "m": [8, 16], "k": [1, 3], "trials": 2,
                                           "skip_infeasible": True, "solver": {"max_iter": 100}})
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["phase", "--config", str(cfg), "--out", str(a)]) == 0
    assert main(["phase", "--config", str(cfg), "--out", str(b), "--threads", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()
    header = read_csv(a)[0]
    assert header == ["m", "k", "success_rate", "mean_iters", "skipped"]


def test_timing_empty_grid(tmp_path):
    cfg = write_json(tmp_path / "t.json", {"n": []})
    out = tmp_path / "t.csv"
    assert main(["timing", "--config", str(cfg), "--out", str(out)]) == 1
    assert not out.exists()


def test_solve_exit_codes(tmp_path):
    src = tmp_path / "obs.json"
    make_instance_file(src)
    out = tmp_path / "rec.json"
    assert main(["solve", "--input", str(src), "--out", str(out)]) == 0
    recovered = json.loads(out.read_text())
    assert len(recovered) == 40 and all(len(v) == 2 for v in recovered)
    trace = read_csv(tmp_path / "rec.trace.csv")
    assert trace[0][:3] == ["iter", "h", "hhat"]
    cfg = write_json(tmp_path / "s.json", {"solver": {"max_iter": 1}})
    assert main(["solve", "--config", str(cfg), "--input", str(src), "--out", str(out), "--force"]) == 2
    assert main(["solve", "--config", str(cfg), "--input", str(src), "--out", str(out)]) == 1


def test_solve_stall_exit_code(tmp_path):
    src = tmp_path / "obs.json"
    make_instance_file(src)
    cfg = write_json(tmp_path / "s.json", {"solver": {"max_backtracks": 0, "armijo_C": 0.999999}})
    code = main(["solve", "--config", str(cfg), "--input", str(src), "--out", str(tmp_path / "r.json")])
    assert code in (0, 3)


@pytest.mark.parametrize(
    "payload, message",
    [
        ({"n": 5, "omega": [0, 2], "observed": [[1, 0], [0, 1]], "k": 1}, "BadIndex"),
        ({"n": 5, "omega": [1, 2], "observed": [[1, 0], [0, 1]], "k": 3}, "SparsityTooLarge"),
    ],
)
def test_solve_input_errors(tmp_path, capsys, payload, message):
    src = write_json(tmp_path / "obs.json", payload)
    assert main(["solve", "--input", str(src), "--out", str(tmp_path / "r.json")]) == 1
    assert message in capsys.readouterr().err


def test_console_script_entry_point(tmp_path):
    cfg = write_json(tmp_path / "c.json", {"n": 15, "m": 15, "k": 1})
    out = tmp_path / "c.csv"
    proc = subprocess.run(
        [sys.executable, "-m", "spectral_ht.cli", "convergence", "--config", str(cfg), "--out", str(out)],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0, proc.stderr
    assert out.exists()
