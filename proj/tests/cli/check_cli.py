"""Exit codes and artifacts of the homoglab command line."""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

BIN = sys.argv[1]


def run(*args):
    return subprocess.run([BIN, *map(str, args)], capture_output=True, text=True)


def write(tmp, name, doc):
    path = Path(tmp) / name
    path.write_text(json.dumps(doc))
    return path


def expect(cond, what):
    if not cond:
        raise SystemExit(f"FAILED: {what}")
    print(f"ok: {what}")


with tempfile.TemporaryDirectory() as tmp:
    bad = write(tmp, "bad.json", {"scenario": "LocalInHoles", "n_list": [4, 2]})
    r = run("run", bad, "--out", Path(tmp) / "bad")
    err = json.loads(r.stderr.strip().splitlines()[-1])
    expect(r.returncode == 2 and err["message"] == "n-list not increasing", "n-list [4,2] -> exit 2")

    expect(run("run", Path(tmp) / "missing.json").returncode == 2, "missing config -> exit 2")
    (Path(tmp) / "garbage.json").write_text("{ not json")
    expect(run("run", Path(tmp) / "garbage.json").returncode == 2, "unparsable config -> exit 2")

    empty = Path(tmp) / "empty"
    empty.mkdir()
    r = run("report", empty)
    expect(r.returncode == 2 and "missing manifest" in r.stderr, "report on empty dir -> missing manifest")

    r = run("cell", "--hole", "none", "--grid", "16")
    q = json.loads(r.stdout)["q"]
    expect(r.returncode == 0 and abs(q[0][0] - 1) < 1e-10 and abs(q[0][1]) < 1e-10, "cell without hole gives q = I")
    r = run("cell", "--hole", "C=0.5", "--grid", "64")
    t = json.loads(r.stdout)
    expect(r.returncode == 0 and abs(t["q"][0][0] - t["q"][1][1]) < 1e-8, "disk cell tensor is isotropic")
    expect(run("cell", "--hole", "C=1.2").returncode == 2, "oversized hole -> exit 2")

    cell_cfg = write(tmp, "cell.json", {"scenario": "CellOnly", "hole": "none", "cell_grid": 16})
    r = run("run", cell_cfg, "--out", Path(tmp) / "cell")
    expect(r.returncode == 0 and "PASS no_hole_tensor_is_identity" in r.stdout, "CellOnly no hole -> q == I passes")

    strips = write(tmp, "strips.json", {"scenario": "Strips", "hole": "none", "n_list": [2, 3], "strip_grid": 32})
    out_a, out_b = Path(tmp) / "sa", Path(tmp) / "sb"
    expect(run("run", strips, "--out", out_a, "--jobs", "2").returncode == 0, "strips sweep -> exit 0")
    run("run", strips, "--out", out_b, "--jobs", "1")
    for name in ("sweep.csv", "verdicts.json", "limit_n3_u.f64"):
        expect((out_a / name).read_bytes() == (out_b / name).read_bytes(), f"{name} identical across runs")
    ma = json.loads((out_a / "manifest.json").read_text())
    mb = json.loads((out_b / "manifest.json").read_text())
    expect(ma["determinism_hash"] == mb["determinism_hash"], "determinism hash identical")
    csv = (out_a / "sweep.csv").read_bytes()
    expect(b"\r" not in csv and csv.count(b"\n") == 3, "CSV has a header, 2 rows, LF endings")

    expect(run("report", out_a).returncode == 0, "report exits 0")
    first = (out_a / "summary.txt").read_bytes()
    run("report", out_a)
    expect((out_a / "summary.txt").read_bytes() == first, "report is idempotent")
    expect((out_a / "plot_moment_max.dat").exists(), "plot data written")

    slow = write(tmp, "slow.json", {"scenario": "Strips", "hole": "none", "n_list": [2], "strip_grid": 32,
                                    "solver": {"max_iter": 2}})
    r = run("run", slow, "--out", Path(tmp) / "slow")
    err = json.loads(r.stderr.strip().splitlines()[-1])
    expect(r.returncode == 3 and err["error"] == "NonConvergence" and err["residual_history"], "max_iter 2 -> exit 3")

    holes = write(tmp, "holes.json", {"scenario": "LocalInHoles", "n_list": [2, 4, 8], "spectral": False})
    r = run("run", holes, "--out", Path(tmp) / "holes")
    err = json.loads(r.stderr.strip().splitlines()[-1])
    expect(r.returncode in (0, 1) and (r.returncode == 0) == (err.get("error") != "VerdictFailure"),
           f"LocalInHoles sweep exit code matches verdicts ({r.returncode})")

print("all CLI checks passed")
