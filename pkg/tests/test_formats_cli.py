import json
import math
import os
import re
from pathlib import Path

import numpy as np
import pytest

from hypcascade import cascade, formats, svg
from hypcascade.cascade import ModelParams
from hypcascade.cli import main

GOLDEN = Path(__file__).parent / "golden"
# set HYPCASCADE_REGEN_GOLDEN=1 to rewrite the golden files after an intended change
REGEN = os.environ.get("HYPCASCADE_REGEN_GOLDEN") == "1"

PLOT_ARGS = ["--c", "1", "--lambda", "2", "--t", "2", "--seed", "3", "--path-dt", "0.05", "--labels"]


def run_cli(tmp_path, *argv):
    out = tmp_path / "out"
    code = main([*argv, "--out", str(out)])
    return code, out


def golden_text(name, produced: str) -> str:
    path = GOLDEN / name
    if REGEN:
        path.write_text(produced, encoding="utf-8")
    return path.read_text(encoding="utf-8")


def assert_numeric_close(a, b, rel=1e-12):
    if isinstance(a, dict):
        assert a.keys() == b.keys()
        for k in a:
            assert_numeric_close(a[k], b[k], rel)
    elif isinstance(a, list):
        assert len(a) == len(b)
        for x, y in zip(a, b):
            assert_numeric_close(x, y, rel)
    elif isinstance(a, float):
        assert a == pytest.approx(b, rel=rel, abs=1e-300)
    else:
        assert a == b


# archives

def test_archive_round_trip(tmp_path):
    p = ModelParams(1.0, 2.0, 1.5, seed=9, reps=20, direction_policy="alt")
    archive = formats.RunArchive(p, tuple(cascade.simulate(p)), formats.created_stamp())
    path = tmp_path / "a.json"
    formats.save_archive(path, archive)
    back = formats.load_archive(path)
    assert back == archive
    assert formats.archive_to_json(back) == path.read_text()


def test_archive_with_overflowed_values(tmp_path):
    p = ModelParams(1.0, 0.01, 900.0, seed=1, reps=2)
    archive = formats.RunArchive(p, tuple(cascade.simulate(p)), "x")
    text = formats.archive_to_json(archive)
    doc = json.loads(text)
    assert doc["runs"][0]["cosh_eta_cm"] is None
    assert doc["runs"][0]["splinters"][0]["frame"] is None
    back = formats.archive_from_json(text)
    assert back.runs[0].cosh_eta_cm == math.inf
    assert back == archive


def test_archive_version_mismatch(tmp_path):
    doc = json.loads((GOLDEN / "runs_seed5.json").read_text())
    doc["format_version"] = 99
    with pytest.raises(formats.ArchiveVersionError, match="99"):
        formats.archive_from_json(json.dumps(doc))
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    assert main(["plot", "--archive", str(bad), "--out", str(tmp_path / "x.svg")]) == 2


def test_created_stamp(monkeypatch):
    monkeypatch.delenv("SOURCE_DATE_EPOCH", raising=False)
    assert formats.created_stamp() == "1970-01-01T00:00:00Z"
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "86400")
    assert formats.created_stamp("fixed") == "1970-01-02T00:00:00Z"
    assert re.fullmatch(r"\d{4}-\d\d-\d\dT\d\d:\d\d:\d\dZ", formats.created_stamp("now"))
    with pytest.raises(ValueError):
        formats.created_stamp("later")


def test_atomic_write_leaves_no_temp_files(tmp_path):
    path = tmp_path / "f.txt"
    formats.write_atomic(path, "one")
    formats.write_atomic(path, "two")
    assert path.read_text() == "two"
    assert [p.name for p in tmp_path.iterdir()] == ["f.txt"]


def test_csv_round_trip(tmp_path):
    rows = [(0.0, 1.0), (0.1, 1 / 3), (0.2, 2.0 ** -40)]
    path = tmp_path / "c.csv"
    formats.write_curve_csv(path, ["t", "v"], rows, ["c: 1.0", "note: x"])
    comments, cols, data = formats.read_curve_csv(path)
    assert comments == ["c: 1.0", "note: x"] and cols == ["t", "v"]
    assert data.tolist() == [list(r) for r in rows]


# cli

def test_cli_analyze_golden(tmp_path):
    code, out = run_cli(tmp_path, "analyze", "--c", "1", "--lambda", "2", "--t-max", "2", "--dt", "0.25")
    assert code == 0
    _, cols, data = formats.read_curve_csv(out)
    want = golden_text("analyze_c1_l2.csv", out.read_text())
    (tmp_path / "want.csv").write_text(want)
    _, wcols, wdata = formats.read_curve_csv(tmp_path / "want.csv")
    assert cols == wcols
    np.testing.assert_allclose(data, wdata, rtol=1e-13, atol=0)
    assert list(data[0]) == [0.0, 1.0, 0.0, 0.0, 1.0]


def test_cli_analyze_limit_annotation(tmp_path):
    code, out = run_cli(tmp_path, "analyze", "--c", "1", "--lambda", "3", "--t-max", "1", "--dt", "0.5")
    assert code == 0
    comments, _, data = formats.read_curve_csv(out)
    assert any("limit form" in line for line in comments)
    (tmp_path / "want.csv").write_text(golden_text("analyze_limit.csv", out.read_text()))
    np.testing.assert_allclose(data, formats.read_curve_csv(tmp_path / "want.csv")[2], rtol=1e-13, atol=0)
    code, out = run_cli(tmp_path, "analyze", "--c", "1", "--lambda", "2")
    assert not any("limit form" in line for line in formats.read_curve_csv(out)[0])


def test_cli_splinter(tmp_path):
    code, out = run_cli(tmp_path, "splinter", "--c", "1", "--lambda", "2", "--k", "2", "--t-max", "1", "--dt", "0.25")
    assert code == 0
    (tmp_path / "want.csv").write_text(golden_text("splinter_k2.csv", out.read_text()))
    np.testing.assert_allclose(formats.read_curve_csv(out)[2], formats.read_curve_csv(tmp_path / "want.csv")[2],
                               rtol=1e-12, atol=0)
    code, out = run_cli(tmp_path, "splinter", "--c", "0.5", "--k", "0", "--t-max", "2", "--dt", "0.5")
    _, _, data = formats.read_curve_csv(out)
    np.testing.assert_allclose(data[:, 1], np.cosh(0.5 * data[:, 0]), rtol=1e-15)


@pytest.mark.parametrize("argv", [
    ["analyze", "--c", "0"],
    ["analyze", "--dt", "0"],
    ["splinter", "--k", "-1"],
    ["simulate", "--lambda", "-1"],
    ["simulate", "--seed", "-3"],
    ["verify", "--reps", "10"],
    ["verify", "--suite", "nope"],
])
def test_cli_usage_errors(tmp_path, argv):
    with pytest.raises(SystemExit) as e:
        main([*argv, "--out", str(tmp_path / "o")])
    assert e.value.code == 2


def test_cli_simulate_golden_and_deterministic(tmp_path, capsys):
    args = ["simulate", "--c", "1", "--lambda", "2", "--t", "1", "--seed", "5", "--reps", "5"]
    outs = []
    for threads in ("1", "1", "3"):
        out = tmp_path / f"runs{len(outs)}.json"
        assert main([*args, "--threads", threads, "--out", str(out)]) == 0
        outs.append(out.read_bytes())
    assert outs[0] == outs[1] == outs[2]
    assert "mean cosh(eta_cm)" in capsys.readouterr().out
    want = json.loads(golden_text("runs_seed5.json", outs[0].decode()))
    assert_numeric_close(json.loads(outs[0]), want)


def test_cli_simulate_timestamp_now(tmp_path):
    out = tmp_path / "r.json"
    assert main(["simulate", "--reps", "2", "--timestamp", "now", "--out", str(out)]) == 0
    assert json.loads(out.read_text())["created"] != "1970-01-01T00:00:00Z"


def test_cli_verify_exit_codes(tmp_path):
    code, out = run_cli(tmp_path, "verify", "--suite", "limit3c")
    assert code == 0 and json.loads(out.read_text())["passed"]
    code, out = run_cli(tmp_path, "verify", "--suite", "limit3c", "--perturb", "1.01")
    assert code == 1 and not json.loads(out.read_text())["passed"]


@pytest.mark.parametrize("policy", ["random", "cw", "ccw", "alt"])
def test_cli_plot_golden(tmp_path, policy):
    out = tmp_path / "cascade.svg"
    assert main(["plot", *PLOT_ARGS, "--policy", policy, "--out", str(out)]) == 0
    for model in ("halfplane", "disk"):
        produced = (tmp_path / f"cascade_{model}.svg").read_text()
        assert produced == golden_text(f"cascade_{policy}_{model}.svg", produced)


def test_cli_plot_single_model_and_archive(tmp_path):
    out = tmp_path / "d.svg"
    assert main(["plot", *PLOT_ARGS, "--policy", "cw", "--model", "disk", "--out", str(out)]) == 0
    assert out.read_text() == (GOLDEN / "cascade_cw_disk.svg").read_text()
    runs = tmp_path / "runs.json"
    assert main(["simulate", "--c", "1", "--lambda", "2", "--t", "2", "--seed", "3", "--reps", "2",
                 "--policy", "cw", "--path-dt", "0.05", "--out", str(runs)]) == 0
    out2 = tmp_path / "e.svg"
    assert main(["plot", "--archive", str(runs), "--run", "0", "--labels", "--model", "disk", "--out", str(out2)]) == 0
    assert out2.read_text() == out.read_text()
    with pytest.raises(SystemExit):
        main(["plot", "--archive", str(runs), "--run", "5", "--out", str(out2)])


def _points(text):
    return [tuple(map(float, p.split(","))) for line in re.findall(r'points="([^"]*)"', text) for p in line.split()]


def test_plot_disk_points_inside_circle():
    text = (GOLDEN / "cascade_random_disk.svg").read_text()
    cx, cy, r = (float(v) for v in re.search(r'<circle cx="([\d.]+)" cy="([\d.]+)" r="([\d.]+)"', text).groups())
    assert all(math.hypot(x - cx, y - cy) <= r + 1e-3 for x, y in _points(text))


def test_plot_cw_ccw_are_mirror_images():
    cw = _points((GOLDEN / "cascade_cw_disk.svg").read_text())
    ccw = _points((GOLDEN / "cascade_ccw_disk.svg").read_text())
    assert len(cw) == len(ccw)
    for (x1, y1), (x2, y2) in zip(cw, ccw):
        assert x1 + x2 == pytest.approx(480, abs=2e-3) and y1 == pytest.approx(y2, abs=2e-3)


def test_svg_structure():
    text = svg.render_halfplane([np.array([[0.0, 1.0], [0.5, 0.8]])], [1.0], labels=True)
    assert text.startswith('<?xml version="1.0"') and text.endswith("</svg>\n")
    assert "<polyline" in text and ">1</text>" in text
    assert svg.mass_label(0.125) == "1/8"
