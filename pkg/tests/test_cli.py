import csv
import json
from pathlib import Path

import numpy as np
import pytest

from symterp.cli import main
from symterp.harness import branch_plan
from symterp.imaging import Symmetrizer, read_png
from symterp.metrics import symmetry_score

SMALL = ["--data-count", "8", "--steps", "10"]


def snapshot(directory):
    return {p.relative_to(directory).as_posix(): p.read_bytes() for p in sorted(Path(directory).rglob("*")) if p.is_file()}


@pytest.fixture(scope="module")
def data(tmp_path_factory):
    out = tmp_path_factory.mktemp("cli") / "data"
    assert main(["dataset", "--count", "6", "--seed", "7", "--asymmetry", "0", "0.3", "--out", str(out)]) == 0
    return out


def test_dataset_outputs(data):
    manifest = json.loads((data / "manifest.json").read_text())
    assert len(manifest["entries"]) == 6
    assert len(list(data.glob("*.png"))) == 6


def test_dataset_hundred_into_new_dir(tmp_path):
    out = tmp_path / "deep" / "missing"
    assert main(["dataset", "--count", "100", "--seed", "7", "--out", str(out)]) == 0
    assert len(list(out.glob("*.png"))) == 100


def test_interpolate(data, tmp_path):
    out = tmp_path / "run"
    args = ["interpolate", str(data / "wheel_00000.png"), str(data / "wheel_00001.png")]
    assert main(args + ["--symmetrizer", "ra", "--w", "0.25", "--alpha", "0.5", "--data-count", "8", "--out", str(out)]) == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert len(manifest["trace"]) == 50
    assert read_png(out / "triptych.png").shape == (64, 3 * 64 + 4, 1)


def test_interpolate_no_symmetrizer(data, tmp_path):
    args = ["interpolate", str(data / "wheel_00000.png"), str(data / "wheel_00001.png"), "--symmetrizer", "none"]
    assert main(args + SMALL + ["--out", str(tmp_path)]) == 0
    trace = json.loads((tmp_path / "manifest.json").read_text())["trace"]
    assert trace and all(e["lam"] == 0.0 for e in trace)


def test_interpolate_end_only(data, tmp_path):
    args = ["interpolate", str(data / "wheel_00002.png"), str(data / "wheel_00003.png")]
    assert main(args + ["--mode", "end-only", "--symmetrizer", "ra"] + SMALL + ["--out", str(tmp_path)]) == 0
    img = read_png(tmp_path / "result.png")
    assert symmetry_score(img, Symmetrizer("ra", 6)) >= 0.98


def test_interpolate_size_mismatch(data, tmp_path):
    from symterp.imaging import write_png

    write_png(tmp_path / "small.png", np.zeros((32, 32, 1)))
    args = ["interpolate", str(data / "wheel_00000.png"), str(tmp_path / "small.png"), "--out", str(tmp_path / "o")]
    assert main(args) == 1


def test_branch(tmp_path):
    assert main(["branch", "--pairs", "2", "--depth", "2"] + SMALL + ["--out", str(tmp_path)]) == 0
    lineage = json.loads((tmp_path / "lineage.json").read_text())
    assert lineage["n_images"] == 6 == len(list(tmp_path.glob("*.png")))
    assert {n["split"] for n in lineage["nodes"]} <= {"val", "test"}


def test_branch_base_case():
    assert len(branch_plan(1, 1)) == 1
    assert len(branch_plan(380, 4)) == 5700


def test_branch_pair_file(data, tmp_path):
    pf = tmp_path / "pairs.json"
    pf.write_text(json.dumps([[str(data / "wheel_00000.png"), str(data / "wheel_00004.png")]]))
    assert main(["branch", "--pair-file", str(pf), "--depth", "1"] + SMALL + ["--out", str(tmp_path / "b")]) == 0
    assert len(list((tmp_path / "b").glob("*.png"))) == 1


def test_sweep_rows(tmp_path):
    args = ["sweep", "--pairs", "3", "--w-values", "0.1", "0.25", "0.35", "0.5"] + SMALL + ["--out", str(tmp_path)]
    assert main(args) == 0
    with (tmp_path / "sweep.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    assert [float(r["w"]) for r in rows] == [0.1, 0.25, 0.35, 0.5]


def test_ablate(tmp_path):
    assert main(["ablate", "--pairs", "2"] + SMALL + ["--out", str(tmp_path)]) == 0
    m = json.loads((tmp_path / "ablation.json").read_text())
    assert set(m["variants"]) == {"similarity_decay", "no_similarity", "no_decay", "end_only", "off"}
    assert m["decay_ratio_at_last_step"] == pytest.approx(10.0)


def test_eval_self(data, tmp_path):
    assert main(["eval", str(data), str(data), "--out", str(tmp_path)]) == 0
    m = json.loads((tmp_path / "metrics.json").read_text())
    assert m["frechet_distance"] <= 1e-6
    assert m["n_generated"] == 6


def test_eval_symmetric_corpus(tmp_path):
    assert main(["dataset", "--count", "20", "--seed", "1", "--asymmetry", "0", "0", "--out", str(tmp_path / "d")]) == 0
    assert main(["eval", str(tmp_path / "d"), str(tmp_path / "d"), "--out", str(tmp_path / "m")]) == 0
    assert json.loads((tmp_path / "m" / "metrics.json").read_text())["mean_sym_ra"] >= 0.98


def test_eval_empty_dir(tmp_path, capsys):
    (tmp_path / "empty").mkdir()
    assert main(["eval", str(tmp_path / "empty"), str(tmp_path / "empty"), "--out", str(tmp_path / "m")]) == 1
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and "error" in err[0]


def test_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"data_count": 8, "steps": 10, "pairs": 1, "depth": 1}))
    assert main(["branch", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    lineage = json.loads((tmp_path / "o" / "lineage.json").read_text())
    assert lineage["config"]["steps"] == 10


def test_config_unknown_key(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"stepz": 10}))
    assert main(["branch", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 1


def test_repeat_is_byte_identical(data, tmp_path):
    args = ["interpolate", str(data / "wheel_00000.png"), str(data / "wheel_00005.png")] + SMALL
    assert main(args + ["--out", str(tmp_path / "r1")]) == 0
    assert main(args + ["--out", str(tmp_path / "r2")]) == 0
    assert snapshot(tmp_path / "r1") == snapshot(tmp_path / "r2")
