import csv
import json

import pytest

from spihtmark import corpus
from spihtmark.attacks import AttackSpec
from spihtmark.bench import BenchManifest, aggregate, expand_cells, run_bench
from spihtmark.imageio import write_image


@pytest.fixture(scope="module")
def small_corpus(tmp_path_factory):
    d = tmp_path_factory.mktemp("corpus")
    paths = []
    for i, name in enumerate(("fractal", "noise", "ramp")):
        p = d / f"{name}.pgm"
        write_image(corpus.SYNTHETIC[name](size=128, seed=i) if name != "ramp"
                    else corpus.SYNTHETIC[name](size=128), p)
        paths.append(str(p))
    return paths


def grid(paths, **kw):
    d = {
        "corpus": paths,
        "attacks": [{"kind": "salt_pepper", "params": {"density": x}} for x in (0.01, 0.02, 0.03)],
        "seeds": [0, 1, 2, 3, 4],
        "figures": False,
    }
    d.update(kw)
    return BenchManifest.from_dict(d)


def test_cell_count(small_corpus, tmp_path):
    report = run_bench(grid(small_corpus), tmp_path)
    assert len(report["cells"]) == 45
    assert report["failures"] == 0
    rows = list(csv.DictReader(open(tmp_path / "cells.csv")))
    assert len(rows) == 45
    table = list(csv.reader(open(tmp_path / "table_salt_pepper.csv")))
    assert len(table) == 4


def test_deterministic_attacks_run_once(small_corpus):
    m = grid(small_corpus, attacks=[{"kind": "jpeg", "params": {"quality": 50}},
                                    {"kind": "gaussian_noise", "params": {"variance": 0.01}}])
    cells = expand_cells(m)
    assert [c.seed for c in cells] == [None, 0, 1, 2, 3, 4]


def test_empty_grid_is_fidelity_only(small_corpus, tmp_path):
    report = run_bench(grid(small_corpus, attacks=[]), tmp_path)
    assert report["cells"] == [] and report["tables"] == {}
    assert [f["status"] for f in report["fidelity"]] == ["ok"] * 3
    assert all(f["correlation"] == 1.0 for f in report["fidelity"])


def test_bad_image_recorded_and_run_continues(small_corpus, tmp_path):
    bad = tmp_path / "bad.pgm"
    bad.write_bytes(b"P5\n100 100\n255\n" + bytes(10000))
    report = run_bench(grid([small_corpus[0], str(bad)]), tmp_path / "out")
    fid = {f["image"]: f for f in report["fidelity"]}
    assert fid["bad"]["status"] == "error" and "DimensionError" in fid["bad"]["error"]
    assert fid["fractal"]["status"] == "ok"
    assert report["failures"] == 1 + 15
    ok = [c for c in report["cells"] if c["status"] == "ok"]
    assert len(ok) == 15


def test_workers_do_not_change_output(small_corpus, tmp_path):
    m = grid(small_corpus, seeds=[0, 1], figures=True,
             attacks=[{"kind": "jpeg", "params": {"quality": 30}}, {"kind": "salt_pepper", "params": {"density": 0.02}}])
    run_bench(m, tmp_path / "a", workers=1)
    run_bench(m, tmp_path / "b", workers=3)
    for rel in ("report.json", "cells.csv", "fidelity.csv", "table_jpeg.csv"):
        assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()
    figs = sorted(p.name for p in (tmp_path / "a" / "figures").iterdir())
    assert figs
    for name in figs:
        assert (tmp_path / "a" / "figures" / name).read_bytes() == (tmp_path / "b" / "figures" / name).read_bytes()
    info = json.loads((tmp_path / "b" / "run_info.json").read_text())
    assert info["workers"] == 3 and "timestamp" in info


def test_aggregate_mean_and_min():
    cells = [
        {"kind": "k", "row": "r", "label": "k(r)", "image": "a", "status": "ok", "correlation": c}
        for c in (0.5, 1.0)
    ]
    t = aggregate(cells, ["a"])["k"]
    assert t["mean"]["a"]["r"] == 0.75 and t["min"]["a"]["r"] == 0.5


def test_manifest_validation():
    with pytest.raises(ValueError):
        BenchManifest.from_dict({"corpus": ["x"], "bogus": 1})
    with pytest.raises(ValueError):
        BenchManifest.from_dict({"corpus": []})
    with pytest.raises(ValueError):
        BenchManifest.from_dict({"corpus": ["x"], "attacks": [{"kind": "nope"}]})
    m = BenchManifest.from_dict({"corpus": ["x"], "attacks": [{"kind": "hist_eq"}]})
    assert m.attacks == [AttackSpec("hist_eq")]
