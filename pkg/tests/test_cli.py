import json

import numpy as np
import pytest

from spihtmark import corpus
from spihtmark.cli import main
from spihtmark.imageio import read_binary_watermark, read_image, write_binary_watermark, write_image


@pytest.fixture
def files(tmp_path):
    host = tmp_path / "host.pgm"
    wm = tmp_path / "wm.pgm"
    write_image(corpus.SYNTHETIC["fractal"](size=256, seed=2), host)
    write_binary_watermark(corpus.text_watermark(), wm)
    return tmp_path, host, wm


def run(argv, capsys):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_embed_then_extract_both_ways(files, capsys):
    d, host, wm = files
    code, out, _ = run(["embed", host, wm, "-o", d / "m.pgm", "--plan", d / "p.json"], capsys)
    assert code == 0
    info = json.loads(out)
    assert info["positions_per_band"] == 512 and info["psnr_db"] > 35

    code, out, _ = run(["extract", host, d / "m.pgm", "-o", d / "e1.pgm", "--plan", d / "p.json",
                        "--reference", wm, "--metrics", d / "r.json"], capsys)
    assert code == 0
    assert json.loads((d / "r.json").read_text())["correlation"] == pytest.approx(1.0)

    code, _, _ = run(["extract", host, d / "m.pgm", "-o", d / "e2.pgm", "--regenerate", "--shape", "32x32"], capsys)
    assert code == 0
    assert np.array_equal(read_binary_watermark(d / "e1.pgm"), read_binary_watermark(d / "e2.pgm"))
    assert np.array_equal(read_binary_watermark(d / "e1.pgm"), corpus.text_watermark())


def test_config_flags_reach_the_plan(files, capsys):
    d, host, wm = files
    code, _, _ = run(["embed", host, wm, "-o", d / "m.pgm", "--plan", d / "p.json",
                      "--alpha-lh2", "2", "--window", "2", "--filter-bank", "db2"], capsys)
    assert code == 0
    plan = json.loads((d / "p.json").read_text())
    assert plan["alpha"]["LH2"] == 2.0 and plan["nvf"]["window_halfwidth"] == 2
    assert plan["filter_bank"] == "db2"


def test_bad_host_dims_exit_2(tmp_path, capsys):
    write_image(np.zeros((500, 500), np.uint8), tmp_path / "h.pgm")
    write_binary_watermark(corpus.text_watermark(), tmp_path / "w.pgm")
    code, _, err = run(["--error-json", "embed", tmp_path / "h.pgm", tmp_path / "w.pgm",
                        "-o", tmp_path / "m.pgm", "--plan", tmp_path / "p.json"], capsys)
    assert code == 2
    payload = json.loads(err.strip().splitlines()[-1])
    assert payload["error"] == "DimensionError" and payload["exit_code"] == 2
    assert not (tmp_path / "m.pgm").exists()


def test_watermark_too_large_exit_2(files, capsys):
    d, host, _ = files
    write_binary_watermark(np.ones((256, 256), np.uint8), d / "big.pgm")
    code, _, err = run(["embed", host, d / "big.pgm", "-o", d / "m.pgm", "--plan", d / "p.json"], capsys)
    assert code == 2 and "coefficients" in err


def test_usage_and_missing_file(files, capsys):
    d, host, _ = files
    assert run(["frobnicate"], capsys)[0] == 1
    assert run(["embed", host], capsys)[0] == 1
    assert run(["metrics", host, d / "absent.pgm"], capsys)[0] == 2
    assert run(["extract", host, host, "-o", d / "x.pgm", "--plan", d / "absent.json"], capsys)[0] == 2


def test_attack_subcommands(files, capsys):
    d, host, _ = files
    code, out, _ = run(["attack", "jpeg", host, d / "j.pgm", "--quality", "50"], capsys)
    assert code == 0 and json.loads(out)["attack"] == {"kind": "jpeg", "params": {"quality": 50}}
    code, _, _ = run(["attack", "salt_pepper", host, d / "s.pgm", "--density", "0.05", "--seed", "3"], capsys)
    assert code == 0
    changed = (read_image(d / "s.pgm") != read_image(host)).sum()
    assert 0 < changed <= int(0.05 * 256 * 256)
    (d / "spec.json").write_text(json.dumps({"kind": "crop", "params": {"size": 64, "anchor": "center"}}))
    code, _, _ = run(["attack", "spec", host, d / "c.pgm", "--spec", "@" + str(d / "spec.json")], capsys)
    assert code == 0 and (read_image(d / "c.pgm") == 0).sum() >= 64 * 64
    assert run(["attack", "median_filter", host, d / "m.pgm", "--k", "4"], capsys)[0] == 2


def test_metrics_command(files, capsys):
    d, host, wm = files
    code, out, _ = run(["metrics", host, host], capsys)
    assert code == 0 and json.loads(out)["psnr_db"] == "inf"
    code, out, _ = run(["metrics", "--bits", wm, wm], capsys)
    assert json.loads(out)["correlation"] == pytest.approx(1.0)


def test_corpus_and_bench(tmp_path, capsys):
    code, out, _ = run(["corpus", tmp_path / "c", "--size", "128"], capsys)
    assert code == 0
    manifest = json.loads((tmp_path / "c" / "manifest.json").read_text())
    manifest["corpus"] = manifest["corpus"][:2]
    manifest["attacks"] = manifest["attacks"][:1]
    manifest["seeds"] = [0, 1]
    (tmp_path / "m.json").write_text(json.dumps(manifest))
    code, out, _ = run(["bench", tmp_path / "m.json", "--output-dir", tmp_path / "r", "--no-figures"], capsys)
    assert code == 0
    assert json.loads(out) == {"output_dir": str(tmp_path / "r"), "images": 2, "cells": 4, "failures": 0}
    assert (tmp_path / "r" / "report.json").exists()
    assert not (tmp_path / "r" / "figures").exists()
