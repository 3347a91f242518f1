"""Robustness benchmark: embed, attack, extract and score over an image corpus.

A manifest (JSON) names the corpus, the watermark, the embedding config, the
attack grid and the seeds. Every image is embedded once; each
``(attack, seed)`` cell then attacks the watermarked image and extracts from
it with the saved plan. Stochastic attacks run once per seed, deterministic
ones once.

Outputs in ``output_dir``:

``report.json``
    manifest echo, config snapshot and hash, fidelity rows, every cell,
    aggregated tables. No timestamps, so identical manifests give identical
    bytes.
``fidelity.csv``, ``cells.csv``, ``table_<kind>.csv``
    the same data as delimited tables; ``table_<kind>.csv`` has one row per
    attack parameter and one mean-correlation column per image.
``figures/*.png``
    attack curves, fidelity bars, extracted watermarks.
``run_info.json``
    timestamp and library versions.
"""

from __future__ import annotations

import csv
import hashlib
import json
import logging
import math
import os
import platform
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__, codec, metrics
from .attacks import AttackSpec, apply_attack
from .corpus import resolve_image, resolve_watermark

log = logging.getLogger(__name__)

WORKERS_ENV = "SPIHTMARK_WORKERS"
REPORT_VERSION = 1

# Correlations published for the original scheme on Lena / Pepper / Pirate,
# keyed by attack label. Shown next to measured values; not a target.
PUBLISHED_REFERENCE = {
    "none": (1.0, 1.0, 1.0),
    "salt_pepper(density=0.01)": (0.9293, 0.9130, 0.9011),
    "salt_pepper(density=0.02)": (0.9121, 0.9040, 0.8960),
    "salt_pepper(density=0.03)": (0.8920, 0.8890, 0.8876),
    "gaussian_noise(variance=0.01)": (0.9439, 0.9345, 0.9566),
    "gaussian_noise(variance=0.02)": (0.9006, 0.9063, 0.8891),
    "gaussian_noise(variance=0.03)": (0.8775, 0.8179, 0.8118),
    "mean_filter(k=3)": (0.8717, 0.9456, 0.7995),
    "mean_filter(k=5)": (0.6151, 0.6227, 0.6151),
    "median_filter(k=3)": (0.9839, 0.9785, 0.9456),
    "median_filter(k=5)": (0.8075, 0.7861, 0.6668),
    "gaussian_filter(k=3)": (1.0, 1.0, 1.0),
    "gaussian_filter(k=5)": (1.0, 1.0, 1.0),
    "crop(size=64)": (0.9400, 1.0, 1.0),
    "crop(size=128)": (0.9233, 0.9946, 0.9785),
    "jpeg(quality=70)": (1.0, 1.0, 1.0),
    "jpeg(quality=50)": (1.0, 1.0, 1.0),
    "jpeg(quality=30)": (1.0, 1.0, 0.9946),
    "jpeg(quality=20)": (1.0, 1.0, 0.9785),
    "jpeg(quality=10)": (0.9566, 0.8361, 0.9120),
    "hist_eq": (0.9511, 0.9176, 0.9511),
    "contrast(percent=10)": (0.9893, 0.9893, 0.9839),
    "contrast(percent=20)": (0.9773, 0.9621, 0.9511),
    "contrast(percent=30)": (0.9533, 0.9421, 0.9120),
}
PUBLISHED_PSNR = {"Lena": 48.0429, "Pepper": 48.0624, "Pirate": 49.6520}


def published_reference(label):
    vals = PUBLISHED_REFERENCE.get(label)
    return None if vals is None else dict(zip(("Lena", "Pepper", "Pirate"), vals))


@dataclass
class BenchManifest:
    corpus: list
    watermark: str = "builtin:CUET"
    embed_config: dict = field(default_factory=dict)
    attacks: list = field(default_factory=list)
    seeds: list = field(default_factory=lambda: [0])
    output_dir: str = "bench-out"
    workers: int | None = None
    figures: bool = True

    def __post_init__(self):
        if not self.corpus:
            raise ValueError("manifest corpus is empty")
        if not self.seeds:
            raise ValueError("manifest needs at least one seed")
        self.attacks = [a if isinstance(a, AttackSpec) else AttackSpec.from_dict(a) for a in self.attacks]

    @classmethod
    def from_dict(cls, d):
        known = {"corpus", "watermark", "embed_config", "attacks", "seeds", "output_dir", "workers", "figures"}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown manifest keys {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self):
        return {
            "corpus": list(self.corpus),
            "watermark": self.watermark,
            "embed_config": self.embed_config,
            "attacks": [a.to_dict() for a in self.attacks],
            "seeds": list(self.seeds),
            "figures": self.figures,
        }


def config_hash(cfg):
    blob = json.dumps(cfg.to_dict(), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def image_id(source):
    if source.startswith(("synthetic:", "skimage:")):
        return source.split(":", 1)[1].replace(":", "-")
    return Path(source).stem


def row_label(spec):
    """Table row for a spec: its parameters, or the kind when it has none."""
    if not spec.params:
        return spec.kind
    return ",".join(f"{k}={spec.params[k]}" for k in sorted(spec.params))


def _finite(x):
    return None if x is None or not math.isfinite(x) else x


def _image_job(job):
    """Embed one image and run all of its cells. Runs in a worker process."""
    source, name, bits, cfg_dict, cells = job
    cfg = codec.EmbedConfig.from_dict(cfg_dict)
    chash = config_hash(cfg)
    out = {"image": name, "source": source, "cells": [], "extracted": {}}
    try:
        host = resolve_image(source)
        marked, plan = codec.embed(host, bits, cfg)
        clean = codec.extract(host, marked, plan)
    except Exception as exc:  # recorded, run continues
        out["fidelity"] = {"image": name, "status": "error", "error": f"{type(exc).__name__}: {exc}"}
        for spec in cells:
            out["cells"].append(_cell_record(name, spec, chash, error=out["fidelity"]["error"]))
        return out

    err = metrics.mse(host, marked)
    corr, degenerate = metrics.correlation_with_flag(bits, clean)
    out["fidelity"] = {
        "image": name, "status": "ok", "mse": err,
        "psnr_db": _finite(metrics.psnr_from_mse(err)),
        "correlation": corr, "degenerate_correlation": degenerate,
        "config_hash": chash,
    }
    out["extracted"]["none"] = clean.tolist()
    for spec in cells:
        try:
            attacked = apply_attack(marked, spec)
            got = codec.extract(host, attacked, plan)
            corr, degenerate = metrics.correlation_with_flag(bits, got)
            rec = _cell_record(name, spec, chash, correlation=corr, degenerate=degenerate,
                               attacked_psnr=_finite(metrics.psnr(marked, attacked)))
            out["extracted"].setdefault(spec.label(), got.tolist())
        except Exception as exc:
            rec = _cell_record(name, spec, chash, error=f"{type(exc).__name__}: {exc}")
        out["cells"].append(rec)
    return out


def _cell_record(name, spec, chash, correlation=None, degenerate=False, attacked_psnr=None, error=None):
    return {
        "image": name,
        "kind": spec.kind,
        "label": spec.label(),
        "row": row_label(spec),
        "attack": spec.to_dict(),
        "seed": spec.seed,
        "config_hash": chash,
        "status": "error" if error else "ok",
        "error": error,
        "correlation": correlation,
        "degenerate_correlation": degenerate,
        "attacked_psnr_db": attacked_psnr,
    }


def expand_cells(manifest):
    cells = []
    for spec in manifest.attacks:
        if spec.stochastic:
            cells.extend(spec.with_seed(s) for s in manifest.seeds)
        else:
            cells.append(spec.with_seed(None))
    return cells


def _worker_count(manifest):
    if manifest.workers is not None:
        return max(1, int(manifest.workers))
    env = os.environ.get(WORKERS_ENV)
    return max(1, int(env)) if env else 1


def aggregate(cells, images):
    """Per-kind tables: ``{kind: {"rows": [...], "mean": {img: {row: v}}, "min": ...}}``."""
    tables = {}
    for rec in cells:
        t = tables.setdefault(rec["kind"], {"rows": [], "labels": {}, "values": {}})
        if rec["row"] not in t["rows"]:
            t["rows"].append(rec["row"])
            t["labels"][rec["row"]] = rec["label"]
        if rec["status"] == "ok":
            t["values"].setdefault((rec["image"], rec["row"]), []).append(rec["correlation"])
    out = {}
    for kind, t in tables.items():
        mean = {img: {} for img in images}
        low = {img: {} for img in images}
        for (img, row), vals in t["values"].items():
            mean[img][row] = float(np.mean(vals))
            low[img][row] = float(np.min(vals))
        out[kind] = {
            "rows": t["rows"],
            "labels": t["labels"],
            "images": list(images),
            "mean": mean,
            "min": low,
            "published_reference": {
                row: published_reference(t["labels"][row]) for row in t["rows"]
                if published_reference(t["labels"][row]) is not None
            },
        }
    return out


def run_bench(manifest, output_dir=None, workers=None):
    """Run the benchmark and write all report files; returns the report dict."""
    if workers is not None:
        manifest.workers = workers
    out_dir = Path(output_dir or manifest.output_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    cfg = codec.EmbedConfig.from_dict(manifest.embed_config)
    bits = resolve_watermark(manifest.watermark)
    cells = expand_cells(manifest)
    names = []
    for source in manifest.corpus:
        name = image_id(source)
        base, k = name, 2
        while name in names:
            name = f"{base}_{k}"
            k += 1
        names.append(name)
    jobs = [(src, name, bits, cfg.to_dict(), cells) for src, name in zip(manifest.corpus, names)]

    n_workers = min(_worker_count(manifest), len(jobs))
    if n_workers > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            results = list(pool.map(_image_job, jobs))
    else:
        results = [_image_job(j) for j in jobs]

    fidelity = [r["fidelity"] for r in results]
    all_cells = [c for r in results for c in r["cells"]]
    tables = aggregate(all_cells, names)
    failures = sum(c["status"] == "error" for c in all_cells) + sum(f["status"] == "error" for f in fidelity)

    report = {
        "report_version": REPORT_VERSION,
        "package_version": __version__,
        "manifest": manifest.to_dict(),
        "config": cfg.to_dict(),
        "config_hash": config_hash(cfg),
        "watermark_shape": list(bits.shape),
        "images": names,
        "fidelity": fidelity,
        "published_psnr_db": PUBLISHED_PSNR,
        "cells": all_cells,
        "tables": tables,
        "failures": failures,
        "attack_definitions": {
            "gaussian_noise": "variance on [0,1] intensity scale; noise sd = sqrt(variance)*255",
            "contrast": "percent = total saturated range, split evenly between both ends",
            "crop": "square region zeroed at the given anchor (default top-left)",
            "gaussian_filter": "sigma 0.5 for 3x3, (k-1)/4 otherwise unless given",
        },
    }
    _write_json(out_dir / "report.json", report)
    _write_fidelity_csv(out_dir / "fidelity.csv", fidelity)
    _write_cells_csv(out_dir / "cells.csv", all_cells)
    for kind, table in tables.items():
        _write_table_csv(out_dir / f"table_{kind}.csv", table)
    if manifest.figures:
        _write_figures(out_dir / "figures", results, tables, bits)
    _write_json(out_dir / "run_info.json", {
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "python": platform.python_version(),
        "numpy": np.__version__,
        "workers": n_workers,
    })
    log.info("bench: %d images, %d cells, %d failures -> %s", len(names), len(all_cells), failures, out_dir)
    return report


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, float):
        return f"{v:.6f}"
    return str(v)


def _write_fidelity_csv(path, fidelity):
    cols = ["image", "status", "psnr_db", "mse", "correlation", "config_hash", "error"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for f in fidelity:
            w.writerow([_fmt(f.get(c)) for c in cols])


def _write_cells_csv(path, cells):
    cols = ["image", "kind", "label", "seed", "status", "correlation", "attacked_psnr_db", "config_hash", "error"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(cols)
        for c in cells:
            w.writerow([_fmt(c.get(k)) for k in cols])


def _write_table_csv(path, table):
    images = table["images"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["parameter"] + images + ["mean"])
        for row in table["rows"]:
            vals = [table["mean"][img].get(row) for img in images]
            ok = [v for v in vals if v is not None]
            w.writerow([row] + [_fmt(v) for v in vals] + [_fmt(float(np.mean(ok)) if ok else None)])


def _write_figures(fig_dir, results, tables, bits):
    from . import plotting

    fig_dir.mkdir(parents=True, exist_ok=True)
    ok = [r["fidelity"] for r in results if r["fidelity"]["status"] == "ok"]
    if ok:
        plotting.plot_fidelity([f["image"] for f in ok],
                               [f["psnr_db"] if f["psnr_db"] is not None else 99.0 for f in ok],
                               fig_dir / "fidelity.png")
    for kind, table in tables.items():
        plotting.plot_attack_curve(kind, table["rows"], table["images"], table["mean"],
                                   fig_dir / f"{kind}.png")
    for r in results:
        if not r["extracted"]:
            continue
        labels = list(r["extracted"])[:8]
        plotting.plot_watermarks(bits, [np.asarray(r["extracted"][k]) for k in labels], labels,
                                 fig_dir / f"extracted_{r['image']}.png")
