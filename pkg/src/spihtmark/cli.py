"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 data error (bad image, plan,
dimensions, capacity, parameters), 3 internal error. With ``--error-json`` a
failure also prints ``{"error": ..., "message": ..., "exit_code": ...}`` on
stderr.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__, attacks, codec, corpus, metrics
from .bench import BenchManifest, run_bench
from .errors import WatermarkError
from .imageio import read_binary_watermark, read_image, write_binary_watermark, write_image
from .nvf import NvfConfig, QuantMatrix

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _shape(text):
    try:
        p, q = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected PxQ, got {text!r}") from None
    return p, q


def _add_config_flags(p):
    g = p.add_argument_group("embedding config")
    g.add_argument("--config", help="JSON file with an embedding config")
    g.add_argument("--alpha-lh2", type=float, help="scaling factor for LH2 (default 3)")
    g.add_argument("--alpha-hl2", type=float, help="scaling factor for HL2 (default 1)")
    g.add_argument("--window", type=int, help="NVF window half-width L (default 1)")
    g.add_argument("--flat-strength", type=float, help="distortion s1 in flat regions (default 3)")
    g.add_argument("--filter-bank", help="wavelet filter bank: haar (default) or db2")
    g.add_argument("--quant-matrix", help="JSON file with a 4x4 quantization matrix")


def _config_from_args(args):
    d = {}
    if args.config:
        d = json.loads(Path(args.config).read_text())
    cfg = codec.EmbedConfig.from_dict(d)
    alpha = dict(cfg.alpha)
    if args.alpha_lh2 is not None:
        alpha["LH2"] = args.alpha_lh2
    if args.alpha_hl2 is not None:
        alpha["HL2"] = args.alpha_hl2
    nvf = NvfConfig(
        window_halfwidth=args.window if args.window is not None else cfg.nvf.window_halfwidth,
        flat_strength=args.flat_strength if args.flat_strength is not None else cfg.nvf.flat_strength,
    )
    quant = cfg.quant
    if args.quant_matrix:
        quant = QuantMatrix.from_rows(json.loads(Path(args.quant_matrix).read_text()))
    return codec.EmbedConfig(alpha=alpha, nvf=nvf, quant=quant,
                             filter_bank=args.filter_bank or cfg.filter_bank)


def cmd_embed(args):
    host = read_image(args.host)
    bits = read_binary_watermark(args.watermark, args.threshold)
    marked, plan = codec.embed(host, bits, _config_from_args(args))
    write_image(marked, args.output)
    plan.save(args.plan)
    print(json.dumps({"image": str(args.output), "plan": str(args.plan),
                      "psnr_db": round(metrics.psnr(host, marked), 4),
                      "positions_per_band": len(plan.positions["LH2"])}))
    return EXIT_OK


def cmd_extract(args):
    original = read_image(args.original)
    suspect = read_image(args.suspect)
    if args.plan:
        plan = codec.EmbedPlan.load(args.plan)
    else:
        plan = codec.regenerate_plan(original, args.shape, _config_from_args(args))
    bits = codec.extract(original, suspect, plan)
    write_binary_watermark(bits, args.output)
    ref = read_binary_watermark(args.reference, args.threshold) if args.reference else None
    rep = metrics.report(original, suspect, ref, bits if ref is not None else None,
                         original=str(args.original), suspect=str(args.suspect),
                         plan=str(args.plan) if args.plan else "regenerated")
    text = json.dumps(rep.to_dict(), indent=1, sort_keys=True)
    if args.metrics:
        Path(args.metrics).write_text(text + "\n")
    print(text)
    return EXIT_OK


def cmd_attack(args):
    if args.kind == "spec":
        raw = args.spec
        if raw.startswith("@"):
            raw = Path(raw[1:]).read_text()
        spec = attacks.AttackSpec.from_dict(json.loads(raw))
    else:
        _, names, _ = attacks.ATTACKS[args.kind]
        params = {n: getattr(args, n) for n in names if getattr(args, n, None) is not None}
        spec = attacks.AttackSpec(args.kind, params, getattr(args, "seed", None))
    out = attacks.apply_attack(read_image(args.image), spec)
    write_image(out, args.output)
    print(json.dumps({"attack": spec.to_dict(), "output": str(args.output)}))
    return EXIT_OK


def cmd_metrics(args):
    if args.bits:
        a = read_binary_watermark(args.first, args.threshold)
        b = read_binary_watermark(args.second, args.threshold)
        rep = metrics.report(original_bits=a, test_bits=b)
    else:
        rep = metrics.report(read_image(args.first), read_image(args.second))
    print(json.dumps(rep.to_dict(), indent=1, sort_keys=True))
    return EXIT_OK


def cmd_bench(args):
    manifest = BenchManifest.load(args.manifest)
    if args.no_figures:
        manifest.figures = False
    report = run_bench(manifest, output_dir=args.output_dir, workers=args.workers)
    print(json.dumps({"output_dir": str(args.output_dir or manifest.output_dir),
                      "images": len(report["images"]), "cells": len(report["cells"]),
                      "failures": report["failures"]}))
    return EXIT_OK


def cmd_corpus(args):
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, gen in corpus.SYNTHETIC.items():
        path = out / f"{name}.pgm"
        write_image(gen(size=args.size), path)
        written.append(str(path))
    wm = out / "watermark_cuet.pgm"
    write_binary_watermark(corpus.text_watermark(), wm)
    manifest = {
        "corpus": written,
        "watermark": str(wm),
        "embed_config": {},
        "attacks": [{"kind": "salt_pepper", "params": {"density": d}} for d in (0.01, 0.02, 0.03)]
        + [{"kind": "jpeg", "params": {"quality": q}} for q in (10, 20, 30, 50, 70)],
        "seeds": [0, 1, 2],
        "output_dir": str(out / "report"),
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=1) + "\n")
    print(json.dumps({"images": written, "watermark": str(wm), "manifest": str(out / "manifest.json")}))
    return EXIT_OK


def _attack_parsers(sub):
    p = sub.add_parser("attack", help="apply one attack to an image")
    kinds = p.add_subparsers(dest="kind", required=True, parser_class=_Parser)

    def kind(name, help_):
        k = kinds.add_parser(name, help=help_)
        k.add_argument("image")
        k.add_argument("output")
        return k

    k = kind("salt_pepper", "salt & pepper noise")
    k.add_argument("--density", type=float, required=True)
    k.add_argument("--seed", type=int, default=0)
    k = kind("gaussian_noise", "additive Gaussian noise")
    k.add_argument("--variance", type=float, required=True, help="on the [0,1] intensity scale")
    k.add_argument("--seed", type=int, default=0)
    for name in ("mean_filter", "median_filter"):
        k = kind(name, name.replace("_", " "))
        k.add_argument("--k", type=int, default=3, help="odd kernel size")
    k = kind("gaussian_filter", "Gaussian smoothing")
    k.add_argument("--k", type=int, default=3)
    k.add_argument("--sigma", type=float)
    k = kind("crop", "zero a square region")
    k.add_argument("--size", type=int, required=True)
    k.add_argument("--anchor", choices=attacks.ANCHORS)
    k = kind("jpeg", "baseline JPEG round trip")
    k.add_argument("--quality", type=int, required=True)
    kind("hist_eq", "histogram equalization")
    k = kind("contrast", "saturating linear contrast stretch")
    k.add_argument("--percent", type=float, required=True)
    k = kind("spec", "attack described by a JSON AttackSpec")
    k.add_argument("--spec", required=True, help="JSON text or @file")
    p.set_defaults(func=cmd_attack)


def build_parser():
    parser = _Parser(prog="spihtmark", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--error-json", action="store_true", help="print failures as JSON on stderr")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("embed", help="embed a binary watermark into a host image")
    p.add_argument("host")
    p.add_argument("watermark", help="watermark image, thresholded to bits")
    p.add_argument("-o", "--output", required=True, help="watermarked image (.pgm or .png)")
    p.add_argument("--plan", required=True, help="where to write the plan JSON")
    p.add_argument("--threshold", type=int, default=128)
    _add_config_flags(p)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("extract", help="extract a watermark with the original image")
    p.add_argument("original")
    p.add_argument("suspect")
    p.add_argument("-o", "--output", required=True, help="extracted watermark image")
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--plan", help="plan JSON written by embed")
    src.add_argument("--regenerate", action="store_true", help="rebuild the plan from the original")
    p.add_argument("--shape", type=_shape, default=(32, 32), help="watermark PxQ when regenerating")
    p.add_argument("--reference", help="original watermark, for the correlation score")
    p.add_argument("--metrics", help="write the metric report JSON here")
    p.add_argument("--threshold", type=int, default=128)
    _add_config_flags(p)
    p.set_defaults(func=cmd_extract)

    _attack_parsers(sub)

    p = sub.add_parser("metrics", help="PSNR/MSE of two images, or correlation of two watermarks")
    p.add_argument("first")
    p.add_argument("second")
    p.add_argument("--bits", action="store_true", help="treat inputs as binary watermarks")
    p.add_argument("--threshold", type=int, default=128)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("bench", help="run a benchmark manifest")
    p.add_argument("manifest")
    p.add_argument("--output-dir")
    p.add_argument("--workers", type=int, help="parallel images (default: $SPIHTMARK_WORKERS or 1)")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("corpus", help="write synthetic host images, the CUET watermark and a sample manifest")
    p.add_argument("output_dir")
    p.add_argument("--size", type=int, default=512)
    p.set_defaults(func=cmd_corpus)
    return parser


def _fail(args_error_json, code, exc):
    name = type(exc).__name__
    print(f"spihtmark: error: {exc}", file=sys.stderr)
    if args_error_json:
        print(json.dumps({"error": name, "message": str(exc), "exit_code": code}), file=sys.stderr)
    return code


def main(argv=None):
    argv = sys.argv[1:] if argv is None else list(argv)
    error_json = "--error-json" in argv
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        return _fail(error_json, EXIT_USAGE, exc)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (WatermarkError, ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        return _fail(error_json, EXIT_DATA, exc)
    except Exception as exc:  # pragma: no cover
        return _fail(error_json, EXIT_INTERNAL, exc)


if __name__ == "__main__":
    sys.exit(main())
