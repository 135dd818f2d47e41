"""Command-line interface.

Subcommands: train, extract, eval, benchmark, ablate, synth.  Config flags
mirror every PipelineConfig field; SOPOOL_THREADS caps the worker pool.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields
from pathlib import Path

from . import classifier, pooling
from .dataset import load_corpus, write_split_manifest
from .pipeline import (
    BenchmarkReport,
    Model,
    PipelineConfig,
    ablate_encoding,
    ablate_grid,
    benchmark,
    compute_descriptors,
    evaluate,
    fit_pipeline,
)
from .synth import STYLES, make_corpus


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    defaults = PipelineConfig()
    for f in fields(PipelineConfig):
        name = "--" + f.name.lower().replace("_", "-")
        value = getattr(defaults, f.name)
        if isinstance(value, bool):
            parser.add_argument(name, dest=f.name,
                                type=lambda v: v.lower() in ("1", "true", "yes"),
                                default=value, metavar="BOOL")
        elif isinstance(value, tuple):
            parser.add_argument(name, dest=f.name,
                                type=lambda v: tuple(int(x) for x in v.split(",")),
                                default=value, metavar="G1,G2,...")
        else:
            parser.add_argument(name, dest=f.name, type=type(value), default=value)


def _config_from_args(args) -> PipelineConfig:
    return PipelineConfig(**{f.name: getattr(args, f.name) for f in fields(PipelineConfig)})


def _write_report(report: BenchmarkReport, out_prefix: str | None) -> None:
    sys.stdout.write(report.to_text())
    if out_prefix:
        Path(out_prefix + ".json").write_text(report.to_json())
        Path(out_prefix + ".txt").write_text(report.to_text())


def cmd_train(args) -> int:
    cfg = _config_from_args(args)
    images = load_corpus(args.corpus, cfg.target_side)
    model = fit_pipeline(images, cfg)
    model.save(args.out)
    print(f"model written to {args.out} "
          f"({model.ridge.weights.shape[0]}-dim, {len(model.ridge.classes)} classes)")
    return 0


def cmd_extract(args) -> int:
    model = Model.load(args.model)
    cfg = model.cfg
    images = load_corpus_single(args.image, cfg.target_side)
    x = compute_descriptors(images, cfg, model.zca, model.dictionary)
    desc = pooling.PooledDescriptor(values=x[0], l2_normalized=cfg.l2_normalize)
    pooling.write_descriptor(args.out, desc, cfg.code_width, cfg.pyramid.n_cells)
    print(f"descriptor ({x.shape[1]} dims) written to {args.out}")
    return 0


def load_corpus_single(path, target_side):
    """Wrap one image file as a single-element corpus."""
    from .dataset import GrayImage, _decode, bilinear_resize
    import numpy as np

    px = bilinear_resize(_decode(Path(path)), target_side, target_side)
    return [GrayImage(np.clip(px, 0.0, 1.0), "probe", str(path))]


def cmd_eval(args) -> int:
    model = Model.load(args.model)
    cfg = model.cfg
    if args.gallery:
        # fixed-gallery protocol: refit only the classifier on the gallery,
        # reusing the model's whitening and dictionary
        gallery = load_corpus(args.gallery, cfg.target_side)
        x = compute_descriptors(gallery, cfg, model.zca, model.dictionary)
        model.ridge = classifier.train_ridge(x, [im.subject_id for im in gallery], cfg.lam)
    probe = load_corpus(args.probe, cfg.target_side)
    acc, confusion = evaluate(model, probe)
    print(f"accuracy: {100 * acc:.2f} % ({len(probe)} probes)")
    if args.confusion:
        for key, count in confusion.items():
            true, pred = key.split("|")
            print(f"  {true} -> {pred}: {count}")
    return 0


def cmd_benchmark(args) -> int:
    cfg = _config_from_args(args)
    images = load_corpus(args.corpus, cfg.target_side)
    report = benchmark(images, cfg)
    _write_report(report, args.out)
    if args.manifest:
        from .dataset import make_splits

        write_split_manifest(make_splits(images, cfg.split_spec), args.manifest)
    return 0


def cmd_ablate(args) -> int:
    cfg = _config_from_args(args)
    images = load_corpus(args.corpus, cfg.target_side)
    if args.mode == "encoding":
        result = ablate_encoding(images, cfg)
        for name in ("with_encoding", "without_encoding"):
            rep = result[name]
            print(f"{name}: {100 * rep.mean:.1f} +/- {100 * rep.std:.1f} %")
            if args.out:
                Path(f"{args.out}.{name}.json").write_text(rep.to_json())
    else:
        sizes = [int(v) for v in args.dict_sizes.split(",")]
        depths = [int(v) for v in args.depths.split(",")]
        csv = ablate_grid(images, cfg, sizes, depths)
        sys.stdout.write(csv)
        if args.out:
            Path(args.out + ".csv").write_text(csv)
    return 0


def cmd_synth(args) -> int:
    out = make_corpus(args.out, args.subjects, args.per_subject, args.seed,
                      side=args.side, style=args.style)
    print(f"synthetic corpus ({args.subjects} subjects x {args.per_subject}) at {out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sopool",
        description="Second-order pooling face identification pipeline",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="fit a model on a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True)
    _add_config_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("extract", help="extract one descriptor with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--image", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("eval", help="evaluate a model on a gallery/probe pair")
    p.add_argument("--model", required=True)
    p.add_argument("--gallery", default=None,
                   help="optional fixed gallery; the classifier is refit on it")
    p.add_argument("--probe", required=True)
    p.add_argument("--confusion", action="store_true")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("benchmark", help="random-split benchmark over a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", default=None, help="report file prefix (.json/.txt)")
    p.add_argument("--manifest", default=None, help="write the split manifest here")
    _add_config_flags(p)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("ablate", help="encoding or dictionary/pyramid grid ablation")
    p.add_argument("mode", choices=("encoding", "grid"))
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--dict-sizes", default="5,10,20,40")
    p.add_argument("--depths", default="3,4,5")
    _add_config_flags(p)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("synth", help="generate a deterministic synthetic corpus")
    p.add_argument("--subjects", type=int, required=True)
    p.add_argument("--per-subject", type=int, required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--side", type=int, default=64)
    p.add_argument("--style", choices=STYLES, default="blob")
    p.set_defaults(func=cmd_synth)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # noqa: BLE001 - CLI boundary
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
