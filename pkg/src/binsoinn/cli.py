"""Command line front end.

Exit codes: 0 success / benign verdict, 1 error, 2 malicious verdict.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import model_store
from .binviz import file_extension, render_file, write_png
from .features import DEFAULT_VARIANT, VARIANTS, extract, read_csv, write_csv
from .hilbert import DEFAULT_MAX_SIDE
from .model_store import Provenance
from .pipeline import (
    MALICIOUS,
    Dataset,
    EvalReport,
    evaluate,
    featurize,
    ingest,
    ingest_dirs,
    mean_color_stats,
    sweep,
    train,
    train_per_ext,
)
from .soinn import TrainParams


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {text!r}")


def _power_of_two(text: str) -> int:
    v = int(text)
    if v < 2 or v & (v - 1):
        raise argparse.ArgumentTypeError(f"{v} is not a power of two >= 2")
    return v


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master random seed (default 0)")
    common.add_argument("--json", action="store_true", help="machine readable output on stdout")
    common.add_argument("-v", "--verbose", action="store_true")

    feat = argparse.ArgumentParser(add_help=False)
    feat.add_argument("--max-side", type=_power_of_two, default=DEFAULT_MAX_SIDE)
    feat.add_argument("--variant", choices=VARIANTS, default=DEFAULT_VARIANT, help="histogram binning")
    feat.add_argument("--workers", type=int, default=1)

    corpus = argparse.ArgumentParser(add_help=False)
    corpus.add_argument("--benign", metavar="DIR")
    corpus.add_argument("--malicious", metavar="DIR")
    corpus.add_argument("--dataset", metavar="CSV", help="use a featurized dataset instead of directories")

    soinn = argparse.ArgumentParser(add_help=False)
    soinn.add_argument("--isolated-threshold", choices=("max", "min"), default="max")
    soinn.add_argument("--noise-factor", type=float, default=0.5)
    soinn.add_argument("--split", type=float, default=0.8, help="training fraction (default 0.8)")

    p = _Parser(prog="binsoinn", description="Hilbert-curve byte images + SOINN malware triage")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("render", parents=[common], help="write a file's byte image as PNG")
    s.add_argument("file")
    s.add_argument("-o", "--output", required=True)
    s.add_argument("--max-side", type=_power_of_two, default=DEFAULT_MAX_SIDE)

    s = sub.add_parser("featurize", parents=[common, feat, corpus], help="export feature vectors as CSV")
    s.add_argument("dirs", nargs="*", help="extra directories, labelled by their own name")
    s.add_argument("-o", "--output", required=True)
    s.add_argument("--color-stats", action="store_true", help="mean colour-class shares per label")
    s.add_argument("--report", metavar="DIR", help="write CSV tables and figures here")

    s = sub.add_parser("train", parents=[common, feat, corpus, soinn], help="train a model")
    s.add_argument("--lambda", dest="lam", type=int, default=290)
    s.add_argument("--age-max", type=int, default=170)
    s.add_argument("--per-ext", action="store_true", help="one model per file extension; -o is a directory")
    s.add_argument("--init", choices=("random", "first"), default="random")
    s.add_argument("-o", "--output", required=True)

    s = sub.add_parser("classify", parents=[common, feat], help="classify one file")
    s.add_argument("file")
    s.add_argument("--model", required=True, help="model file, or directory from train --per-ext")

    s = sub.add_parser("eval", parents=[common, feat, corpus], help="evaluate a model on labelled files")
    s.add_argument("--model", required=True)
    s.add_argument("--by-ext", action="store_true")
    s.add_argument("--report", metavar="DIR")

    s = sub.add_parser("sweep", parents=[common, feat, corpus, soinn], help="Monte Carlo (lambda, A) grid")
    s.add_argument("--lambdas", type=_int_list, required=True)
    s.add_argument("--ages", type=_int_list, required=True)
    s.add_argument("--trials", type=int, default=10)
    s.add_argument("-o", "--output", help="CSV of per-cell results")
    s.add_argument("--report", metavar="DIR")
    return p


def _load_corpus(args) -> Dataset:
    if args.dataset:
        vectors, labels = read_csv(args.dataset, args.variant)
        return Dataset.from_vectors(vectors, labels)
    if not (args.benign and args.malicious):
        raise UsageError("need --benign and --malicious directories, or --dataset")
    samples, _ = ingest(args.benign, args.malicious)
    ds, _ = featurize(samples, args.max_side, args.variant, args.workers)
    return ds


def _params(args) -> TrainParams:
    return TrainParams(
        lambda_=getattr(args, "lam", 290),
        age_max=getattr(args, "age_max", 170),
        rng_seed=args.seed,
        isolated_threshold=args.isolated_threshold,
        noise_factor=args.noise_factor,
    )


def _emit(args, human: str, machine) -> None:
    if args.json:
        print(json.dumps(machine, sort_keys=True))
    else:
        print(human)


def _ext_model_name(ext: str) -> str:
    return f"{ext or 'noext'}.json"


def cmd_render(args) -> int:
    img = render_file(args.file, args.max_side)
    write_png(img, args.output)
    _emit(args, f"wrote {img.side}x{img.side} image to {args.output}",
          {"side": img.side, "source_len": img.source_len, "output": args.output})
    return 0


def cmd_featurize(args) -> int:
    dirs = {}
    if args.benign:
        dirs["benign"] = args.benign
    if args.malicious:
        dirs["malicious"] = args.malicious
    for d in args.dirs:
        dirs[Path(d).resolve().name] = d
    if not dirs:
        raise UsageError("no input directories given")
    samples, skips = ingest_dirs(dirs)
    ds, bad = featurize(samples, args.max_side, args.variant, args.workers, color_stats=args.color_stats)
    write_csv(args.output, ds.vectors(), ds.labels)
    out = {"vectors": len(ds), "skipped": [str(s.path) for s in skips + bad], "output": args.output}
    human = f"wrote {len(ds)} vectors to {args.output} ({len(skips) + len(bad)} skipped)"
    if args.color_stats and len(ds):
        stats = mean_color_stats(ds)
        out["color_stats"] = stats
        human += "\n" + "\n".join(
            f"{label:<10} " + " ".join(f"{c}={v:.3f}" for c, v in row.items()) for label, row in stats.items()
        )
        if args.report:
            from .report import plot_color_stats, write_rows

            rdir = Path(args.report)
            rdir.mkdir(parents=True, exist_ok=True)
            write_rows(rdir / "color_stats.csv", [{"label": k, **v} for k, v in stats.items()])
            plot_color_stats(stats, rdir / "color_stats.png")
    _emit(args, human, out)
    return 0


def cmd_train(args) -> int:
    ds = _load_corpus(args)
    params = _params(args)
    meta = Provenance.current(ds.variant)
    if args.per_ext:
        outdir = Path(args.output)
        outdir.mkdir(parents=True, exist_ok=True)
        results = train_per_ext(ds, params, args.split, args.seed)
        summary = {}
        for ext, res in results.items():
            model_store.save(res.net, meta, outdir / _ext_model_name(ext))
            summary[ext or "noext"] = {"nodes": len(res.net), "edges": len(res.net.edges)}
        _emit(args, "\n".join(f"{e}: {v['nodes']} nodes" for e, v in summary.items()), summary)
        return 0
    res = train(ds, params, args.split, args.seed, args.init)
    model_store.save(res.net, meta, args.output)
    out = {"nodes": len(res.net), "edges": len(res.net.edges), "train": len(res.train_idx),
           "held_out": len(res.held_out_idx), "output": args.output}
    human = f"trained on {out['train']} vectors: {out['nodes']} nodes, {out['edges']} edges -> {args.output}"
    if res.held_out_idx:
        rep = evaluate(res.net, ds.subset(res.held_out_idx))
        out["held_out_accuracy"] = rep.overall.accuracy
        human += f"\nheld-out accuracy {rep.overall.accuracy:.4f} on {len(res.held_out_idx)} vectors"
    _emit(args, human, out)
    return 0


def _resolve_model(model: str, path: str) -> Path:
    m = Path(model)
    if m.is_dir():
        m = m / _ext_model_name(file_extension(path))
        if not m.exists():
            raise FileNotFoundError(f"no per-extension model {m}")
    return m


def cmd_classify(args) -> int:
    model_path = _resolve_model(args.model, args.file)
    net, meta = model_store.load(model_path, expected_variant=args.variant)
    img = render_file(args.file, args.max_side)
    v = net.classify(extract(img, meta.variant))
    print(json.dumps({
        "label": v.label,
        "distance": v.distance,
        "winner_id": v.winner_id,
        "votes": v.votes,
        "model_provenance": {"variant": meta.variant, "palette": meta.palette, "path": str(model_path)},
    }, sort_keys=True))
    return 2 if v.label == MALICIOUS else 0


def cmd_eval(args) -> int:
    net, meta = model_store.load(args.model, expected_variant=args.variant)
    ds = _load_corpus(args)
    rep = evaluate(net, ds, args.by_ext, meta={"model": args.model, "seed": args.seed,
                                                "lambda": net.params.lambda_, "age_max": net.params.age_max})
    if args.report:
        _write_eval_report(rep, Path(args.report))
    from .report import report_table

    _emit(args, report_table(rep), rep.to_dict())
    return 0


def _write_eval_report(rep: EvalReport, rdir: Path) -> None:
    from .report import plot_eval_report, write_rows

    rdir.mkdir(parents=True, exist_ok=True)
    write_rows(rdir / "eval.csv", rep.rows())
    plot_eval_report(rep, rdir / "eval.png")


def cmd_sweep(args) -> int:
    from .report import plot_sweep, sweep_table, write_rows

    ds = _load_corpus(args)
    base = _params(args)
    res = sweep(ds, args.lambdas, args.ages, args.trials, args.seed, args.split, base)
    if args.output:
        write_rows(args.output, res.rows())
    if args.report:
        rdir = Path(args.report)
        rdir.mkdir(parents=True, exist_ok=True)
        write_rows(rdir / "sweep.csv", res.rows())
        plot_sweep(res, rdir / "sweep.png")
    _emit(args, sweep_table(res), {"cells": res.rows(), "spread": res.spread, "seed": args.seed})
    return 0


COMMANDS = {
    "render": cmd_render,
    "featurize": cmd_featurize,
    "train": cmd_train,
    "classify": cmd_classify,
    "eval": cmd_eval,
    "sweep": cmd_sweep,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"binsoinn: error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, RuntimeError) as exc:
        print(f"binsoinn: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
