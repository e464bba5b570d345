"""Command-line front end.

Every stage reads document JSON files and writes them back with an updated
``prediction`` block, so stages can be chained through files or replaced by
external tools.
"""
from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from . import io, pipeline, synth
from .metrics import StedsReport, match_graphics, reds, toc_with_payload
from .model import GroupCategory, Structure, validate_document
from .scoring import FileScorer, HeuristicScorer, OracleScorer, Scorer

log = logging.getLogger("docstruct")

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2
STAGES = ("detect", "order", "construct", "pipeline")


class ValidationFailure(Exception):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    stage: str
    scorer: str = "heuristic"
    column_overlap: float = 0.5
    gap_ratio: float = 0.6

    def make_scorer(self, path: Path, truth: Structure | None) -> Scorer:
        if self.scorer == "heuristic":
            return HeuristicScorer(self.column_overlap, self.gap_ratio)
        if self.scorer == "oracle":
            if truth is None:
                raise io.FormatError(f"{path}: oracle scorer needs a ground_truth block")
            return OracleScorer(truth)
        if self.scorer.startswith("files:"):
            return FileScorer(self.scorer[len("files:"):], stem=path.stem)
        raise io.FormatError(f"unknown scorer {self.scorer!r}")


def _scorer_arg(value: str) -> str:
    if value in ("heuristic", "oracle") or (value.startswith("files:") and len(value) > 6):
        return value
    raise argparse.ArgumentTypeError("expected heuristic, oracle or files:<dir>")


def _ratio(value: str) -> float:
    v = float(value)
    if not 0.0 < v <= 1.0:
        raise argparse.ArgumentTypeError("must be in (0, 1]")
    return v


def process_file(cfg: PipelineConfig, path: str) -> str:
    """Run one stage on one file and return the serialized result."""
    path = Path(path)
    doc, truth, pred, raw = io.load_bundle(path)
    violations = validate_document(doc)
    if violations:
        raise ValidationFailure(f"{path}: " + "; ".join(str(v) for v in violations))
    scorer = cfg.make_scorer(path, truth)
    if cfg.stage == "detect":
        pred = pipeline.run_detect(doc, scorer)
    elif cfg.stage == "pipeline":
        pred = pipeline.run_pipeline(doc, scorer)
    else:
        if pred is None or not pred.regions:
            raise io.FormatError(f"{path}: '{cfg.stage}' needs prediction.regions from an earlier stage")
        if cfg.stage == "order":
            pred = pipeline.run_order(doc, pred, scorer)
        else:
            if not pred.groups and pred.regions:
                raise io.FormatError(f"{path}: 'construct' needs prediction.groups from the order stage")
            pred = pipeline.run_construct(doc, pred, scorer)
    out = dict(raw)
    out["prediction"] = io.structure_to_dict(pred)
    return io.dumps(out)


def _outputs(inputs: Sequence[str], output: str | None) -> list[Path | None]:
    if output is None:
        if len(inputs) > 1:
            raise io.FormatError("several inputs need -o <directory>")
        return [None]
    out = Path(output)
    if len(inputs) > 1 or out.is_dir():
        out.mkdir(parents=True, exist_ok=True)
        return [out / Path(p).name for p in inputs]
    return [out]


def cmd_stage(args) -> int:
    cfg = PipelineConfig(args.command, args.scorer, args.column_overlap, args.gap_ratio)
    targets = _outputs(args.inputs, args.output)
    if args.jobs > 1 and len(args.inputs) > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(process_file, [cfg] * len(args.inputs), args.inputs))
    else:
        results = [process_file(cfg, p) for p in args.inputs]
    for text, target in zip(results, targets):
        if target is None:
            sys.stdout.write(text)
        else:
            target.parent.mkdir(parents=True, exist_ok=True)
            target.write_text(text, encoding="utf-8")
    return EXIT_OK


def _pairs(pred: str, gt: str) -> list[tuple[Path, Path]]:
    p, g = Path(pred), Path(gt)
    if p.is_dir():
        files = sorted(x for x in p.glob("*.json"))
        return [(x, (g / x.name) if g.is_dir() else g) for x in files]
    return [(p, g)]


def _load_pair(pred_path: Path, gt_path: Path):
    pdoc, _, pred, _ = io.load_bundle(pred_path)
    gdoc, truth, _, _ = io.load_bundle(gt_path)
    if pred is None:
        raise io.FormatError(f"{pred_path}: missing prediction block")
    if truth is None:
        raise io.FormatError(f"{gt_path}: missing ground_truth block")
    return pdoc, pred, gdoc, truth


def cmd_eval(args) -> int:
    docs = []
    if args.metric == "reds":
        totals = {c: [0, 0] for c in GroupCategory}
        for pp, gp in _pairs(args.pred, args.gt):
            pdoc, pred, gdoc, truth = _load_pair(pp, gp)
            ids = match_graphics(pdoc.graphics, gdoc.graphics, args.iou)
            rep = reds(pred.groups, truth.groups, pred.regions, truth.regions, ids)
            entry = {"document": pp.name}
            for cat, r in rep.items():
                entry[cat.value] = r.to_dict()
                totals[cat][0] += r.distance
                totals[cat][1] += r.units
            docs.append(entry)
        agg = {}
        for cat, (d, n) in totals.items():
            per_doc = [e[cat.value]["score"] for e in docs]
            agg[cat.value] = {
                "D": d,
                "N": n,
                "score": max(0.0, 1.0 - d / n) if n else 1.0,
                "mean": sum(per_doc) / len(per_doc) if per_doc else 1.0,
            }
        report = {"metric": "reds", "documents": docs, "aggregate": agg}
    else:
        acc = StedsReport()
        for pp, gp in _pairs(args.pred, args.gt):
            pdoc, pred, gdoc, truth = _load_pair(pp, gp)
            if args.metric == "steds":
                if pred.toc is None or truth.toc is None:
                    raise io.FormatError(f"{pp}: TOC missing on one side")
                ptexts = {ln.id: ln.text for ln in pdoc.lines}
                gtexts = {ln.id: ln.text for ln in gdoc.lines}
                score = acc.add(
                    toc_with_payload(pred.toc, pred.regions, ptexts),
                    toc_with_payload(truth.toc, truth.regions, gtexts),
                )
            else:
                if pred.hierarchy is None or truth.hierarchy is None:
                    raise io.FormatError(f"{pp}: hierarchy missing on one side")
                score = acc.add(pred.hierarchy, truth.hierarchy)
            docs.append({"document": pp.name, "score": score})
        report = {
            "metric": "steds-toc" if args.metric == "steds" else "steds-hierarchy",
            "node_similarity": "text edit similarity when roles match, else 0",
            "documents": docs,
            "aggregate": {"micro": acc.micro, "macro": acc.macro},
        }
    text = io.dumps(report)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_synth(args) -> int:
    for k in range(args.count):
        seed = args.seed + k
        if args.corpus:
            cfg = synth.corpus_config(seed)
        else:
            cfg = synth.SynthConfig(
                seed=seed,
                pages=args.pages,
                columns=args.columns,
                max_depth=args.depth,
                figure_probability=args.figure_probability,
            )
        synth.write(synth.generate(cfg), args.output, f"doc_{seed:04d}", scores=not args.no_scores)
    return EXIT_OK


def cmd_validate(args) -> int:
    bad = False
    for p in args.inputs:
        doc, *_ = io.load_bundle(p)
        for v in validate_document(doc):
            print(f"{p}: {v}")
            bad = True
    return EXIT_INVALID if bad else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="docstruct", description="Hierarchical document structure parsing.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in STAGES:
        p = sub.add_parser(name, help=f"run the {name} stage" if name != "pipeline" else "run all three stages")
        p.add_argument("inputs", nargs="+", help="document JSON files")
        p.add_argument("-o", "--output", help="output file, or directory for several inputs")
        p.add_argument("--scorer", type=_scorer_arg, default="heuristic", help="heuristic | oracle | files:<dir>")
        p.add_argument("--jobs", type=int, default=1)
        p.add_argument("--column-overlap", type=_ratio, default=0.5)
        p.add_argument("--gap-ratio", type=float, default=0.6)
        p.set_defaults(func=cmd_stage)

    ev = sub.add_parser("eval", help="score predictions against ground truth")
    ev.add_argument("metric", choices=("reds", "steds", "hierarchy"))
    ev.add_argument("pred")
    ev.add_argument("gt")
    ev.add_argument("-o", "--output")
    ev.add_argument("--iou", type=_ratio, default=0.5, help="graphic matching IoU threshold")
    ev.set_defaults(func=cmd_eval)

    sy = sub.add_parser("synth", help="generate synthetic documents with ground truth")
    sy.add_argument("-o", "--output", required=True, help="output directory")
    sy.add_argument("--seed", type=int, default=0)
    sy.add_argument("--count", type=int, default=1)
    sy.add_argument("--pages", type=int, default=3)
    sy.add_argument("--columns", type=int, default=2, choices=(1, 2, 3))
    sy.add_argument("--depth", type=int, default=3)
    sy.add_argument("--figure-probability", type=float, default=0.25)
    sy.add_argument("--corpus", action="store_true", help="vary knobs per seed")
    sy.add_argument("--no-scores", action="store_true", help="skip oracle score files")
    sy.set_defaults(func=cmd_synth)

    va = sub.add_parser("validate", help="check document invariants")
    va.add_argument("inputs", nargs="+")
    va.set_defaults(func=cmd_validate)
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # usage errors and --help
        return int(exc.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except ValidationFailure as exc:
        log.error("validation failed: %s", exc)
        return EXIT_INVALID
    except (io.FormatError, KeyError, OSError) as exc:
        log.error("error: %s", exc)
        return EXIT_IO


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
