"""Command-line driver.

Typical pipeline::

    qcpd ingest dump1.xml dump2.xml --out revisions.jsonl
    qcpd labels --revisions revisions.jsonl --out labels.jsonl
    qcpd features --revisions revisions.jsonl --labels labels.jsonl --out corpus/
    qcpd detect --in corpus/ --algo pelt --pen 1 --features Gp --out pelt.json
    qcpd evaluate --gt corpus/ --pred pelt.json --pred binseg.json --pred ecp.json

Every JSON output carries ``schema_version``; standalone CSV outputs start
with a ``# schema_version`` comment line.
"""
from __future__ import annotations

import argparse
import csv
import io
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Sequence

from . import __version__, kernels
from .core import MonthCalendar, QualityClass, monthly_classes
from .corpus import (
    SCHEMA_VERSION,
    dump_json,
    predictions_doc,
    read_corpus,
    read_ground_truth,
    read_predictions,
    write_corpus,
)
from .cpd import ALGORITHMS, HYBRID_DETECTORS, DetectorConfig, hybrid_report
from .evaluation import aggregate_report, evaluate_article
from .features import build_series, change_window_means, correlation_matrix
from .harness import (
    TuneGrid,
    detect_corpus,
    evaluate_corpus,
    filter_corpus,
    run_ablation,
    split_train_test,
    subset,
    synth_corpus,
    tune_hyperparameters,
)
from .ingest import (
    extract_quality_labels,
    merge_histories,
    parse_mediawiki_xml,
    read_labels_jsonl,
    read_revisions_jsonl,
    write_labels_jsonl,
    write_revisions_jsonl,
)
from .trajectory import QualityTrajectory, trajectory_report

log = logging.getLogger("qcpd")


# -- helpers ---------------------------------------------------------------------

def _calendar(args) -> MonthCalendar:
    if args.calendar_start:
        return MonthCalendar.parse(args.calendar_start, args.months)
    return MonthCalendar.ending(2019, 6, args.months)


def _emit(text: str, out: str | None) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8")
        log.info("wrote %s", out)


def _emit_json(doc: dict, out: str | None) -> None:
    _emit(dump_json(doc), out)


def _csv_text(kind: str, header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    buf.write(f"# schema_version: {SCHEMA_VERSION} kind: {kind}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(",") if v.strip())


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(",") if v.strip())


def _config(args, algorithm: str | None = None) -> DetectorConfig:
    return DetectorConfig(
        algorithm=algorithm or args.algo, cost=args.cost, gamma=args.gamma,
        n_bkps=args.n_bkps, pen=args.pen, min_size=args.min_size,
        permutations=args.permutations, alpha=args.alpha, seed=args.seed)


def _load_filtered(args) -> list:
    corpus = read_corpus(args.input)
    kept = filter_corpus(corpus, args.min_changepoints, args.latest_class)
    if len(kept) < len(corpus):
        log.info("criteria keep %d of %d articles", len(kept), len(corpus))
    if not kept:
        raise SystemExit("no articles satisfy the selection criteria")
    return kept


def _run_meta(args, cfg: DetectorConfig | None = None, **extra) -> dict:
    meta = {"qcpd_version": __version__, "seed": args.seed}
    if cfg is not None:
        meta.update(algorithm=cfg.algorithm, hyperparameters=cfg.hyperparameters(),
                    cost=cfg.cost if cfg.algorithm != "ecp" else "energy")
    meta.update(extra)
    return meta


# -- subcommands --------------------------------------------------------------------

def _parse_file(path: str):
    with open(path, "rb") as fh:
        return parse_mediawiki_xml(fh)


def cmd_ingest(args) -> int:
    if args.jobs > 1 and len(args.xml) > 1:
        with ProcessPoolExecutor(args.jobs) as ex:
            parts = list(ex.map(_parse_file, args.xml))
    else:
        parts = [_parse_file(p) for p in args.xml]
    histories = merge_histories(h for part in parts for h in part)
    with open(args.out, "w", encoding="utf-8") as fh:
        n = write_revisions_jsonl(histories, fh)
    log.info("%d pages, %d revisions", len(histories), n)
    return 0


def cmd_labels(args) -> int:
    with open(args.revisions, encoding="utf-8") as fh:
        histories = read_revisions_jsonl(fh)
    labels = {h.article_id: extract_quality_labels(h.talk_revisions) for h in histories}
    labels = {k: v for k, v in labels.items() if v}
    with open(args.out, "w", encoding="utf-8") as fh:
        n = write_labels_jsonl(labels, fh)
    log.info("%d label events for %d articles", n, len(labels))
    return 0


def cmd_features(args) -> int:
    cal = _calendar(args)
    with open(args.revisions, encoding="utf-8") as fh:
        histories = read_revisions_jsonl(fh)
    with open(args.labels, encoding="utf-8") as fh:
        labels = read_labels_jsonl(fh)
    corpus = []
    for h in histories:
        try:
            corpus.append(build_series(h, labels.get(h.article_id, []), cal))
        except ValueError as e:
            log.warning("skipping %s", e)
    if not corpus:
        raise SystemExit("no article produced a feature series")
    write_corpus(args.out, corpus, {"source": "features"})
    log.info("wrote %d articles to %s", len(corpus), args.out)
    return 0


def cmd_synth(args) -> int:
    corpus = synth_corpus(args.n_articles, args.months, args.dims, args.breaks, args.min_gap,
                          args.shift, args.noise, args.seed, _calendar(args).label)
    write_corpus(args.out, corpus, {
        "source": "synth", "seed": args.seed, "dims": args.dims, "breaks": args.breaks,
        "min_gap": args.min_gap, "shift": args.shift, "noise": args.noise})
    log.info("wrote %d synthetic articles to %s", len(corpus), args.out)
    return 0


def cmd_detect(args) -> int:
    corpus = _load_filtered(args)
    cfg = _config(args)
    preds, meta = detect_corpus(corpus, cfg, args.features, args.scale)
    run = _run_meta(args, cfg, features=args.features, scale=args.scale, per_article=meta)
    _emit_json(predictions_doc(run, preds), args.out)
    return 0


def cmd_evaluate(args) -> int:
    gt = read_ground_truth(args.gt)
    reports, runs = {}, {}
    for path in args.pred:
        run, preds = read_predictions(path)
        label = run.get("algorithm") or Path(path).stem
        if label in reports:
            label = f"{label}:{Path(path).stem}"
        missing = [k for k in preds if k not in gt]
        if missing:
            raise SystemExit(f"{path}: articles without ground truth: {missing[:5]}")
        rows = [evaluate_article(aid, gt[aid]["points"], preds[aid], gt[aid]["n_months"],
                                 args.margin, gt[aid]["start"], args.covering_op)
                for aid in sorted(preds)]
        reports[label] = aggregate_report(rows, args.margin, label)
        runs[label] = run
    doc = {"schema_version": SCHEMA_VERSION, "kind": "evaluation", "margin": args.margin,
           "covering_op": args.covering_op, "runs": runs,
           "reports": {k: r.to_dict() for k, r in reports.items()}}
    if all(d in reports for d in HYBRID_DETECTORS):
        doc["hybrid"] = {m: hybrid_report(reports, m).to_dict()
                         for m in ("aggregate", "per_article")}
    _emit_json(doc, args.out)
    for k, r in reports.items():
        log.info("%-10s covering=%.4f precision=%.4f recall=%.4f", k, r.covering, r.precision,
                 r.recall)
    return 0


def cmd_tune(args) -> int:
    corpus = read_corpus(args.input)
    split = split_train_test(corpus, args.train_ratio, args.seed)
    train = filter_corpus(subset(corpus, split.train), 0, args.latest_class)
    test = filter_corpus(subset(corpus, split.test), args.min_changepoints, args.latest_class)
    grid = TuneGrid(args.pen_grid, args.min_size_grid, args.n_bkps_grid, args.objective)
    res = tune_hyperparameters(train, grid, _config(args), args.features, args.margin,
                               args.min_changepoints, args.scale)
    doc = {"schema_version": SCHEMA_VERSION, "kind": "tuning",
           "run": _run_meta(args, res.best, features=args.features, scale=args.scale,
                            train_ratio=args.train_ratio),
           "split": {"train": list(split.train), "test": list(split.test)},
           **res.to_dict()}
    if test:
        preds, _ = detect_corpus(test, res.best, args.features, args.scale)
        doc["test"] = evaluate_corpus(test, preds, args.margin, "test").to_dict()
    _emit_json(doc, args.out)
    return 0


def cmd_ablate(args) -> int:
    corpus = _load_filtered(args)
    groups = [g.strip() for g in args.groups.split(",") if g.strip()]
    configs = {a: _config(args, a) for a in args.algos.split(",")}
    rows = run_ablation(corpus, groups, configs, args.margin, args.scale)
    if args.out and args.out.endswith(".csv"):
        keys = ["group", "detector", "n_columns", "covering", "precision", "recall"]
        _emit(_csv_text("ablation", keys, ([r[k] for k in keys] for r in rows)), args.out)
    else:
        _emit_json({"schema_version": SCHEMA_VERSION, "kind": "ablation",
                    "run": _run_meta(args, margin=args.margin,
                                     detectors={k: c.hyperparameters() for k, c in configs.items()}),
                    "rows": rows}, args.out)
    return 0


def cmd_trajectory(args) -> int:
    with open(args.labels, encoding="utf-8") as fh:
        labels = read_labels_jsonl(fh)
    created = {}
    if args.revisions:
        with open(args.revisions, encoding="utf-8") as fh:
            created = {h.article_id: h.creation_time for h in read_revisions_jsonl(fh)}
    corpus = [QualityTrajectory.from_events(aid, evs, created.get(aid))
              for aid, evs in sorted(labels.items()) if evs]
    _emit_json({**trajectory_report(corpus), "kind": "trajectory"}, args.out)
    return 0


def _demotion_picker(labels, source: QualityClass):
    def pick(series):
        classes = monthly_classes(labels.get(series.article_id, []), series.calendar)
        for k in range(1, len(classes)):
            a, b = classes[k - 1], classes[k]
            if a is source and b is not None and b < source:
                return k + 1
        return None
    return pick


def cmd_window_means(args) -> int:
    corpus = read_corpus(args.input)
    pick = None
    if args.demoted_from:
        if not args.labels:
            raise SystemExit("--demoted-from needs --labels")
        with open(args.labels, encoding="utf-8") as fh:
            labels = read_labels_jsonl(fh)
        pick = _demotion_picker(labels, QualityClass[args.demoted_from.upper()])
    wm = change_window_means(corpus, args.window, pick)
    names = corpus[0].feature_names
    offsets = [i - wm.change_index for i in range(args.window)]
    header = ["feature", *(f"m{o:+d}" for o in offsets)]
    rows = ([names[i], *(repr(float(v)) for v in wm.means[i])] for i in range(len(names)))
    text = _csv_text(f"window_means n_articles={wm.n_articles}", header, rows)
    _emit(text, args.out)
    return 0


def cmd_correlate(args) -> int:
    corpus = read_corpus(args.input)
    corr = correlation_matrix(corpus)
    names = list(corpus[0].feature_names)
    if args.out and args.out.endswith(".csv"):
        rows = ([n, *(repr(float(v)) for v in corr.matrix[i])] for i, n in enumerate(names))
        _emit(_csv_text("correlation", ["feature", *names], rows), args.out)
    else:
        _emit_json({"schema_version": SCHEMA_VERSION, "kind": "correlation",
                    "features": names, "matrix": corr.matrix.tolist(),
                    "constant_features": corr.constant_features}, args.out)
    return 0


# -- parser -----------------------------------------------------------------------------

def _detector_args(p: argparse.ArgumentParser, algo: bool = True) -> None:
    if algo:
        p.add_argument("--algo", choices=ALGORITHMS, default="pelt")
    p.add_argument("--cost", choices=("rbf", "l2"), default="rbf")
    p.add_argument("--gamma", type=float, default=None,
                   help="RBF bandwidth; default is the median heuristic per series")
    p.add_argument("--pen", type=float, default=1.0, help="PELT penalty per change point")
    p.add_argument("--n-bkps", type=int, default=1, help="BinSeg number of splits")
    p.add_argument("--min-size", type=int, default=None,
                   help="minimum segment length (default 2, ECP 5)")
    p.add_argument("--permutations", type=int, default=199, help="ECP permutation count")
    p.add_argument("--alpha", type=float, default=0.05, help="ECP significance level")
    p.add_argument("--scale", choices=("none", "zscore"), default="none",
                   help="per-article column scaling before detection")


def _criteria_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--min-changepoints", type=int, default=1,
                   help="keep articles with at least this many true change points")
    p.add_argument("--latest-class", choices=[c.name for c in QualityClass], default=None,
                   help="keep articles whose latest merged class is this one")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qcpd", description=__doc__.split("\n")[0])
    ap.add_argument("--version", action="version", version=f"qcpd {__version__}")
    ap.add_argument("--seed", type=int, default=0, help="global seed (default 0)")
    ap.add_argument("--calendar-start", default=None, metavar="YYYY-MM",
                    help="first calendar month (default: window ending 2019-06)")
    ap.add_argument("--months", type=int, default=156, help="calendar length in months")
    ap.add_argument("--backend", choices=("auto", "cython", "python"), default="auto")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="count", default=argparse.SUPPRESS)
    _add = sub.add_parser

    def add_parser(name, **kw):
        return _add(name, parents=[common], **kw)

    sub.add_parser = add_parser

    p = sub.add_parser("ingest", help="MediaWiki XML export files -> revision JSONL")
    p.add_argument("xml", nargs="+")
    p.add_argument("--out", required=True)
    p.add_argument("--jobs", type=int, default=1, help="parse files in parallel")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("labels", help="talk-page banners -> quality label JSONL")
    p.add_argument("--revisions", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_labels)

    p = sub.add_parser("features", help="revisions + labels -> monthly feature corpus")
    p.add_argument("--revisions", required=True)
    p.add_argument("--labels", required=True)
    p.add_argument("--out", required=True, help="corpus directory")
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("synth", help="synthetic piecewise-constant corpus")
    p.add_argument("--out", required=True, help="corpus directory")
    p.add_argument("--n-articles", type=int, default=50)
    p.add_argument("--dims", type=int, default=34)
    p.add_argument("--breaks", type=int, default=3)
    p.add_argument("--min-gap", type=int, default=20)
    p.add_argument("--shift", type=float, default=5.0, help="mean shift in noise units")
    p.add_argument("--noise", type=float, default=1.0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("detect", help="run one detector over a corpus")
    p.add_argument("--in", dest="input", required=True, help="corpus directory")
    p.add_argument("--out", default=None)
    p.add_argument("--features", default="all", help="group expression, e.g. Gp or Gc+Ga")
    _detector_args(p)
    _criteria_args(p)
    p.set_defaults(func=cmd_detect)

    p = sub.add_parser("evaluate", help="score prediction files against ground truth")
    p.add_argument("--gt", required=True, help="corpus directory or ground_truth.json")
    p.add_argument("--pred", action="append", required=True, help="repeatable")
    p.add_argument("--margin", type=int, default=5)
    p.add_argument("--covering-op", choices=("max", "min"), default="max")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("tune", help="grid search on a stratified train split")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", default=None)
    p.add_argument("--features", default="all")
    p.add_argument("--train-ratio", type=float, default=0.8)
    p.add_argument("--margin", type=int, default=5)
    p.add_argument("--objective", choices=("covering", "precision", "recall"), default="covering")
    p.add_argument("--pen-grid", type=_float_list, default=TuneGrid().pen_values)
    p.add_argument("--min-size-grid", type=_int_list, default=TuneGrid().min_sizes)
    p.add_argument("--n-bkps-grid", type=_int_list, default=TuneGrid().n_bkps)
    _detector_args(p)
    _criteria_args(p)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("ablate", help="evaluate detectors on feature subsets")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", default=None, help=".json or .csv")
    p.add_argument("--groups", default="Gc,Ga,Gp")
    p.add_argument("--algos", default="binseg,ecp,pelt")
    p.add_argument("--margin", type=int, default=5)
    _detector_args(p, algo=False)
    _criteria_args(p)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("trajectory", help="label trajectory statistics")
    p.add_argument("--labels", required=True)
    p.add_argument("--revisions", default=None, help="for creation times")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_trajectory)

    p = sub.add_parser("window-means", help="feature means around a change month")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--window", type=int, default=24)
    p.add_argument("--labels", default=None)
    p.add_argument("--demoted-from", choices=[c.name for c in QualityClass], default=None,
                   help="align on the first demotion from this class")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_window_means)

    p = sub.add_parser("correlate", help="feature correlation matrix")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", default=None, help=".json or .csv")
    p.set_defaults(func=cmd_correlate)
    return ap


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    if args.backend != "auto":
        kernels.set_backend(args.backend)
    try:
        return args.func(args)
    except (ValueError, KeyError, FileNotFoundError) as e:
        log.error("%s", e)
        return 2


if __name__ == "__main__":
    sys.exit(main())
