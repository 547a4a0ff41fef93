"""Command-line entry point: ``tirm <subcommand> ...``.

Exit codes: 0 success, 1 validation failure, 2 input or schema error.
Machine-readable reports go to ``--out`` as JSON; a human-readable table is
printed to stdout.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import sys
from collections import Counter
from pathlib import Path
from typing import Optional

from . import __version__
from .core import ParseError, Relevancy, TirmError, VoteRecord
from .entities import load_gazetteer, sample_gazetteer
from .ingest import (
    DatasetError, FeatureFileError, Fetcher, LivenessError, SnapshotError, liveness_summary,
    load_dataset, load_features, persist_features,
)
from .intention import CHANGE_THRESHOLD, Quadrant, UnservableIntentionError, change_state, map_tirm, recommend
from .labeling import AggregationPolicy, LabelingError, agreement_report, label_instances, vote_distribution
from .learn.evaluate import cross_validate
from .learn.features import FEATURE_NAMES, INDEX
from .learn.forest import CostMatrix, ForestError, ForestModel, ForestParams, SchemaMismatchError, predict_many, train_forest
from .learn.ranking import gain_ratio_rank
from .memento import EmptyTimeMapError, parse_timemap
from .pipeline import ExtractionError, Extractor
from .sentiment import SentimentModel, default_model, load_corpus, train_sentiment
from .urifeat import load_uri_mapping

logger = logging.getLogger("tirm")

EXIT_OK, EXIT_VALIDATION, EXIT_INPUT = 0, 1, 2
VOTES_HEADER = "#tirm-votes v1"
REPORT_DIGITS = 6


class CliError(TirmError):
    def __init__(self, message: str, code: int = EXIT_VALIDATION):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# report helpers


def _round(obj):
    if isinstance(obj, float):
        return round(obj, REPORT_DIGITS)
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    return obj


def dumps_report(report: dict) -> str:
    return json.dumps(_round(report), sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def _emit(report: dict, out: Optional[str]):
    if out:
        Path(out).write_text(dumps_report(report), encoding="utf-8")


def _table(rows, headers) -> str:
    cells = [[str(h) for h in headers]] + [[_fmt(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(headers))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.4f}" if abs(v) < 1 else f"{v:.2f}"
    return "-" if v is None else str(v)


def _pct(n: int, total: int) -> float:
    return 100.0 * n / total if total else 0.0


# ---------------------------------------------------------------------------
# shared loaders


def _dataset(args):
    return load_dataset(args.dataset, strict=args.strict, data_dir=args.data_dir)


def _cost(args) -> CostMatrix:
    return CostMatrix.from_costs(args.cost_fp, args.cost_fn)


def _labeled(path) -> list:
    records = load_features(path)
    unlabeled = [r.id for r in records if r.label is None]
    if unlabeled:
        raise CliError(f"{len(unlabeled)} unlabeled instance(s) in {path}: {', '.join(unlabeled[:20])}")
    return records


def _require_seed(args):
    if args.seed is None:
        raise CliError("--seed is required for this subcommand", EXIT_INPUT)


def _read_votes(path) -> dict[str, VoteRecord]:
    """Vote sources: a ``#tirm-votes v1`` file of ``{"id", "votes"}`` lines or a dataset file."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise CliError(f"{path}: empty vote file", EXIT_INPUT)
    out: dict[str, VoteRecord] = {}
    if lines[0].strip() == VOTES_HEADER:
        for lineno, line in enumerate(lines[1:], 2):
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
                vid, votes = str(rec["id"]), VoteRecord.of(rec["votes"])
            except (ValueError, KeyError, TypeError, TirmError) as exc:
                raise CliError(f"{path}:{lineno}: bad vote record ({exc})", EXIT_INPUT) from None
            if vid in out:
                raise CliError(f"{path}:{lineno}: duplicate id {vid!r}", EXIT_INPUT)
            out[vid] = votes
        return out
    ds = load_dataset(path)
    for inst in ds.instances:
        if inst.votes is not None:
            out[inst.id] = inst.votes
    return out


# ---------------------------------------------------------------------------
# subcommands


def cmd_extract(args) -> int:
    ds = _dataset(args)
    if args.sentiment_model:
        model = SentimentModel.load(args.sentiment_model)
    elif args.sentiment_corpus:
        model = train_sentiment(load_corpus(args.sentiment_corpus))
    else:
        model = default_model()
    gaz = load_gazetteer(args.gazetteer) if args.gazetteer else sample_gazetteer()
    mapping = load_uri_mapping(args.uri_map) if args.uri_map else {}
    extractor = Extractor(model, gaz, mapping, strict=args.strict)
    vectors, log = extractor.extract_all(ds, jobs=args.jobs)
    out = Path(args.out)
    persist_features(out, [i.id for i in ds.instances], vectors)
    Path(str(out) + ".log").write_text(
        "".join(json.dumps(e, sort_keys=True) + "\n" for e in log), encoding="utf-8")
    partial = sum(1 for e in log if e["status"] != "ok")
    print(f"extracted {len(vectors)} feature vector(s) to {out} ({partial} partial)")
    return EXIT_OK


def cmd_label(args) -> int:
    ds = _dataset(args)
    policy = AggregationPolicy(args.vote_threshold, args.min_agreement)
    labeled = {inst.id: lab for inst, lab in label_instances(ds.instances, policy)}
    counts = Counter(labeled.values())
    for cls in Relevancy:
        if counts[cls] == 0:
            raise CliError(f"policy k={policy.k}, min_agreement={policy.min_agreement} leaves no "
                           f"{cls.value} instances")
    records = [r for r in load_features(args.features) if r.id in labeled]
    missing = sorted(set(labeled) - {r.id for r in records})
    if missing:
        raise CliError(f"labeled instances without feature vectors: {', '.join(missing[:20])}", EXIT_INPUT)
    persist_features(args.out, [r.id for r in records], [r.vector for r in records],
                     [labeled[r.id] for r in records])
    print(f"kept {len(records)} of {len(ds)} instance(s): "
          f"Relevant {counts[Relevancy.RELEVANT]}, NonRelevant {counts[Relevancy.NON_RELEVANT]}")
    return EXIT_OK


def cmd_votes(args) -> int:
    ds = _dataset(args)
    voted = [i for i in ds.instances if i.votes is not None]
    before = vote_distribution(voted)
    policy = AggregationPolicy(args.vote_threshold, args.min_agreement)
    kept = label_instances(voted, policy)
    n_rel = sum(1 for _, lab in kept if lab is Relevancy.RELEVANT)
    after = {"total": len(kept), "n_relevant": n_rel, "n_nonrelevant": len(kept) - n_rel,
             "pct_relevant": round(_pct(n_rel, len(kept)), 2),
             "pct_nonrelevant": round(_pct(len(kept) - n_rel, len(kept)), 2)}
    report = {"report": "votes", "version": 1, "distribution": before.as_dict(),
              "after_close_call_filter": after,
              "policy": {"k": policy.k, "min_agreement": policy.min_agreement}}
    _emit(report, args.out)
    d = before.as_dict()
    print(_table([
        ("5-0 cuts", d["n_5_0"], d["pct_5_0"]), ("4-1 cuts", d["n_4_1"], d["pct_4_1"]),
        ("3-2 close calls", d["n_3_2"], d["pct_3_2"]),
        ("Relevant", d["n_relevant"], d["pct_relevant"]),
        ("NonRelevant", d["n_nonrelevant"], d["pct_nonrelevant"]),
        ("kept Relevant", after["n_relevant"], after["pct_relevant"]),
        ("kept NonRelevant", after["n_nonrelevant"], after["pct_nonrelevant"]),
    ], ("outcome", "count", "%")))
    return EXIT_OK


def cmd_train(args) -> int:
    _require_seed(args)
    records = _labeled(args.features)
    params = ForestParams(n_trees=args.n_trees, mtry=args.mtry)
    model = train_forest([(r.vector, r.label) for r in records], params, _cost(args), args.seed, jobs=args.jobs)
    digest = hashlib.sha1(Path(args.features).read_bytes()).hexdigest()
    model.provenance = {"features_file": Path(args.features).name, "features_sha1": digest,
                        "n_instances": len(records)}
    model.save(args.model)
    print(f"trained {model.n_trees} trees on {len(records)} instance(s); model written to {args.model}")
    return EXIT_OK


def cmd_crossval(args) -> int:
    _require_seed(args)
    records = _labeled(args.features)
    params = ForestParams(n_trees=args.n_trees, mtry=args.mtry)
    metrics = cross_validate([(r.vector, r.label) for r in records], args.folds, params, _cost(args),
                             args.seed, jobs=args.jobs)
    report = {"report": "crossval", "version": 1, "folds": args.folds, "seed": args.seed,
              "metrics": metrics.as_dict()}
    _emit(report, args.out)
    print(_table([("Cost-sensitive random forest", metrics.mean_absolute_error,
                   metrics.root_mean_squared_error, metrics.kappa_statistic,
                   100 * (1 - metrics.accuracy), 100 * metrics.accuracy)],
                 ("classifier", "MAE", "RMSE", "kappa", "incorrect %", "correct %")))
    rows = [(m.precision, m.recall, m.f_measure, name) for name, m in metrics.per_class.items()]
    rows.append((metrics.weighted_precision, metrics.weighted_recall, metrics.weighted_f_measure, "weighted"))
    print()
    print(_table(rows, ("precision", "recall", "F-measure", "class")))
    return EXIT_OK


def cmd_rank(args) -> int:
    records = _labeled(args.features)
    ranking = gain_ratio_rank([(r.vector, r.label) for r in records])
    report = {"report": "rank", "version": 1,
              "ranking": [{"rank": i, "feature": f, "gain_ratio": g} for i, (f, g) in enumerate(ranking, 1)]}
    _emit(report, args.out)
    print(_table([(i, f, g) for i, (f, g) in enumerate(ranking[:args.top], 1)], ("rank", "feature", "gain ratio")))
    return EXIT_OK


def _liveness_or_none(ds, args):
    fetcher = Fetcher(args.capture_dir or ".tirm-capture") if args.online else None
    try:
        s = liveness_summary(ds, fetcher)
    except LivenessError as exc:
        logger.warning("%s", exc)
        return None
    return {"pct_status_200": s.pct_status_200, "pct_status_other": s.pct_status_other}


def _classified(args):
    model = ForestModel.load(args.model)
    records = load_features(args.features, expect_schema=model.schema)
    return model, records, predict_many(model, [r.vector for r in records])


def cmd_classify(args) -> int:
    model, records, preds = _classified(args)
    rows = [{"id": r.id, "relevancy": lab.value, "p_relevant": p[0], "p_nonrelevant": p[1]}
            for r, (lab, p) in zip(records, preds)]
    n_rel = sum(1 for row in rows if row["relevancy"] == Relevancy.RELEVANT.value)
    summary = {"n": len(rows), "pct_relevant": _pct(n_rel, len(rows)),
               "pct_nonrelevant": _pct(len(rows) - n_rel, len(rows)), "liveness": None}
    if args.dataset:
        summary["liveness"] = _liveness_or_none(_dataset(args), args)
    report = {"report": "classify", "version": 1, "instances": rows, "summary": summary}
    _emit(report, args.out)
    live = summary["liveness"] or {}
    print(_table([(Path(args.features).name, live.get("pct_status_200"), live.get("pct_status_other"),
                   summary["pct_relevant"], summary["pct_nonrelevant"])],
                 ("dataset", "status 200 %", "404/other %", "Relevant %", "NonRelevant %")))
    return EXIT_OK


def cmd_tirm(args) -> int:
    if not args.dataset:
        raise CliError("tirm needs --dataset for timemaps and target URIs", EXIT_INPUT)
    ds = _dataset(args)
    model, records, preds = _classified(args)
    by_id = {inst.id: inst for inst in ds.instances}
    sim_slot = INDEX["sim_past_current"]
    rows, verdicts = [], []
    for rec, (lab, p) in zip(records, preds):
        inst = by_id.get(rec.id)
        if inst is None:
            raise CliError(f"feature record {rec.id!r} not in dataset", EXIT_INPUT)
        row = {"id": rec.id, "relevancy": lab.value, "p_relevant": p[0], "p_nonrelevant": p[1],
               "sim_past_current": rec.vector.values[sim_slot], "change": None, "quadrant": None,
               "intention": None, "recommendation": None, "target_uri": None, "error": None,
               "delta_signed_hours": rec.vector["delta_signed_hours"]}
        rows.append(row)
        sim = row["sim_past_current"]
        if sim is None:
            row["error"] = "past/current similarity unavailable"
            continue
        change = change_state(sim, args.change_threshold)
        quadrant, intention = map_tirm(change, lab)
        row.update(change=change.value, quadrant=quadrant.value, intention=intention.value)
        verdicts.append(quadrant)
        tm = None
        if inst.timemap_ref:
            try:
                tm = parse_timemap(ds.resolve(inst.timemap_ref).read_text(encoding="utf-8", errors="replace"))
            except (OSError, EmptyTimeMapError):
                tm = None
        try:
            rec_kind, target = recommend(intention, tm, inst.t_tweet, inst.long_uri or inst.short_uri)
            row.update(recommendation=rec_kind.value, target_uri=target)
        except UnservableIntentionError as exc:
            row["error"] = str(exc)

    n = len(rows)
    n_rel = sum(1 for row in rows if row["relevancy"] == Relevancy.RELEVANT.value)
    nq = len(verdicts)
    quadrants = {q.value: _pct(sum(1 for v in verdicts if v is q), nq) for q in Quadrant} if nq else {}
    intentions = Counter(row["intention"] for row in rows if row["intention"])
    summary = {
        "n": n,
        "pct_relevant": _pct(n_rel, n),
        "pct_nonrelevant": _pct(n - n_rel, n),
        "liveness": _liveness_or_none(ds, args),
        "quadrants": quadrants,
        "intentions": {k: _pct(v, nq) for k, v in sorted(intentions.items())},
        "n_errors": sum(1 for row in rows if row["error"]),
    }
    report = {"report": "tirm", "version": 1,
              "config": {"change_threshold": args.change_threshold, "cost": [list(r) for r in model.cost.cost],
                         "model_seed": model.seed, "schema": model.schema},
              "instances": rows, "summary": summary}
    _emit(report, args.out)
    q = quadrants or {x.value: 0.0 for x in Quadrant}
    print(_table([
        ("Changed", q[Quadrant.CHANGED_RELEVANT.value], q[Quadrant.CHANGED_NONRELEVANT.value]),
        ("Not Changed", q[Quadrant.NOTCHANGED_RELEVANT.value], q[Quadrant.NOTCHANGED_NONRELEVANT.value]),
    ], ("", "Relevant %", "Not Relevant %")))
    return EXIT_OK


def cmd_agreement(args) -> int:
    report = agreement_report(_read_votes(args.reference), _read_votes(args.crowd))
    report = {"report": "agreement", "version": 1, **report}
    _emit(report, args.out)
    print(_table([
        ("Agreement in three or more votes", report["agree_3_or_more_pct"]),
        ("Agreement in four or more votes", report["agree_4_or_more_pct"]),
        ("Agreement with all five votes", report["agree_all_5_pct"]),
        ("Cohen's kappa", report["cohen_kappa"]),
    ], ("measure", "value")))
    return EXIT_OK


def cmd_liveness(args) -> int:
    ds = _dataset(args)
    fetcher = Fetcher(args.capture_dir or ".tirm-capture", jobs=args.jobs) if args.online else None
    if fetcher is not None:
        pending = [i.long_uri or i.short_uri for i in ds.instances if i.http_status is None]
        fetcher.status_many(pending)
    s = liveness_summary(ds, fetcher)
    report = {"report": "liveness", "version": 1, "n": s.n,
              "pct_status_200": s.pct_status_200, "pct_status_other": s.pct_status_other}
    _emit(report, args.out)
    print(_table([(ds.name, s.pct_status_200, s.pct_status_other)], ("dataset", "status 200 %", "404/other %")))
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tirm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, dataset=True, dataset_required=True):
        if dataset:
            p.add_argument("--dataset", required=dataset_required, help="#tirm-dataset v1 file")
            p.add_argument("--data-dir", default=None,
                           help="root for relative artifact paths (default: $TIRM_DATA_DIR or dataset dir)")
            p.add_argument("--strict", action="store_true", help="missing or corrupt artifacts are errors")
        p.add_argument("--out", help="machine-readable output path")
        p.add_argument("--jobs", type=int, default=1, help="parallel workers")
        p.add_argument("--online", action="store_true", help="fetch missing HTTP statuses")
        p.add_argument("--capture-dir", default=None, help="fetch capture directory for --online")

    def policy(p):
        p.add_argument("--vote-threshold", type=float, default=0.5, help="k: Relevant iff share of Relevant votes > k")
        p.add_argument("--min-agreement", type=float, default=0.8, help="close-call filter: majority share >= this")

    def forest(p):
        p.add_argument("--features", required=True, help="labeled feature file")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--n-trees", type=int, default=100)
        p.add_argument("--mtry", type=int, default=ForestParams().mtry)
        p.add_argument("--cost-fp", type=float, default=5.0,
                       help="cost of predicting NonRelevant for a Relevant instance")
        p.add_argument("--cost-fn", type=float, default=1.0,
                       help="cost of predicting Relevant for a NonRelevant instance")

    p = sub.add_parser("extract", help="compute feature vectors for every instance")
    common(p)
    p.add_argument("--uri-map", help="short<TAB>long sidecar file")
    p.add_argument("--gazetteer", help="celebrity name list (default: bundled sample)")
    p.add_argument("--sentiment-corpus", help="label<TAB>text training corpus (default: bundled)")
    p.add_argument("--sentiment-model", help="saved sentiment model")
    p.set_defaults(func=cmd_extract, out_required=True)

    p = sub.add_parser("label", help="attach aggregated crowd labels, dropping close calls")
    common(p)
    policy(p)
    p.add_argument("--features", required=True)
    p.set_defaults(func=cmd_label, out_required=True)

    p = sub.add_parser("votes", help="vote-outcome distribution before and after close-call filtering")
    common(p)
    policy(p)
    p.set_defaults(func=cmd_votes)

    p = sub.add_parser("train", help="train the cost-sensitive forest")
    common(p, dataset=False)
    forest(p)
    p.add_argument("--model", required=True, help="model output path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("crossval", help="stratified k-fold cross-validation")
    common(p, dataset=False)
    forest(p)
    p.add_argument("--folds", type=int, default=10)
    p.set_defaults(func=cmd_crossval)

    p = sub.add_parser("rank", help="gain-ratio feature ranking")
    common(p, dataset=False)
    p.add_argument("--features", required=True)
    p.add_argument("--top", type=int, default=len(FEATURE_NAMES))
    p.set_defaults(func=cmd_rank)

    for name, func, needs in (("classify", cmd_classify, False), ("tirm", cmd_tirm, True)):
        p = sub.add_parser(name, help="relevancy per instance" if name == "classify"
                           else "relevancy, change state, intention and recommendation")
        common(p, dataset_required=needs)
        p.add_argument("--model", required=True)
        p.add_argument("--features", required=True)
        p.add_argument("--change-threshold", type=float, default=CHANGE_THRESHOLD)
        p.set_defaults(func=func)

    p = sub.add_parser("agreement", help="agreement between two vote sources")
    common(p, dataset=False)
    p.add_argument("--reference", required=True, help="reference votes (e.g. expert group)")
    p.add_argument("--crowd", required=True, help="crowd votes for the same ids")
    p.set_defaults(func=cmd_agreement)

    p = sub.add_parser("liveness", help="share of live (200) vs missing resources")
    common(p)
    p.set_defaults(func=cmd_liveness)
    return parser


def _validate(args):
    if getattr(args, "out_required", False) and not args.out:
        raise CliError(f"{args.command} needs --out", EXIT_INPUT)
    if hasattr(args, "change_threshold") and not 0.0 <= args.change_threshold <= 1.0:
        raise CliError("--change-threshold must lie in [0, 1]", EXIT_INPUT)
    if hasattr(args, "folds") and args.folds < 2:
        raise CliError("--folds must be >= 2", EXIT_INPUT)
    if args.jobs < 1:
        raise CliError("--jobs must be >= 1", EXIT_INPUT)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        _validate(args)
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except (DatasetError, FeatureFileError, SchemaMismatchError, SnapshotError, ExtractionError,
            ParseError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (LabelingError, ForestError, LivenessError, TirmError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
