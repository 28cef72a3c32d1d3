"""Command-line front end for the full pipeline.

Verbs: reproduce-tables, generate, train, predict, evaluate, audit,
baseline, k-anon. Every flag can also be supplied through an
environment variable named RISKFOREST_<FLAG> (dashes become
underscores), e.g. RISKFOREST_SEED=7.

Exit codes are a stable contract: 0 success, 1 validation or tolerance
failure, 2 usage error.

Each command writes fixed file names under --out: a Markdown report for
humans and a JSON report for CI, both opening with a reproducibility
header that serializes the resolved configuration. The --threads flag
caps training workers without changing any output, so it is the one
option the header omits. Commands that draw randomness (generate,
train) refuse to run without --seed.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .data import (
    Dataset,
    FeatureSchema,
    VALIDATION_MARGINALS,
    fixture_path,
    generate_synthetic,
    generate_two_group,
    hart_schema,
    k_anonymity,
    load_csv,
    load_unlabeled_csv,
    write_csv,
)
from .errors import (
    CalibrationError,
    DataError,
    FingerprintMismatchError,
    SchemaError,
    UsageError,
)
from .fairness import (
    ALL_CHECKS,
    GroupedOutcomes,
    impossibility_search,
)
from .forest import (
    ForestConfig,
    load_forest,
    oob_predict,
    predict_dataset,
    save_forest,
    train_forest,
)
from .metrics import (
    ConfusionMatrix,
    confusion_from_predictions,
    derive_metrics,
    random_baseline,
)
from .reference import PUBLISHED, TABLE_TOLERANCE

ENV_PREFIX = "RISKFOREST_"


def _env(name: str, fallback=None):
    return os.environ.get(ENV_PREFIX + name, fallback)


def _parse_floats(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(t) for t in text.split(","))
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


# -- report plumbing -----------------------------------------------------


def _header(command: str, args, keys) -> dict:
    config = {}
    for key in keys:
        value = getattr(args, key)
        if isinstance(value, Path):
            value = str(value)
        config[key.replace("_", "-")] = value
    return {"tool": "riskforest", "version": __version__,
            "command": command, "config": config}


def _write_reports(out_dir: Path, stem: str, header: dict, result: dict,
                   markdown_body: str) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = {"header": header, "result": result}
    (out_dir / f"{stem}.json").write_text(
        json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    md = ["# riskforest " + header["command"], "",
          "```json", json.dumps(header, indent=2, sort_keys=True), "```", "",
          markdown_body.rstrip(), ""]
    (out_dir / f"{stem}.md").write_text("\n".join(md), encoding="utf-8")


def _load_schema(args) -> FeatureSchema:
    schema = (FeatureSchema.load(args.schema) if args.schema else hart_schema())
    if getattr(args, "group", None):
        schema = schema.with_group(args.group)
    return schema


def _require_seed(args) -> int:
    if args.seed is None:
        raise UsageError("--seed is required (or set RISKFOREST_SEED)")
    return args.seed


def _require_out(args) -> Path:
    if args.out is None:
        raise UsageError("--out is required (or set RISKFOREST_OUT)")
    return Path(args.out)


# -- commands ------------------------------------------------------------


def cmd_reproduce_tables(args) -> int:
    out = _require_out(args)
    rows = []
    all_ok = True
    for key, published in PUBLISHED.items():
        name = published["fixture"]
        path = Path(args.fixture_dir) / name if args.fixture_dir else fixture_path(name)
        if not os.path.exists(str(path)):
            raise DataError(f"missing fixture {path}")
        report = derive_metrics(ConfusionMatrix.from_csv(path), "High", "Low")
        computed = {"overall_accuracy": report.overall_accuracy,
                    "very_dangerous": report.very_dangerous,
                    "very_cautious": report.very_cautious}
        for label in report.labels:
            computed[f"sensitivity_{label}"] = report.per_label[label].sensitivity
            computed[f"precision_{label}"] = report.per_label[label].precision
        targets = {"overall_accuracy": published["overall_accuracy"],
                   "very_dangerous": published["very_dangerous"],
                   "very_cautious": published["very_cautious"]}
        for label, v in published["sensitivity"].items():
            targets[f"sensitivity_{label}"] = v
        for label, v in published["precision"].items():
            targets[f"precision_{label}"] = v
        for metric, target in targets.items():
            value = float(computed[metric])
            delta = abs(value - target)
            ok = bool(delta <= TABLE_TOLERANCE)
            all_ok = all_ok and ok
            rows.append({"table": key, "metric": metric, "computed": round(value, 6),
                         "published": target, "delta": round(delta, 6), "ok": ok})

    lines = ["| Table | Metric | Computed | Published | Delta | OK |",
             "| --- | --- | --- | --- | --- | --- |"]
    for r in rows:
        lines.append(f"| {r['table']} | {r['metric']} | {r['computed']:.4f} |"
                     f" {r['published']:.4f} | {r['delta']:.5f} |"
                     f" {'yes' if r['ok'] else 'NO'} |")
    header = _header("reproduce-tables", args, ["fixture_dir"])
    _write_reports(out, "reproduction", header,
                   {"tolerance": TABLE_TOLERANCE, "all_ok": all_ok, "rows": rows},
                   "\n".join(lines))
    failing = [r for r in rows if not r["ok"]]
    for r in failing:
        print(f"FAIL {r['table']}.{r['metric']}: computed {r['computed']:.4f}"
              f" vs published {r['published']:.4f}", file=sys.stderr)
    print(f"reproduce-tables: {len(rows) - len(failing)}/{len(rows)} figures"
          f" within {TABLE_TOLERANCE}")
    return 0 if all_ok else 1


def cmd_generate(args) -> int:
    out = _require_out(args)
    seed = _require_seed(args)
    if args.two_group and not args.group:
        args.group = "Group"
    schema = _load_schema(args)
    marginals = (_parse_floats(args.marginals) if args.marginals
                 else VALIDATION_MARGINALS)
    if args.two_group:
        ds = generate_two_group(schema, args.n, marginals, args.group_gap,
                                args.signal, seed)
    else:
        ds = generate_synthetic(schema, args.n, marginals, args.signal, seed)
    out.mkdir(parents=True, exist_ok=True)
    write_csv(ds, out / "synthetic.csv")
    header = _header("generate", args, ["n", "seed", "signal", "marginals",
                                        "two_group", "group_gap", "group",
                                        "schema"])
    freq = {name: round(float(f), 6)
            for name, f in zip(schema.label_set, ds.label_marginals())}
    _write_reports(out, "generate", header,
                   {"rows": len(ds), "label_frequencies": freq,
                    "provenance": ds.provenance, "file": "synthetic.csv"},
                   "Label frequencies: "
                   + ", ".join(f"{k}={v}" for k, v in freq.items()))
    print(f"generate: wrote {len(ds)} rows to {out / 'synthetic.csv'}")
    return 0


def _forest_config(args, seed: int) -> ForestConfig:
    weights = _parse_floats(args.weights) if args.weights else None
    return ForestConfig(
        n_trees=args.trees,
        class_weights=weights,
        feature_subset_size=args.feature_subset,
        min_leaf=args.min_leaf,
        max_depth=args.max_depth,
        master_seed=seed,
        bootstrap_size=args.bootstrap_size,
    )


def cmd_train(args) -> int:
    out = _require_out(args)
    seed = _require_seed(args)
    if not args.data:
        raise UsageError("--data is required")
    schema = _load_schema(args)
    ds = load_csv(args.data, schema)
    config = _forest_config(args, seed)
    forest = train_forest(ds, config, threads=args.threads)
    out.mkdir(parents=True, exist_ok=True)
    save_forest(forest, out / "model.forest")

    oob_labels, oob_counts = oob_predict(forest, ds)
    have = oob_labels >= 0
    excluded = int((~have).sum())
    result = {
        "n_trees": forest.config.n_trees,
        "schema_fingerprint": forest.fingerprint,
        "class_weights": list(forest.config.class_weights),
        "feature_subset_size": forest.config.feature_subset_size,
        "min_leaf": forest.config.min_leaf,
        "max_depth": forest.config.max_depth,
        "bootstrap_size": forest.config.bootstrap_size,
        "rows": len(ds),
        "oob_no_estimate_rows": excluded,
    }
    body = [f"Trained {forest.config.n_trees} trees on {len(ds)} rows.",
            f"Rows with no out-of-bag estimate: {excluded}."]
    if have.any():
        pred_names = [schema.label_set[v] for v in oob_labels[have]]
        act_names = [schema.label_set[v] for v in ds.y[have]]
        cm = confusion_from_predictions(pred_names, act_names, schema.label_set)
        oob = derive_metrics(cm, schema.label_set[0], schema.label_set[-1])
        result["oob_overall_accuracy"] = oob.overall_accuracy
        result["oob_report"] = oob.to_dict()
        body.append(f"Out-of-bag overall accuracy: {oob.overall_accuracy:.4f}.")
        body.append("")
        body.append(oob.to_markdown())
    header = _header("train", args, ["data", "schema", "group", "trees", "seed",
                                     "weights", "min_leaf", "max_depth",
                                     "feature_subset", "bootstrap_size"])
    _write_reports(out, "oob_report", header, result, "\n".join(body))
    print(f"train: wrote {out / 'model.forest'}"
          f" ({forest.config.n_trees} trees)")
    return 0


def cmd_predict(args) -> int:
    out = _require_out(args)
    if not args.data or not args.model:
        raise UsageError("--model and --data are required")
    schema = _load_schema(args)
    forest = load_forest(args.model, schema)
    X, y, groups = load_unlabeled_csv(args.data, schema)
    ds_like = Dataset(schema, X, np.zeros(len(X), dtype=np.int64), groups)
    pred, tally = predict_dataset(forest, ds_like)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "predictions.csv", "w", encoding="utf-8") as fh:
        names = ",".join(f"votes_{name}" for name in forest.labels)
        fh.write(f"row,predicted,{names}\n")
        for i in range(len(pred)):
            votes = ",".join(str(int(v)) for v in tally[i])
            fh.write(f"{i},{forest.labels[pred[i]]},{votes}\n")
    counts = {name: int((pred == k).sum())
              for k, name in enumerate(forest.labels)}
    header = _header("predict", args, ["data", "model", "schema", "group"])
    _write_reports(out, "predict_report", header,
                   {"rows": len(pred), "predicted_counts": counts,
                    "file": "predictions.csv"},
                   "Predicted counts: "
                   + ", ".join(f"{k}={v}" for k, v in counts.items()))
    print(f"predict: wrote {len(pred)} predictions to {out / 'predictions.csv'}")
    return 0


def cmd_evaluate(args) -> int:
    out = _require_out(args)
    if not args.data or not args.model:
        raise UsageError("--model and --data are required")
    schema = _load_schema(args)
    forest = load_forest(args.model, schema)
    ds = load_csv(args.data, schema)
    pred, _ = predict_dataset(forest, ds)
    pred_names = [schema.label_set[v] for v in pred]
    act_names = [schema.label_set[v] for v in ds.y]
    cm = confusion_from_predictions(pred_names, act_names, schema.label_set)
    report = derive_metrics(cm, schema.label_set[0], schema.label_set[-1])
    out.mkdir(parents=True, exist_ok=True)
    cm.to_csv(out / "confusion.csv")
    header = _header("evaluate", args, ["data", "model", "schema", "group"])
    _write_reports(out, "metrics", header,
                   {"confusion_file": "confusion.csv", "rows": len(ds),
                    "metrics": report.to_dict()},
                   report.to_markdown())
    print(f"evaluate: overall accuracy {report.overall_accuracy:.4f}"
          f" on {len(ds)} rows")
    return 0


def cmd_audit(args) -> int:
    out = _require_out(args)
    if not args.data or not args.model:
        raise UsageError("--model and --data are required")
    schema = _load_schema(args)
    if schema.group_attribute is None:
        raise UsageError("audit needs a group column: pass --group")
    forest = load_forest(args.model, schema)
    ds = load_csv(args.data, schema)
    if ds.groups is None:
        raise DataError(f"{args.data} carries no {schema.group_attribute!r} column")
    pred, tally = predict_dataset(forest, ds)
    positive = schema.label_set[0]
    pred_names = np.array([schema.label_set[v] for v in pred], dtype=object)
    act_names = np.array([schema.label_set[v] for v in ds.y], dtype=object)
    scores = tally[:, 0] / forest.config.n_trees  # high-risk vote share

    group_values = sorted(set(ds.groups))
    if len(group_values) < 2:
        raise DataError("audit needs at least two groups in the data")
    preds_by_group = {
        g: (pred_names[ds.groups == g], act_names[ds.groups == g])
        for g in group_values
    }
    grouped = GroupedOutcomes.from_predictions(preds_by_group, positive)
    verdicts = [check(grouped, args.epsilon) for check in ALL_CHECKS]

    def fmt(value):
        return "undefined" if value is None else f"{value:.4f}"

    body = [f"Positive label: {positive}. Epsilon: {args.epsilon}.", "",
            "| Criterion | Statistic | "
            + " | ".join(str(g) for g in group_values) + " | Gap | Verdict |",
            "| --- | --- | " + " | ".join("---" for _ in group_values)
            + " | --- | --- |"]
    for v in verdicts:
        stat_names = next(iter(v.per_group.values())).keys()
        for k, stat in enumerate(stat_names):
            cells = " | ".join(fmt(v.per_group[g][stat]) for g in group_values)
            tail = (f"{fmt(v.gap)} | {'pass' if v.passed else 'FAIL'}"
                    if k == 0 else " | ")
            body.append(f"| {v.criterion if k == 0 else ''} | {stat} |"
                        f" {cells} | {tail} |")
        for note in v.notes:
            body.append(f"| | note: {note} | " +
                        " | ".join("" for _ in group_values) + " | | |")

    result = {"epsilon": args.epsilon, "positive_label": positive,
              "groups": {str(g): int((ds.groups == g).sum()) for g in group_values},
              "verdicts": [v.to_dict() for v in verdicts]}

    if len(group_values) == 2:
        scores_by_group = {
            g: (scores[ds.groups == g], act_names[ds.groups == g])
            for g in group_values
        }
        searchable = GroupedOutcomes.from_scores(scores_by_group, positive)
        try:
            imp = impossibility_search(searchable, args.epsilon)
            result["impossibility"] = imp.to_dict()
            body += ["",
                     f"Joint threshold search over {imp.pairs_scanned} pairs:"
                     f" {'a feasible pair exists' if imp.jointly_feasible else 'no jointly feasible pair'}"
                     f" at epsilon {args.epsilon}."]
        except DataError as exc:
            result["impossibility"] = {"skipped": str(exc)}
            body += ["", f"Joint threshold search skipped: {exc}"]

    header = _header("audit", args, ["data", "model", "schema", "group",
                                     "epsilon"])
    _write_reports(out, "fairness", header, result, "\n".join(body))
    failed = [v.criterion for v in verdicts if not v.passed]
    print("audit: " + ("all criteria pass" if not failed
                       else "failing: " + ", ".join(failed)))
    return 0


def cmd_baseline(args) -> int:
    out = _require_out(args)
    if args.marginals:
        marginals = _parse_floats(args.marginals)
        source = "flag"
    elif args.data:
        schema = _load_schema(args)
        ds = load_csv(args.data, schema)
        marginals = tuple(float(v) for v in ds.label_marginals())
        source = str(args.data)
    else:
        marginals = VALIDATION_MARGINALS
        source = "bundled validation marginals"
    value = random_baseline(marginals)
    header = _header("baseline", args, ["marginals", "data", "schema"])
    _write_reports(out, "baseline", header,
                   {"marginals": list(marginals), "source": source,
                    "accuracy": value},
                   f"Random-guesser accuracy over marginals {list(marginals)}:"
                   f" **{value:.4f}**")
    print(f"baseline: {value:.4f}")
    return 0


def cmd_k_anon(args) -> int:
    out = _require_out(args)
    if not args.data:
        raise UsageError("--data is required")
    if not args.quasi:
        raise UsageError("--quasi is required (comma-separated column names)")
    schema = _load_schema(args)
    ds = load_csv(args.data, schema)
    quasi = [q.strip() for q in args.quasi.split(",") if q.strip()]
    k = k_anonymity(ds, quasi)
    header = _header("k-anon", args, ["data", "schema", "group", "quasi"])
    _write_reports(out, "kanon", header,
                   {"k": k, "quasi_identifiers": quasi, "rows": len(ds)},
                   f"k-anonymity of {len(ds)} rows under"
                   f" {{{', '.join(quasi)}}}: **k = {k}**")
    print(f"k-anon: k = {k}")
    return 0


# -- parser ----------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="riskforest",
        description="Train, evaluate, and audit cost-sensitive risk forests.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, *, seed=False, model=False, threads=False, epsilon=False):
        p.add_argument("--schema", default=_env("SCHEMA"),
                       help="schema file (default: bundled custody schema)")
        p.add_argument("--group", default=_env("GROUP"),
                       help="treat this column as the protected-group attribute")
        p.add_argument("--data", default=_env("DATA"), help="dataset CSV")
        p.add_argument("--out", default=_env("OUT"), help="output directory")
        if seed:
            p.add_argument("--seed", type=int, default=_env("SEED"))
        if model:
            p.add_argument("--model", default=_env("MODEL"),
                           help="serialized forest file")
        if threads:
            p.add_argument("--threads", type=int, default=_env("THREADS", "1"),
                           help="worker cap; never changes outputs")
        if epsilon:
            p.add_argument("--epsilon", type=float,
                           default=_env("EPSILON", "0.05"))

    p = sub.add_parser("reproduce-tables",
                       help="recompute the bundled fixture figures and diff"
                            " them against the published ones")
    p.add_argument("--fixture-dir", default=_env("FIXTURE_DIR"))
    p.add_argument("--out", default=_env("OUT"))
    p.set_defaults(func=cmd_reproduce_tables)

    p = sub.add_parser("generate", help="write a synthetic dataset CSV")
    common(p, seed=True)
    p.add_argument("--n", type=int, default=_env("N", "10000"))
    p.add_argument("--signal", type=float, default=_env("SIGNAL", "0.8"))
    p.add_argument("--marginals", default=_env("MARGINALS"))
    p.add_argument("--two-group", action="store_true",
                   default=_env("TWO_GROUP") is not None,
                   help="plant a high-risk base-rate gap between two groups")
    p.add_argument("--group-gap", type=float, default=_env("GROUP_GAP", "0.2"))
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("train", help="train a forest and report OOB accuracy")
    common(p, seed=True, threads=True)
    p.add_argument("--trees", type=int, default=_env("TREES", "509"))
    p.add_argument("--weights", default=_env("WEIGHTS"),
                   help="comma-separated per-label class weights")
    p.add_argument("--min-leaf", type=int, default=_env("MIN_LEAF", "5"))
    p.add_argument("--max-depth", type=int, default=_env("MAX_DEPTH", "16"))
    p.add_argument("--feature-subset", type=int,
                   default=_env("FEATURE_SUBSET"))
    p.add_argument("--bootstrap-size", type=int,
                   default=_env("BOOTSTRAP_SIZE"))
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="write per-row labels and vote tallies")
    common(p, model=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("evaluate",
                       help="confusion matrix and performance measures")
    common(p, model=True)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("audit", help="group fairness report")
    common(p, model=True, epsilon=True)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("baseline", help="random-guesser accuracy for marginals")
    common(p)
    p.add_argument("--marginals", default=_env("MARGINALS"))
    p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("k-anon", help="k-anonymity of a dataset")
    common(p)
    p.add_argument("--quasi", default=_env("QUASI"),
                   help="comma-separated quasi-identifier columns")
    p.set_defaults(func=cmd_k_anon)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return 0 if code in (0, None) else int(code)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (DataError, SchemaError, FingerprintMismatchError, CalibrationError,
            OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
