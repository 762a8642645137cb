"""Command-line pipeline: ingest, tune, train, generate, score, explain, serve.

Each command reads and writes the package's JSON/CSV interfaces, so a full
run is reproducible from shell history alone.  Machine-readable results go
to stdout (or --out); progress notes go to stderr.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
from pathlib import Path

import numpy as np
import uvicorn

from .artifact import ModelArtifact, load_model, make_background, save_model
from .datagen import (
    GanConfig,
    fit_codec,
    generate,
    make_balance_plan,
    rows_matching_conditions,
    train_gan,
)
from .features import DeltaSpec, FeatureEncoder
from .measures import load_measure_map
from .metrics import evaluate_multilabel
from .mlp import MLPConfig, forward, train
from .quality import diagnostic_report, quality_report
from .schema import (
    SplitSpec,
    drop_nulls,
    load_dataset,
    load_schema,
    save_dataset,
    split,
    zscore_flags,
)
from .service import create_app, explain_payload
from .tuning import SearchSpace, optimize, write_trial_log

DEFAULT_LISTEN = "127.0.0.1:8000"
LISTEN_ENV_VAR = "RETROKIT_LISTEN"


class CliError(RuntimeError):
    """User-facing command failure; message printed without a traceback."""


def _read_json(path: str | Path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _write_json(doc, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2)
        fh.write("\n")


def _emit(doc, out: str | None) -> None:
    if out:
        _write_json(doc, out)
        print(f"wrote {out}", file=sys.stderr)
    else:
        print(json.dumps(doc, indent=2))


def _note(message: str) -> None:
    print(message, file=sys.stderr)


def _sha256_file(path: str | Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _load_clean(path: str | Path, schema) -> list:
    """Load a CSV that is expected to be fully parseable (post-ingest)."""
    result = load_dataset(path, schema)
    if result.rejected:
        first = result.rejected[0]
        raise CliError(
            f"{path}: {len(result.rejected)} unparseable rows"
            f" (first: row {first.row_index}, column {first.column!r}:"
            f" {first.message}); run ingest first"
        )
    if not result.records:
        raise CliError(f"{path}: no data rows")
    return result.records


def _delta_from(arg: str | None) -> DeltaSpec | None:
    if arg is None:
        return None
    parts = [p.strip() for p in arg.split(",")]
    if len(parts) != 3:
        raise CliError(
            "--delta expects INITIAL_COL,FINAL_COL,AREA_COL (three names)"
        )
    return DeltaSpec(*parts)


# ---------------------------------------------------------------- ingest


def cmd_ingest(args) -> int:
    schema = load_schema(args.schema)
    value_map = _read_json(args.value_map) if args.value_map else None
    result = load_dataset(args.data, schema, value_map=value_map)
    for line in result.warnings:
        _note(line)

    required = [c.name for c in schema.modeled_columns()]
    kept, null_report = drop_nulls(result.records, required, schema)

    flags: dict[str, list] = {}
    for column in args.zscore or []:
        indices = zscore_flags(kept, column, schema, threshold=args.zscore_threshold)
        flags[column] = [
            {"index": i, "value": kept[i][column]} for i in indices
        ]

    requested = sorted(set(args.drop or []))
    out_of_range = [i for i in requested if not 0 <= i < len(kept)]
    if out_of_range:
        raise CliError(f"--drop indices out of range: {out_of_range}")
    dropped = set(requested)
    final = [r for i, r in enumerate(kept) if i not in dropped]

    save_dataset(final, schema, args.out)
    report = {
        "load": result.report(),
        "null_drops": null_report,
        # advisory flags; indices refer to the null-free table, so a later
        # --drop can quote them verbatim
        "outlier_flags": flags,
        "dropped_by_request": requested,
        "n_written": len(final),
        "output": str(args.out),
    }
    _emit(report, args.report)
    return 0


# ---------------------------------------------------------------- split audit


def _test_index_path(args) -> Path:
    if args.test_index:
        return Path(args.test_index)
    data = Path(args.data)
    return data.with_name(data.name + ".test-index.json")


def _check_test_index(args, spl) -> Path:
    """Create the persisted test-index file, or verify it byte for byte.

    The file pins (data digest, split seed, test row indices); any drift is
    a hard failure because results computed against a shifted test set are
    not comparable.
    """
    path = _test_index_path(args)
    entry = {
        "data_sha256": _sha256_file(args.data),
        "split_seed": args.split_seed,
        "test_indices": spl.test_indices,
        "digest": hashlib.sha256(
            json.dumps(spl.test_indices).encode()
        ).hexdigest(),
    }
    if not path.exists():
        _write_json(entry, path)
        _note(f"pinned test partition in {path}")
        return path
    stored = _read_json(path)
    own_digest = hashlib.sha256(
        json.dumps(stored.get("test_indices")).encode()
    ).hexdigest()
    if stored.get("digest") != own_digest:
        raise CliError(f"{path}: digest does not match its indices; file was edited")
    for key, value in entry.items():
        if key != "digest" and stored.get(key) != value:
            raise CliError(
                f"test set isolation violated: {key} in {path} is"
                f" {stored.get(key)!r}, current run has {value!r}"
            )
    return path


def _split_extra(records: list, seed: int, val_fraction: float = 0.25) -> tuple[list, list]:
    """Apportion synthetic rows between train and val with the same ratio
    the real split uses; none of them may ever reach test."""
    rng = np.random.default_rng(seed)
    perm = rng.permutation(len(records))
    n_val = round(val_fraction * len(records))
    val = [records[i] for i in perm[:n_val]]
    train_part = [records[i] for i in perm[n_val:]]
    return train_part, val


# ---------------------------------------------------------------- train


def _mlp_config(args) -> MLPConfig:
    if args.config:
        stored = _read_json(args.config)
        layer_sizes = [int(s) for s in stored["layer_sizes"]]
        learning_rate = float(stored["learning_rate"])
        batch_size = int(stored["batch_size"])
    else:
        layer_sizes = [int(s) for s in args.layers.split(",")]
        learning_rate = args.learning_rate
        batch_size = args.batch_size
    return MLPConfig(
        layer_sizes=layer_sizes,
        learning_rate=learning_rate,
        batch_size=batch_size,
        max_epochs=args.max_epochs,
        patience=args.patience,
        seed=args.seed,
    )


def cmd_train(args) -> int:
    schema = load_schema(args.schema)
    records = _load_clean(args.data, schema)
    spl = split(records, SplitSpec(seed=args.split_seed))
    _check_test_index(args, spl)

    train_recs = list(spl.train)
    val_recs = list(spl.val)
    provenance: dict = {
        "data": "real",
        "n_real_train": len(spl.train),
        "n_real_val": len(spl.val),
        "n_test_withheld": len(spl.test),
        "split_seed": args.split_seed,
    }
    if args.augment:
        synth = _load_clean(args.augment, schema)
        extra_train, extra_val = _split_extra(synth, args.split_seed)
        train_recs += extra_train
        val_recs += extra_val
        provenance["data"] = "augmented"
        provenance["n_synthetic"] = len(synth)
        provenance["synthetic_csv_sha256"] = _sha256_file(args.augment)
        if args.manifest:
            provenance["generation_manifest_sha256"] = _sha256_file(args.manifest)

    encoder = FeatureEncoder(schema, delta=_delta_from(args.delta)).fit(
        train_recs + val_recs
    )
    X = encoder.transform(train_recs, warn_clamp=False)
    Y = encoder.labels(train_recs)
    X_val = encoder.transform(val_recs, warn_clamp=False)
    Y_val = encoder.labels(val_recs)

    config = _mlp_config(args)
    model, report = train(X, Y, config, X_val, Y_val)

    background = make_background(
        encoder, train_recs, max_rows=args.background_rows, seed=config.seed
    )
    artifact = ModelArtifact(
        schema=schema,
        encoder=encoder,
        model=model,
        background=background,
        threshold=args.threshold,
        train_config={
            "layer_sizes": config.layer_sizes,
            "learning_rate": config.learning_rate,
            "batch_size": config.batch_size,
            "max_epochs": config.max_epochs,
            "patience": config.patience,
            "seed": config.seed,
        },
        provenance=provenance,
    )
    save_model(artifact, args.out)
    _emit(
        {
            "artifact_id": artifact.artifact_id,
            "output": str(args.out),
            "best_epoch": report.best_epoch,
            "stopped_epoch": report.stopped_epoch,
            "best_val_loss": min(report.val_losses),
            "n_train": len(train_recs),
            "n_val": len(val_recs),
            "n_test_withheld": len(spl.test),
            "provenance": provenance,
        },
        args.summary,
    )
    return 0


# ---------------------------------------------------------------- tune


def cmd_tune(args) -> int:
    schema = load_schema(args.schema)
    records = _load_clean(args.data, schema)
    spl = split(records, SplitSpec(seed=args.split_seed))
    encoder = FeatureEncoder(schema, delta=_delta_from(args.delta)).fit(
        spl.train + spl.val
    )
    X = encoder.transform(spl.train, warn_clamp=False)
    Y = encoder.labels(spl.train)
    X_val = encoder.transform(spl.val, warn_clamp=False)
    Y_val = encoder.labels(spl.val)

    best, trials = optimize(
        X,
        Y,
        X_val,
        Y_val,
        space=SearchSpace(),
        n_trials=args.trials,
        seed=args.seed,
        max_epochs=args.max_epochs,
        patience=args.patience,
    )
    if args.log:
        write_trial_log(trials, args.log)
        _note(f"wrote {args.log}")
    completed = [t for t in trials if t.status == "complete"]
    winner = min(completed, key=lambda t: (t.final_value, t.id))
    _emit(
        {
            "layer_sizes": list(best.layer_sizes),
            "learning_rate": best.learning_rate,
            "batch_size": best.batch_size,
            "best_value": winner.final_value,
            "winner_trial": winner.id,
            "n_trials": len(trials),
            "n_completed": len(completed),
            "n_pruned": sum(1 for t in trials if t.status == "pruned"),
        },
        args.out,
    )
    return 0


# ---------------------------------------------------------------- generate


def cmd_generate(args) -> int:
    schema = load_schema(args.schema)
    records = _load_clean(args.data, schema)
    # the generator must never see test rows, or synthetic training data
    # would leak them into augmented models
    spl = split(records, SplitSpec(seed=args.split_seed))
    _check_test_index(args, spl)
    pool = spl.train + spl.val

    codec = fit_codec(pool, schema, seed=args.seed)
    X = codec.encode(pool, np.random.default_rng(args.seed))
    match_index = rows_matching_conditions(codec, pool)
    config = GanConfig(
        epochs=args.epochs,
        batch_size=args.batch_size,
        pac=args.pac,
        seed=args.seed,
    )
    _note(f"training generator on {len(pool)} rows for {config.epochs} epochs")
    generator = train_gan(codec, X, match_index, config)

    label_names = [c.name for c in schema.label_columns()]
    labels = FeatureEncoder(schema).labels(pool)
    plan = make_balance_plan(labels, label_names, args.budget)
    synth, manifest = generate(generator, plan, seed=args.seed)

    save_dataset(synth, schema, args.out)
    manifest["schema_fingerprint"] = schema.fingerprint()
    manifest["data_sha256"] = _sha256_file(args.data)
    manifest["n_training_rows"] = len(pool)
    manifest["n_rows_delivered"] = len(synth)
    manifest["output"] = str(args.out)
    _write_json(manifest, args.manifest)
    _note(f"wrote {args.out} ({len(synth)} rows) and {args.manifest}")
    return 0


# ---------------------------------------------------------------- quality


def cmd_report_quality(args) -> int:
    schema = load_schema(args.schema)
    real = _load_clean(args.real, schema)
    synth = _load_clean(args.synth, schema)
    report = quality_report(real, synth, schema, exclude_labels=args.exclude_labels)
    report["diagnostic"] = diagnostic_report(real, synth, schema)
    _note(
        "overall {:.4f} (column shapes {:.4f}, column pair trends {:.4f})".format(
            report["overall"],
            report["column_shapes"]["score"],
            report["column_pair_trends"]["score"],
        )
    )
    _emit(report, args.out)
    return 0


# ---------------------------------------------------------------- evaluate


def _metrics_table(result: dict) -> str:
    labels = [m["label"] for m in result["per_label"]] + ["macro"]
    width = max(len(name) for name in labels) + 2
    lines = ["metric".ljust(12) + "".join(name.rjust(width) for name in labels)]
    for key in ("accuracy", "precision", "recall", "f1"):
        cells = [m[key] for m in result["per_label"]] + [result["macro"][key]]
        lines.append(
            key.ljust(12) + "".join(f"{v:.4f}".rjust(width) for v in cells)
        )
    return "\n".join(lines)


def cmd_evaluate(args) -> int:
    artifact = load_model(args.model)
    records = _load_clean(args.data, artifact.schema)
    if args.split_seed is not None:
        spl = split(records, SplitSpec(seed=args.split_seed))
        _check_test_index(args, spl)
        records = spl.test
        _note(f"evaluating on the withheld test partition ({len(records)} rows)")

    X = artifact.encoder.transform(records, warn_clamp=False)
    probs = forward(artifact.model, X)
    result = evaluate_multilabel(
        artifact.encoder.labels(records),
        probs,
        label_names=artifact.encoder.label_names,
        threshold=artifact.threshold,
    )
    result["n_rows"] = len(records)
    result["artifact_id"] = artifact.artifact_id
    print(_metrics_table(result))
    if args.out:
        _write_json(result, args.out)
        _note(f"wrote {args.out}")
    return 0


# ---------------------------------------------------------------- explain


def _waterfall_svg(entry: dict) -> str:
    """Bottom-up contribution plot as a standalone SVG document."""
    rows = entry["waterfall"]
    cumulatives = [r["cumulative"] for r in rows]
    lo, hi = min(cumulatives + [entry["fx"]]), max(cumulatives + [entry["fx"]])
    pad = max((hi - lo) * 0.1, 1e-6)
    lo, hi = lo - pad, hi + pad
    left, right = 240.0, 680.0
    row_h = 26
    height = row_h * (len(rows) + 2) + 40

    def x(v: float) -> float:
        return left + (v - lo) / (hi - lo) * (right - left)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="760" height="{height}"'
        f' font-family="sans-serif" font-size="12">',
        f'<text x="12" y="20" font-size="14" font-weight="bold">'
        f'{entry["display_name"]} ({entry["scale"]})</text>',
    ]
    y = 40.0
    prev = None
    for row in rows:
        cy = y + row_h / 2
        if row["kind"] == "base":
            parts.append(
                f'<text x="12" y="{cy + 4:.1f}">base {row["cumulative"]:.4f}</text>'
            )
            parts.append(
                f'<line x1="{x(row["cumulative"]):.1f}" y1="{y:.1f}"'
                f' x2="{x(row["cumulative"]):.1f}" y2="{height - 20:.1f}"'
                f' stroke="#888" stroke-dasharray="4,3"/>'
            )
        else:
            x0, x1 = x(prev), x(row["cumulative"])
            color = "#2a9d8f" if row["phi"] > 0 else "#e76f51"
            parts.append(
                f'<text x="12" y="{cy + 4:.1f}">{row["feature"]}'
                f' = {row["value"]:.3f}</text>'
            )
            parts.append(
                f'<rect x="{min(x0, x1):.1f}" y="{y + 5:.1f}"'
                f' width="{max(abs(x1 - x0), 1.0):.1f}" height="{row_h - 10}"'
                f' fill="{color}"/>'
            )
            parts.append(
                f'<text x="{max(x0, x1) + 6:.1f}" y="{cy + 4:.1f}"'
                f' fill="{color}">{row["phi"]:+.4f}</text>'
            )
        prev = row["cumulative"]
        y += row_h
    parts.append(
        f'<text x="12" y="{y + row_h / 2 + 4:.1f}" font-weight="bold">'
        f'f(x) = {entry["fx"]:.4f}</text>'
    )
    parts.append(
        f'<line x1="{x(entry["fx"]):.1f}" y1="{y:.1f}" x2="{x(entry["fx"]):.1f}"'
        f' y2="{y + row_h:.1f}" stroke="#000" stroke-width="2"/>'
    )
    parts.append("</svg>")
    return "\n".join(parts)


def cmd_explain(args) -> int:
    artifact = load_model(args.model)
    if args.features_file:
        features = _read_json(args.features_file)
    else:
        try:
            features = json.loads(args.features)
        except ValueError as exc:
            raise CliError(f"--features is not valid JSON: {exc}")
    if not isinstance(features, dict):
        raise CliError("features must be a JSON object of column: value pairs")
    if args.target_class is not None:
        if artifact.encoder.delta is None:
            raise CliError("this model takes no target energy class")
        features[artifact.encoder.delta.final_col] = args.target_class

    payload = explain_payload(artifact, features)

    if args.svg_prefix:
        for entry in payload["labels"]:
            path = Path(f"{args.svg_prefix}{entry['label_name']}.svg")
            path.write_text(_waterfall_svg(entry), encoding="utf-8")
            _note(f"wrote {path}")
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["label", "feature", "value", "phi", "standard_error"])
            for entry in payload["labels"]:
                for item in entry["features"]:
                    writer.writerow(
                        [
                            entry["label_name"],
                            item["name"],
                            repr(item["value"]),
                            repr(item["phi"]),
                            repr(item["standard_error"])
                            if "standard_error" in item
                            else "",
                        ]
                    )
        _note(f"wrote {args.csv}")
    _emit(payload, args.out)
    return 0


# ---------------------------------------------------------------- serve


def _resolve_listen(flag: str | None, environ=os.environ) -> tuple[str, int]:
    listen = flag or environ.get(LISTEN_ENV_VAR) or DEFAULT_LISTEN
    host, sep, port_text = listen.rpartition(":")
    if not sep or not host or not port_text.isdigit():
        raise CliError(f"bad listen address {listen!r}; expected HOST:PORT")
    return host, int(port_text)


def cmd_serve(args) -> int:
    host, port = _resolve_listen(args.listen)
    app = create_app(artifact_path=args.model)
    artifact = app.state.store.get()
    _note(f"serving artifact {artifact.artifact_id} on {host}:{port}")
    uvicorn.run(app, host=host, port=port, log_level="info")
    return 0


# ---------------------------------------------------------------- validate-map


def cmd_validate_map(args) -> int:
    measure_map = load_measure_map(args.map)
    _emit(
        {
            "valid": True,
            "unmatched_policy": measure_map.unmatched_policy,
            "categories": [
                {
                    "id": c.id,
                    "display_name": c.display_name,
                    "n_measures": len(c.measures),
                }
                for c in measure_map.categories
            ],
        },
        args.out,
    )
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="retrokit",
        description="Retrofit recommendation pipeline: data to model to service.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_split_args(p):
        p.add_argument("--split-seed", type=int, default=7, help="train/val/test split seed")
        p.add_argument(
            "--test-index",
            help="path of the persisted test-index file (default: DATA.test-index.json)",
        )

    p = sub.add_parser("ingest", help="load, harmonize, and clean a raw CSV")
    p.add_argument("data", help="raw CSV file")
    p.add_argument("--schema", required=True, help="schema JSON file")
    p.add_argument("--out", required=True, help="cleaned CSV to write")
    p.add_argument("--report", help="write the ingest report JSON here instead of stdout")
    p.add_argument("--value-map", help="JSON column:{from:to} harmonization table")
    p.add_argument(
        "--zscore",
        action="append",
        metavar="COLUMN",
        help="flag outliers in this numerical column (repeatable)",
    )
    p.add_argument("--zscore-threshold", type=float, default=4.0)
    p.add_argument(
        "--drop",
        action="append",
        type=int,
        metavar="INDEX",
        help="drop this row of the null-free table (repeatable; use reported flag indices)",
    )
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", help="fit the classifier and save a model artifact")
    p.add_argument("data", help="cleaned CSV file")
    p.add_argument("--schema", required=True)
    p.add_argument("--out", required=True, help="artifact JSON to write")
    p.add_argument("--summary", help="write the training summary JSON here instead of stdout")
    p.add_argument("--config", help="winner config JSON from tune")
    p.add_argument("--layers", default="64,32", help="hidden layer sizes, comma-separated")
    p.add_argument("--learning-rate", type=float, default=1e-3)
    p.add_argument("--batch-size", type=int, default=32)
    p.add_argument("--max-epochs", type=int, default=200)
    p.add_argument("--patience", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--delta", help="derived feature columns: INITIAL,FINAL,AREA")
    p.add_argument("--background-rows", type=int, default=100)
    p.add_argument("--augment", help="synthetic CSV merged into train+val only")
    p.add_argument("--manifest", help="generation manifest to fingerprint into provenance")
    add_split_args(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("tune", help="hyperparameter search over the train/val split")
    p.add_argument("data")
    p.add_argument("--schema", required=True)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-epochs", type=int, default=200)
    p.add_argument("--patience", type=int, default=10)
    p.add_argument("--delta", help="derived feature columns: INITIAL,FINAL,AREA")
    p.add_argument("--out", help="winner config JSON (stdout when omitted)")
    p.add_argument("--log", help="JSON-lines trial log")
    add_split_args(p)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("generate", help="train the tabular generator and sample rows")
    p.add_argument("data", help="cleaned CSV file")
    p.add_argument("--schema", required=True)
    p.add_argument("--out", required=True, help="synthetic CSV to write")
    p.add_argument("--manifest", required=True, help="generation manifest JSON to write")
    p.add_argument("--budget", type=int, required=True, help="number of synthetic rows")
    p.add_argument("--epochs", type=int, default=800)
    p.add_argument("--batch-size", type=int, default=60)
    p.add_argument("--pac", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    add_split_args(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("report-quality", help="score a synthetic table against the real one")
    p.add_argument("real", help="real CSV file")
    p.add_argument("synth", help="synthetic CSV file")
    p.add_argument("--schema", required=True)
    p.add_argument("--exclude-labels", action="store_true")
    p.add_argument("--out", help="report JSON (stdout when omitted)")
    p.set_defaults(func=cmd_report_quality)

    p = sub.add_parser("evaluate", help="score a model artifact on labeled data")
    p.add_argument("model", help="artifact JSON")
    p.add_argument("data", help="labeled CSV file")
    p.add_argument(
        "--split-seed",
        type=int,
        default=None,
        help="evaluate only the withheld test partition of this split",
    )
    p.add_argument("--test-index", help="persisted test-index file to verify")
    p.add_argument("--out", help="metrics JSON")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("explain", help="per-feature attributions for one request")
    p.add_argument("model", help="artifact JSON")
    p.add_argument("--features", help="inline JSON object of feature values")
    p.add_argument("--features-file", help="JSON file with the feature values")
    p.add_argument("--target-class", help="target energy class to explain toward")
    p.add_argument("--out", help="explanation JSON (stdout when omitted)")
    p.add_argument("--svg-prefix", help="write PREFIX<label>.svg waterfall plots")
    p.add_argument("--csv", help="write a flat label,feature,phi CSV")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("serve", help="run the HTTP service over an artifact")
    p.add_argument("model", help="artifact JSON")
    p.add_argument(
        "--listen",
        help=f"HOST:PORT (default ${LISTEN_ENV_VAR} or {DEFAULT_LISTEN})",
    )
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("validate-map", help="check a measure map JSON file")
    p.add_argument("map", help="measure map JSON")
    p.add_argument("--out", help="validation summary JSON (stdout when omitted)")
    p.set_defaults(func=cmd_validate_map)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "explain" and not args.features and not args.features_file:
        print("error: explain needs --features or --features-file", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except (ValueError, RuntimeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
