"""Command-line entry point.

    minreveal train       fit a model + feature statistics + normalizer
    minreveal evaluate    run an experiment spec, write results files
    minreveal interactive drive one disclosure session on the terminal
    minreveal serve       expose the HTTP session API

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .data import (
    Dataset,
    FeaturePartition,
    NormalizationSpec,
    apply_normalizer,
    fit_normalizer,
    sample_partition,
    split,
)
from .datasets import BUNDLED, load_dataset
from .engine import SELECTORS, Engine, EngineConfig
from .errors import DataError, NumericalError
from .evaluate import ExperimentSpec, importance_weights, run_experiment
from .gaussian import GaussianStats, estimate
from .models import (
    LinearModel,
    TrainConfig,
    hard_predict,
    model_from_json,
    model_to_json,
    train_logistic,
    train_mlp,
)

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="minreveal", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="train a model and write artifacts")
    train.add_argument("--dataset", required=True, help=f"bundled name ({', '.join(BUNDLED)}) or CSV path")
    train.add_argument("--label", help="label column (required for CSV paths)")
    train.add_argument("--model", choices=("logistic", "mlp"), default="logistic")
    train.add_argument("--lr", type=float)
    train.add_argument("--epochs", type=int)
    train.add_argument("--batch", type=int)
    train.add_argument("--seed", type=int, default=0)
    train.add_argument("--ridge", type=float, default=1e-6)
    train.add_argument("--train-fraction", type=float, default=0.7)
    train.add_argument("--out", required=True, help="output directory for the artifacts")

    evaluate = sub.add_parser("evaluate", help="run an experiment spec")
    evaluate.add_argument("--spec", required=True, help="experiment spec (JSON or TOML)")
    evaluate.add_argument("--out", required=True, help="output directory for results files")

    interactive = sub.add_parser("interactive", help="run one disclosure session on the terminal")
    _session_args(interactive)

    serve = sub.add_parser("serve", help="start the HTTP session service")
    _session_args(serve)
    serve.add_argument("--bind", default="127.0.0.1:8080", help="host:port to listen on")

    return parser


def _session_args(cmd: argparse.ArgumentParser):
    cmd.add_argument("--artifacts", required=True, help="directory holding model.json/stats.json/normalizer.json")
    cmd.add_argument("--sensitive", required=True, help="comma list of feature names, or an integer count")
    cmd.add_argument("--delta", type=float, default=0.0)
    cmd.add_argument("--selector", choices=SELECTORS, default="fscore")
    cmd.add_argument("--seed", type=int, default=0)
    cmd.add_argument("--mc-samples", type=int, default=100)
    cmd.add_argument("--probe-samples", type=int, default=10_000)
    if cmd.prog.endswith("interactive"):
        cmd.add_argument("--public", required=True, help="public values as name=value,name=value (raw units)")


def cmd_train(args) -> int:
    raw = load_dataset(args.dataset, args.label)
    train_raw, test_raw = split(raw, args.train_fraction, args.seed)
    normalizer = fit_normalizer(train_raw)
    train = apply_normalizer(normalizer, train_raw)
    test = apply_normalizer(normalizer, test_raw)

    overrides = {k: v for k, v in (("lr", args.lr), ("epochs", args.epochs), ("batch_size", args.batch)) if v is not None}
    if args.model == "logistic":
        model = train_logistic(train, TrainConfig.logistic(seed=args.seed, **overrides))
    else:
        model = train_mlp(train, TrainConfig.mlp(seed=args.seed, **overrides))
    stats = estimate(train, args.ridge)
    importance = importance_weights(train, args.seed, reuse=model if isinstance(model, LinearModel) else None)

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)
    model_doc = json.loads(model_to_json(model))
    model_doc["importance"] = importance.tolist()
    (outdir / "model.json").write_text(json.dumps(model_doc, indent=2))
    (outdir / "stats.json").write_text(stats.to_json())
    (outdir / "normalizer.json").write_text(normalizer.to_json())

    acc = float(np.mean(hard_predict(model, test.features) == test.labels))
    print(f"trained {args.model} on {args.dataset}: test accuracy {acc:.4f}")
    print(f"artifacts written to {outdir}")
    return EXIT_OK


def cmd_evaluate(args) -> int:
    spec = ExperimentSpec.from_file(args.spec)
    result = run_experiment(spec)
    result.write(args.out)
    print(f"wrote results for {len(result.cells)} cells to {args.out}")
    return EXIT_OK


def load_artifacts(artifacts_dir: str | Path):
    artifacts_dir = Path(artifacts_dir)
    model_text = (artifacts_dir / "model.json").read_text()
    model = model_from_json(model_text)
    importance_doc = json.loads(model_text).get("importance")
    importance = np.asarray(importance_doc, dtype=float) if importance_doc is not None else None
    stats = GaussianStats.from_json((artifacts_dir / "stats.json").read_text())
    normalizer = NormalizationSpec.from_json((artifacts_dir / "normalizer.json").read_text())
    return model, stats, normalizer, importance


def resolve_partition(sensitive_arg: str, normalizer: NormalizationSpec, seed: int) -> FeaturePartition:
    names = list(normalizer.feature_names)
    d = len(names)
    try:
        count = int(sensitive_arg)
    except ValueError:
        count = None
    if count is not None:
        return sample_partition(d, count, seed)
    wanted = [chunk.strip() for chunk in sensitive_arg.split(",") if chunk.strip()]
    missing = [w for w in wanted if w not in names]
    if missing:
        raise DataError(f"unknown sensitive feature names: {', '.join(missing)}")
    sensitive = tuple(sorted(names.index(w) for w in wanted))
    public = tuple(i for i in range(d) if i not in sensitive)
    return FeaturePartition(public, sensitive)


def _parse_public(public_arg: str, normalizer: NormalizationSpec, partition: FeaturePartition) -> np.ndarray:
    names = list(normalizer.feature_names)
    pairs = {}
    for chunk in public_arg.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        if "=" not in chunk:
            raise DataError(f"bad --public entry {chunk!r}; expected name=value")
        name, _, value = chunk.partition("=")
        name = name.strip()
        if name not in names:
            raise DataError(f"unknown public feature {name!r}")
        try:
            pairs[name] = float(value)
        except ValueError:
            raise DataError(f"public feature {name!r} has non-numeric value {value!r}") from None
    values = []
    for idx in partition.public_idx:
        name = names[idx]
        if name not in pairs:
            raise DataError(f"missing public feature {name!r}")
        normalized, _ = normalizer.transform_value(idx, pairs[name])
        values.append(normalized)
    return np.asarray(values)


def _make_engine(args, model, stats, partition, importance) -> Engine:
    config = EngineConfig(
        delta=args.delta,
        selector=args.selector,
        mc_samples=args.mc_samples,
        probe_samples=args.probe_samples,
        seed=args.seed,
        importance=importance,
    )
    return Engine(model, stats, partition, config)


def cmd_interactive(args) -> int:
    model, stats, normalizer, importance = load_artifacts(args.artifacts)
    partition = resolve_partition(args.sensitive, normalizer, args.seed)
    engine = _make_engine(args, model, stats, partition, importance)
    public_values = _parse_public(args.public, normalizer, partition)
    names = list(normalizer.feature_names)

    session = engine.begin(public_values)
    while session.terminal is None:
        feature = names[session.pending]
        print(f"requesting feature: {feature}")
        print(f"confidence: {session.confidence:.6f}")
        line = input(f"enter raw value for {feature}: ")
        try:
            raw = float(line)
        except ValueError:
            print(f"not a number: {line!r}; please retry", file=sys.stderr)
            continue
        value, clipped = normalizer.transform_value(session.pending, raw)
        suffix = " (clipped)" if clipped else ""
        print(f"normalized value: {value:.6f}{suffix}")
        session = engine.step(session, value)

    result = session.terminal
    revealed = ", ".join(names[i] for i, _ in session.revealed) or "(none)"
    n_sensitive = len(partition.sensitive_idx)
    print(f"decision: label={result.label} confidence={result.confidence:.6f}")
    print(f"revealed: {revealed}")
    print(f"leakage: {len(session.revealed)}/{n_sensitive}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import ServiceBundle, create_app

    model, stats, normalizer, importance = load_artifacts(args.artifacts)
    partition = resolve_partition(args.sensitive, normalizer, args.seed)
    bundle = ServiceBundle(
        model=model, stats=stats, normalizer=normalizer, partition=partition,
        delta=args.delta, selector=args.selector, importance=importance,
        mc_samples=args.mc_samples, probe_samples=args.probe_samples, seed=args.seed,
    )
    host, _, port = args.bind.partition(":")
    uvicorn.run(create_app(bundle), host=host or "127.0.0.1", port=int(port or 8080))
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "train": cmd_train,
        "evaluate": cmd_evaluate,
        "interactive": cmd_interactive,
        "serve": cmd_serve,
    }
    try:
        return handlers[args.command](args)
    except (FileNotFoundError, DataError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
