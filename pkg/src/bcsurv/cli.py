"""Command-line entry point.

Exit codes: 0 success, 1 configuration error, 2 data or runtime error.
"""

from __future__ import annotations

import argparse
import sys

from .classifiers import MODEL_ORDER, parse_override
from .errors import BcsurvError, ConfigError
from .experiment import ExperimentConfig, format_metrics_csv, run_experiment

EXIT_OK, EXIT_CONFIG, EXIT_DATA = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="bcsurv",
        description="Train and compare LR, ET, RF, KNN and SVC survival classifiers on the "
        "SEER breast-cancer cohort (or a synthetic stand-in) and write a comparison report.",
    )
    p.add_argument("--data", help="cohort CSV; omit to run on synthetic data")
    p.add_argument("--schema", help="schema file (default: bundled SEER schema)")
    p.add_argument("--seed", type=int, default=0, help="seed for split, synthesis and models (default 0)")
    p.add_argument("--split", type=float, default=0.8, help="training fraction in (0, 1) (default 0.8)")
    p.add_argument("--models", default=",".join(MODEL_ORDER),
                   help=f"comma-separated subset of {','.join(MODEL_ORDER)} (default all)")
    p.add_argument("--positive-class", default="Dead", help="target value scored as positive (default Dead)")
    p.add_argument("--out", default="results", help="output directory (default ./results)")
    p.add_argument("--synthetic", type=int, metavar="N", default=None,
                   help="use N synthetic rows (default 2000 when --data is absent)")
    p.add_argument("--no-stratify", action="store_true", help="plain shuffled split instead of per-class")
    p.add_argument("--param", action="append", default=[], metavar="MODEL.KEY=VALUE",
                   help="hyperparameter override, repeatable (e.g. rf.n_trees=200)")
    p.add_argument("--jobs", type=int, default=1, help="worker threads for forest training (results unchanged)")
    p.add_argument("--save-models", action="store_true", help="also write model_<name>.txt files")
    return p


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    if args.data is not None and args.synthetic is not None:
        raise ConfigError("--data and --synthetic are mutually exclusive")
    if not 0.0 < args.split < 1.0:
        raise ConfigError(f"--split must lie strictly between 0 and 1, got {args.split}")
    models = tuple(m.strip() for m in args.models.split(",") if m.strip())
    overrides: dict[str, dict[str, str]] = {}
    for text in args.param:
        name, key, value = parse_override(text)
        overrides.setdefault(name, {})[key] = value
    config = ExperimentConfig(
        data_path=args.data,
        schema_path=args.schema,
        seed=args.seed,
        split_ratio=args.split,
        stratified=not args.no_stratify,
        positive_class=args.positive_class,
        models=models,
        overrides=overrides,
        output_dir=args.out,
        synthetic_n=args.synthetic if args.synthetic is not None else 2000,
        jobs=args.jobs,
        save_models=args.save_models,
    )
    config.validate()
    return config


def main(argv=None) -> int:
    parser = build_parser()
    try:
        config = config_from_args(parser.parse_args(argv))
    except ConfigError as exc:
        print(f"bcsurv: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SystemExit as exc:  # --help
        return int(exc.code or 0)

    try:
        report = run_experiment(config)
    except ConfigError as exc:
        print(f"bcsurv: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (BcsurvError, OSError) as exc:
        stage = getattr(exc, "stage", "io")
        print(f"bcsurv: {stage} error: {exc}", file=sys.stderr)
        return EXIT_DATA

    d = report.dataset
    print(f"data {d.source}: n={d.n} p={d.p} classes={d.class_counts} majority={d.majority_rate:.4f}")
    sys.stdout.write(format_metrics_csv(report.rows))
    for name, secs in report.wall_clock.items():
        print(f"# {name} fit+score {secs:.2f}s")
    print(f"# artifacts in {config.output_dir}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
