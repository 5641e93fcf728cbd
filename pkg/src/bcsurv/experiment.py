"""End-to-end harness: load or synthesize, encode, split, fit, evaluate, write."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .classifiers import MODEL_ORDER, fit_model, resolve_params, save_model
from .errors import ConfigError
from .metrics import MetricsReport, evaluate, format_roc_csv
from .tabular import (
    FeatureMatrix,
    SplitIndices,
    correlation_matrix,
    encode_and_normalize,
    fit_encoding,
    format_correlation_csv,
    load_csv,
    load_schema,
    synthesize_table,
    train_test_split,
)

METRICS_HEADER = "classifier,accuracy,precision,recall,f1,mcc,roc_auc"
SEER_POSITIVE_RATE = 616 / 4024


@dataclass(frozen=True)
class ExperimentConfig:
    data_path: str | None = None
    schema_path: str | None = None
    seed: int = 0
    split_ratio: float = 0.8
    stratified: bool = True
    positive_class: str = "Dead"
    models: tuple[str, ...] = MODEL_ORDER
    overrides: dict[str, dict[str, Any]] = field(default_factory=dict)
    output_dir: str | None = None
    synthetic_n: int = 2000
    jobs: int = 1
    save_models: bool = False

    def validate(self) -> None:
        if not 0.0 < self.split_ratio < 1.0:
            raise ConfigError(f"split ratio must lie strictly between 0 and 1, got {self.split_ratio}")
        if not self.models:
            raise ConfigError("at least one model must be selected")
        unknown = [m for m in self.models if m not in MODEL_ORDER]
        if unknown:
            raise ConfigError(f"unknown model(s) {unknown}; choose from {', '.join(MODEL_ORDER)}")
        if len(set(self.models)) != len(self.models):
            raise ConfigError("models must not repeat")
        if self.seed < 0:
            raise ConfigError("seed must be non-negative")
        if self.data_path is None and self.synthetic_n < 2:
            raise ConfigError("synthetic row count must be >= 2")
        if self.jobs < 1:
            raise ConfigError("jobs must be >= 1")
        for name, over in self.overrides.items():
            if name not in MODEL_ORDER:
                raise ConfigError(f"override for unknown model {name!r}")
            resolve_params(name, over)

    @property
    def ordered_models(self) -> tuple[str, ...]:
        return tuple(m for m in MODEL_ORDER if m in self.models)


@dataclass(frozen=True)
class DatasetSummary:
    n: int
    p: int
    class_counts: dict[str, int]
    majority_rate: float
    source: str


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    rows: list[MetricsReport]
    dataset: DatasetSummary
    split: SplitIndices
    correlation: np.ndarray
    feature_names: tuple[str, ...]
    wall_clock: dict[str, float] = field(default_factory=dict)
    models: dict[str, Any] = field(default_factory=dict)

    def row(self, name: str) -> MetricsReport:
        return next(r for r in self.rows if r.classifier_name == name)


def prepare_data(config: ExperimentConfig) -> tuple[FeatureMatrix, DatasetSummary]:
    schema = load_schema(config.schema_path)
    if config.data_path is None:
        pos = config.positive_class if config.positive_class in (schema.target.categories or ()) else None
        table = synthesize_table(schema, config.synthetic_n, config.seed, SEER_POSITIVE_RATE, pos)
        source = f"synthetic:{config.synthetic_n}"
    else:
        table = load_csv(config.data_path, schema)
        source = str(config.data_path)
    encoding = fit_encoding(table)
    m = encode_and_normalize(table, encoding, config.positive_class)
    target_codes = encoding.codes[schema.target.name]
    counts = {c: sum(1 for v in table.column(schema.target.name) if v == c) for c in target_codes}
    majority = max(counts.values()) / table.n
    return m, DatasetSummary(table.n, m.p, counts, majority, source)


def run_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Run every selected model on one seeded split. Writes artifacts when
    ``config.output_dir`` is set; output bytes depend only on the config."""
    config.validate()
    m, summary = prepare_data(config)
    split = train_test_split(m.n, config.split_ratio, config.seed, m.labels, config.stratified)
    train, test = m.subset(split.train), m.subset(split.test)

    rows, clocks, models = [], {}, {}
    for name in config.ordered_models:
        start = time.perf_counter()
        model = fit_model(name, train, config.seed, config.overrides.get(name), config.jobs)
        scores = model.score(test.values)
        clocks[name] = time.perf_counter() - start
        rows.append(evaluate(test.labels, scores, 0.5, name, m.positive_class_name))
        models[name] = model

    report = ExperimentReport(config, rows, summary, split, correlation_matrix(m), m.feature_names, clocks, models)
    if config.output_dir is not None:
        write_report(report, config.output_dir)
    return report


def _f4(x: float) -> str:
    return f"{x:.4f}"


def format_metrics_csv(rows: list[MetricsReport]) -> str:
    lines = [METRICS_HEADER]
    for r in rows:
        lines.append(",".join([r.classifier_name, *(_f4(v) for v in r.row())]))
    return "\n".join(lines) + "\n"


def format_confusion(r: MetricsReport) -> str:
    cm = r.confusion
    lines = [
        f"classifier {r.classifier_name}",
        f"positive_class {cm.positive_class_name}",
        f"tp {cm.tp}",
        f"fp {cm.fp}",
        f"fn {cm.fn}",
        f"tn {cm.tn}",
        f"accuracy {_f4(r.accuracy)}",
        f"precision_positive {_f4(r.precision)}",
        f"recall_positive {_f4(r.recall)}",
        f"f1_positive {_f4(r.f1)}",
    ]
    for key in ("precision", "recall", "f1"):
        lines.append(f"{key}_negative {_f4(r.negative_class[key])}")
    for key in ("precision", "recall", "f1"):
        lines.append(f"{key}_macro {_f4(r.macro[key])}")
    lines.append(f"mcc {_f4(r.mcc)}")
    lines.append(f"roc_auc {_f4(r.roc_auc)}")
    lines.append(f"degenerate {','.join(sorted(r.degenerate)) or 'none'}")
    return "\n".join(lines) + "\n"


def format_config_echo(report: ExperimentReport) -> str:
    c, d, s = report.config, report.dataset, report.split
    lines = [
        f"data {d.source}",
        f"schema {c.schema_path or 'bundled'}",
        f"seed {c.seed}",
        f"split_ratio {c.split_ratio!r}",
        f"stratified {str(c.stratified).lower()}",
        f"positive_class {c.positive_class}",
        f"models {','.join(c.ordered_models)}",
    ]
    for name in c.ordered_models:
        for key, value in resolve_params(name, c.overrides.get(name)).items():
            lines.append(f"param {name}.{key} {value!r}")
    lines += [f"dataset.n {d.n}", f"dataset.p {d.p}"]
    lines += [f"dataset.class {k} {v}" for k, v in d.class_counts.items()]
    lines.append(f"dataset.majority_rate {_f4(d.majority_rate)}")
    lines += [f"split.train {len(s.train)}", f"split.test {len(s.test)}"]
    return "\n".join(lines) + "\n"


def write_report(report: ExperimentReport, out_dir) -> list[Path]:
    """Write the artifact set; on any failure the files written so far are removed."""
    out = Path(out_dir)
    created_dir = not out.exists()
    files: dict[str, str] = {"metrics.csv": format_metrics_csv(report.rows)}
    for r in report.rows:
        files[f"confusion_{r.classifier_name}.txt"] = format_confusion(r)
        files[f"roc_{r.classifier_name}.csv"] = format_roc_csv(r.roc)
    files["correlation.csv"] = format_correlation_csv(report.correlation, report.feature_names)
    files["config_echo.txt"] = format_config_echo(report)

    written: list[Path] = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        for name, text in files.items():
            path = out / name
            with open(path, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
            written.append(path)
        if report.config.save_models:
            for name, model in report.models.items():
                path = out / f"model_{name}.txt"
                save_model(model, path)
                written.append(path)
    except BaseException:
        for path in written:
            path.unlink(missing_ok=True)
        if created_dir and out.exists() and not any(out.iterdir()):
            out.rmdir()
        raise
    return written
