"""Cohort table handling: schema, CSV loading, label encoding, min-max
normalization, seeded splits, correlation, and a synthetic generator."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DataError,
    DegenerateSplit,
    EmptyTable,
    HeaderMismatch,
    MissingValue,
    NonBinaryTarget,
    RowWidthMismatch,
    SchemaError,
    TooFewRows,
    UnknownCategory,
    UnparseableNumeric,
)

KINDS = ("categorical", "integer", "continuous")
ROLES = ("feature", "target")

DEFAULT_SCHEMA = "seer_breast_cancer.txt"


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(frozen=True)
class AttributeSpec:
    name: str
    kind: str
    role: str = "feature"
    categories: tuple[str, ...] | None = None
    value_range: tuple[float, float] | None = None

    def __post_init__(self):
        if not self.name:
            raise SchemaError("attribute name must be non-empty")
        if self.kind not in KINDS:
            raise SchemaError(f"{self.name}: unknown kind {self.kind!r}")
        if self.role not in ROLES:
            raise SchemaError(f"{self.name}: unknown role {self.role!r}")
        if self.categories is not None:
            if self.kind != "categorical":
                raise SchemaError(f"{self.name}: only categorical attributes take categories")
            if len(self.categories) < 2:
                raise SchemaError(f"{self.name}: a declared category list needs >= 2 entries")
            if len(set(self.categories)) != len(self.categories):
                raise SchemaError(f"{self.name}: duplicate categories")
        if self.value_range is not None:
            if self.kind == "categorical":
                raise SchemaError(f"{self.name}: categorical attributes take no range")
            lo, hi = self.value_range
            if not lo <= hi:
                raise SchemaError(f"{self.name}: empty range {lo}..{hi}")

    @property
    def is_categorical(self) -> bool:
        return self.kind == "categorical"


@dataclass(frozen=True)
class DatasetSchema:
    attributes: tuple[AttributeSpec, ...]

    def __post_init__(self):
        names = [a.name for a in self.attributes]
        if len(set(names)) != len(names):
            raise SchemaError("attribute names must be unique")
        targets = [a for a in self.attributes if a.role == "target"]
        if len(targets) != 1:
            raise SchemaError(f"exactly one target attribute required, found {len(targets)}")

    @property
    def names(self) -> list[str]:
        return [a.name for a in self.attributes]

    @property
    def width(self) -> int:
        return len(self.attributes)

    @property
    def target(self) -> AttributeSpec:
        return next(a for a in self.attributes if a.role == "target")

    @property
    def features(self) -> list[AttributeSpec]:
        return [a for a in self.attributes if a.role == "feature"]

    def index(self, name: str) -> int:
        return self.names.index(name)


def parse_schema(text: str) -> DatasetSchema:
    """Parse the line-oriented schema format (``name | kind | role [| extra]``).

    Blank lines and ``#`` comments are ignored. ``extra`` is a comma-separated
    category list for categorical attributes and ``lo..hi`` for numeric ones.
    """
    attrs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split("|")]
        if len(parts) not in (3, 4):
            raise SchemaError(f"schema line {lineno}: expected 3 or 4 '|'-separated fields")
        name, kind, role = parts[:3]
        categories = value_range = None
        if len(parts) == 4 and parts[3]:
            if kind == "categorical":
                categories = tuple(c.strip() for c in parts[3].split(","))
            else:
                try:
                    lo, hi = (float(v) for v in parts[3].split(".."))
                except ValueError:
                    raise SchemaError(f"schema line {lineno}: bad range {parts[3]!r}") from None
                value_range = (lo, hi)
        attrs.append(AttributeSpec(name, kind, role, categories, value_range))
    return DatasetSchema(tuple(attrs))


def load_schema(path: str | Path | None = None) -> DatasetSchema:
    """Read a schema file; with no path, the bundled SEER cohort schema."""
    if path is None:
        text = resources.files("bcsurv.data").joinpath(DEFAULT_SCHEMA).read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return parse_schema(text)


def format_schema(schema: DatasetSchema) -> str:
    lines = []
    for a in schema.attributes:
        fields = [a.name, a.kind, a.role]
        if a.categories is not None:
            fields.append(", ".join(a.categories))
        elif a.value_range is not None:
            fields.append(f"{a.value_range[0]:g}..{a.value_range[1]:g}")
        lines.append(" | ".join(fields))
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class RawTable:
    schema: DatasetSchema
    rows: tuple[tuple[str, ...], ...]

    def __post_init__(self):
        validate_rows(self.schema, self.rows)

    @property
    def n(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> list[str]:
        j = self.schema.index(name)
        return [r[j] for r in self.rows]


def _parse_number(value: str) -> float:
    x = float(value)
    if not math.isfinite(x):
        raise ValueError(value)
    return x


def validate_rows(schema: DatasetSchema, rows: Iterable[Sequence[str]], first_line: int = 2) -> None:
    width = schema.width
    for offset, row in enumerate(rows):
        line = first_line + offset
        if len(row) != width:
            raise RowWidthMismatch(line, width, len(row))
        for attr, cell in zip(schema.attributes, row):
            if cell == "":
                raise MissingValue(line, attr.name)
            if attr.is_categorical:
                if attr.categories is not None and cell not in attr.categories:
                    raise UnknownCategory(line, attr.name, cell)
            else:
                try:
                    _parse_number(cell)
                except ValueError:
                    raise UnparseableNumeric(line, attr.name, cell) from None


def load_csv(path: str | Path, schema: DatasetSchema) -> RawTable:
    """Load a header-first, comma-separated UTF-8 file against ``schema``.

    Header names and cells are whitespace-stripped. Quoting is not
    supported; a quoted field shows up as a width or category error.
    """
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"no such data file: {path}")
    lines = path.read_text(encoding="utf-8-sig").splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise HeaderMismatch(schema.names, [])
    header = [h.strip() for h in lines[0].split(",")]
    if header != schema.names:
        raise HeaderMismatch(schema.names, header)
    rows = tuple(tuple(c.strip() for c in line.split(",")) for line in lines[1:])
    return RawTable(schema, rows)


def write_csv(table: RawTable, path: str | Path) -> None:
    out = [",".join(table.schema.names)]
    out.extend(",".join(r) for r in table.rows)
    Path(path).write_text("\n".join(out) + "\n", encoding="utf-8")


@dataclass(frozen=True)
class EncodingMap:
    codes: dict[str, dict[str, int]]

    def encode(self, column: str, value: str) -> int:
        try:
            return self.codes[column][value]
        except KeyError:
            raise UnknownCategory(None, column, value) from None


def fit_encoding(table: RawTable) -> EncodingMap:
    """Label-encode every categorical column, codes in lexicographic order."""
    if table.n == 0:
        raise EmptyTable("cannot fit an encoding on an empty table")
    codes = {}
    for j, attr in enumerate(table.schema.attributes):
        if attr.is_categorical:
            observed = sorted({r[j] for r in table.rows})
            codes[attr.name] = {c: i for i, c in enumerate(observed)}
    return EncodingMap(codes)


def _frozen(a: np.ndarray) -> np.ndarray:
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class FeatureMatrix:
    values: np.ndarray
    labels: np.ndarray
    column_stats: tuple[tuple[float, float], ...] = ()
    positive_class_name: str = "1"
    feature_names: tuple[str, ...] = field(default=())

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        labels = np.asarray(self.labels, dtype=np.int64)
        if values.ndim != 2:
            raise DataError("feature values must be a 2-D matrix")
        if labels.shape != (values.shape[0],):
            raise DataError("labels must have one entry per row")
        if labels.size and not np.isin(labels, (0, 1)).all():
            raise DataError("labels must be 0/1")
        names = self.feature_names or tuple(f"x{j}" for j in range(values.shape[1]))
        if len(names) != values.shape[1]:
            raise DataError("feature_names length must equal column count")
        object.__setattr__(self, "values", _frozen(values.copy()))
        object.__setattr__(self, "labels", _frozen(labels.copy()))
        object.__setattr__(self, "feature_names", tuple(names))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    def subset(self, idx) -> FeatureMatrix:
        idx = np.asarray(idx, dtype=np.int64)
        return FeatureMatrix(
            self.values[idx], self.labels[idx], self.column_stats,
            self.positive_class_name, self.feature_names,
        )

    def class_counts(self) -> tuple[int, int]:
        pos = int(self.labels.sum())
        return self.n - pos, pos


def minmax_normalize(values: np.ndarray) -> tuple[np.ndarray, tuple[tuple[float, float], ...]]:
    """Rescale every column to [0, 1]; constant columns become all zeros."""
    values = np.asarray(values, dtype=np.float64)
    if values.shape[0] == 0:
        return values.copy(), tuple((0.0, 0.0) for _ in range(values.shape[1]))
    lo = values.min(axis=0)
    hi = values.max(axis=0)
    span = hi - lo
    out = np.zeros_like(values)
    live = span > 0
    out[:, live] = (values[:, live] - lo[live]) / span[live]
    # guard against 1 + 1ulp from rounding in the division
    np.clip(out, 0.0, 1.0, out=out)
    return out, tuple((float(a), float(b)) for a, b in zip(lo, hi))


def encode_and_normalize(table: RawTable, encoding: EncodingMap, positive_class: str) -> FeatureMatrix:
    schema = table.schema
    target = schema.target
    tj = schema.index(target.name)
    observed = sorted({r[tj] for r in table.rows})
    if len(observed) != 2:
        raise NonBinaryTarget(f"target {target.name!r} has {len(observed)} observed classes {observed}; need 2")
    if positive_class not in observed:
        raise NonBinaryTarget(f"positive class {positive_class!r} not among target values {observed}")

    feats = schema.features
    cols = [schema.index(a.name) for a in feats]
    raw = np.empty((table.n, len(feats)), dtype=np.float64)
    for i, row in enumerate(table.rows):
        for k, (attr, j) in enumerate(zip(feats, cols)):
            cell = row[j]
            if attr.is_categorical:
                try:
                    raw[i, k] = encoding.codes[attr.name][cell]
                except KeyError:
                    raise UnknownCategory(i + 2, attr.name, cell) from None
            else:
                raw[i, k] = float(cell)
    values, stats = minmax_normalize(raw)
    labels = np.array([r[tj] == positive_class for r in table.rows], dtype=np.int64)
    return FeatureMatrix(values, labels, stats, positive_class, tuple(a.name for a in feats))


@dataclass(frozen=True, eq=False)
class SplitIndices:
    train: np.ndarray
    test: np.ndarray
    seed: int
    ratio: float
    stratified: bool = False

    def __eq__(self, other):
        if not isinstance(other, SplitIndices):
            return NotImplemented
        return (
            np.array_equal(self.train, other.train)
            and np.array_equal(self.test, other.test)
            and (self.seed, self.ratio, self.stratified) == (other.seed, other.ratio, other.stratified)
        )


def _largest_remainder(sizes: Sequence[int], ratio: float, total: int) -> list[int]:
    exact = [s * ratio for s in sizes]
    alloc = [int(math.floor(e)) for e in exact]
    order = sorted(range(len(sizes)), key=lambda c: (-(exact[c] - alloc[c]), c))
    for c in order[: total - sum(alloc)]:
        alloc[c] += 1
    return alloc


def train_test_split(
    n: int,
    ratio: float = 0.8,
    seed: int = 0,
    labels: Sequence[int] | np.ndarray | None = None,
    stratified: bool = False,
) -> SplitIndices:
    """Seeded shuffle then prefix split; ``ratio`` is the training fraction.

    ``|train| == round_half_up(ratio * n)``. With ``stratified`` the shuffle
    runs per class and per-class train counts are allotted by largest
    remainder, so each class lands within one row of its exact share.
    Both index arrays come back sorted.
    """
    if n < 2:
        raise DegenerateSplit(f"need at least 2 rows to split, got {n}")
    if not 0.0 < ratio < 1.0:
        raise DegenerateSplit(f"ratio must lie in (0, 1), got {ratio}")
    n_train = round_half_up(ratio * n)
    if n_train == 0 or n_train == n:
        raise DegenerateSplit(f"ratio {ratio} on {n} rows leaves one side empty")
    rng = np.random.default_rng(seed)
    if not stratified:
        perm = rng.permutation(n)
        train, test = perm[:n_train], perm[n_train:]
    else:
        if labels is None:
            raise DegenerateSplit("stratified split needs labels")
        labels = np.asarray(labels)
        if labels.shape != (n,):
            raise DegenerateSplit("labels length must equal n")
        classes = np.unique(labels)
        members = [np.flatnonzero(labels == c) for c in classes]
        alloc = _largest_remainder([len(m) for m in members], ratio, n_train)
        train_parts, test_parts = [], []
        for m, k in zip(members, alloc):
            m = rng.permutation(m)
            train_parts.append(m[:k])
            test_parts.append(m[k:])
        train, test = np.concatenate(train_parts), np.concatenate(test_parts)
    return SplitIndices(np.sort(train), np.sort(test), seed, ratio, stratified)


def correlation_matrix(m: FeatureMatrix | np.ndarray) -> np.ndarray:
    """Pearson correlation between columns; zero-variance pairs are 0 off the diagonal."""
    x = m.values if isinstance(m, FeatureMatrix) else np.asarray(m, dtype=np.float64)
    n, p = x.shape
    if n < 2:
        raise TooFewRows(f"correlation needs at least 2 rows, got {n}")
    centered = x - x.mean(axis=0)
    norms = np.sqrt(np.einsum("ij,ij->j", centered, centered))
    live = (x.max(axis=0) > x.min(axis=0)) & (norms > 0)
    z = np.zeros_like(centered)
    z[:, live] = centered[:, live] / norms[live]
    corr = np.clip(z.T @ z, -1.0, 1.0)
    corr = (corr + corr.T) / 2
    np.fill_diagonal(corr, 1.0)
    return corr


def format_correlation_csv(corr: np.ndarray, names: Sequence[str]) -> str:
    out = [",".join(["feature", *names])]
    for name, row in zip(names, corr):
        out.append(",".join([name, *(f"{v:.6f}" for v in row)]))
    return "\n".join(out) + "\n"


def _placeholder_categories(attr: AttributeSpec) -> tuple[str, ...]:
    return attr.categories or tuple(f"{attr.name}_{i}" for i in range(3))


def synthesize_table(
    schema: DatasetSchema,
    n: int,
    seed: int = 0,
    class_balance: float = 616 / 4024,
    positive_class: str | None = None,
) -> RawTable:
    """Draw ``n`` schema-conforming rows with a planted, learnable signal.

    Exactly ``round_half_up(class_balance * n)`` rows carry the positive
    class (last declared target category unless given). The last two
    feature columns are class-dependent: positives sit low in the final
    column's range and high in the one before it, with a partial overlap.
    Every other column is drawn independently of the label.
    """
    if not 0.0 < class_balance < 1.0:
        raise DataError(f"class_balance must lie in (0, 1), got {class_balance}")
    if n < 0:
        raise DataError("n must be non-negative")
    target = schema.target
    target_cats = _placeholder_categories(target)
    pos_name = positive_class if positive_class is not None else target_cats[-1]
    others = [c for c in target_cats if c != pos_name]
    if not others:
        raise DataError("target needs a class distinct from the positive one")
    neg_name = others[0]

    rng = np.random.default_rng(seed)
    n_pos = round_half_up(class_balance * n)
    y = np.zeros(n, dtype=bool)
    y[:n_pos] = True
    y = rng.permutation(y)

    feats = schema.features
    signal = {feats[-1].name: "low", feats[-2].name: "high"} if len(feats) >= 2 else {}
    columns: dict[str, list[str]] = {}
    for attr in schema.attributes:
        if attr.role == "target":
            columns[attr.name] = [pos_name if v else neg_name for v in y]
            continue
        direction = signal.get(attr.name)
        if attr.is_categorical:
            cats = _placeholder_categories(attr)
            if direction is None:
                picks = rng.integers(0, len(cats), n)
            else:
                u = _signal_uniform(rng, y, direction)
                picks = np.minimum((u * len(cats)).astype(int), len(cats) - 1)
            columns[attr.name] = [cats[i] for i in picks]
            continue
        lo, hi = attr.value_range or (0.0, 100.0)
        u = rng.random(n) if direction is None else _signal_uniform(rng, y, direction)
        vals = lo + u * (hi - lo)
        if attr.kind == "integer":
            vals = np.clip(np.floor(vals + 0.5), lo, hi)
            columns[attr.name] = [str(int(v)) for v in vals]
        else:
            columns[attr.name] = [f"{v:.4f}" for v in vals]
    rows = tuple(zip(*(columns[a.name] for a in schema.attributes))) if n else ()
    return RawTable(schema, rows)


def _signal_uniform(rng: np.random.Generator, y: np.ndarray, direction: str) -> np.ndarray:
    # positives in [0, 0.45), negatives in [0.3, 1); mirrored for "high"
    u = rng.random(y.shape[0])
    out = np.where(y, 0.45 * u, 0.3 + 0.7 * u)
    return out if direction == "low" else 1.0 - out
