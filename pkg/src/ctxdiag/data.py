"""Core domain types, CSV dataset I/O, regime splitting, and baseline selection.

A dataset holds observations of a transient process. Each observation carries:

- a context vector: ambient conditions that influence the measurements but are
  unrelated to the condition being diagnosed,
- a feature vector: interleaved x/y landmark positions, any slot possibly missing,
- a class label, a severity grade in [0, 1], and a regime tag (e.g. the month
  the observation was collected in).

A distinguished subset of healthy observations (the *baselines*) anchors the
context-sensitive normalization; they are chosen to span a wide range of
contexts.
"""

from __future__ import annotations

import csv
import io
import json
import math
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path

__all__ = [
    "Schema",
    "ContextVector",
    "FeatureVector",
    "NormalizedFeatureVector",
    "Observation",
    "LabeledDataset",
    "DatasetError",
    "load_dataset",
    "save_dataset",
    "dataset_to_csv",
    "split_by_regime",
    "filter_by_severity",
    "select_baselines",
]

AXIS_X = "x"
AXIS_Y = "y"


class DatasetError(ValueError):
    """Raised for malformed dataset files or violated dataset invariants."""


@dataclass(frozen=True)
class Schema:
    """Column schema shared by every observation in a dataset.

    Each named feature contributes exactly two slots, its x position followed
    by its y position, so slot ``2*i`` is the x slot and ``2*i + 1`` the y slot
    of ``feature_names[i]``.
    """

    feature_names: tuple[str, ...]
    context_names: tuple[str, ...]
    class_names: tuple[str, ...]
    healthy_class: str

    def __post_init__(self):
        if self.healthy_class not in self.class_names:
            raise DatasetError(
                f"healthy class {self.healthy_class!r} not among classes {self.class_names}"
            )
        if len(set(self.feature_names)) != len(self.feature_names):
            raise DatasetError("duplicate feature names")
        if len(set(self.class_names)) != len(self.class_names):
            raise DatasetError("duplicate class names")

    @property
    def n_slots(self) -> int:
        return 2 * len(self.feature_names)

    @property
    def n_context(self) -> int:
        return len(self.context_names)

    def slot_axis(self, slot: int) -> str:
        """Axis tag ('x' or 'y') of a slot index."""
        return AXIS_X if slot % 2 == 0 else AXIS_Y

    def slot_feature(self, slot: int) -> str:
        return self.feature_names[slot // 2]

    def slot_label(self, slot: int) -> str:
        return f"{self.slot_feature(slot)}:{self.slot_axis(slot)}"

    def class_index(self, label: str) -> int:
        return self.class_names.index(label)


@dataclass(frozen=True)
class ContextVector:
    """Ambient-condition values attached to one observation. All finite."""

    values: tuple[float, ...]

    def __post_init__(self):
        if not all(math.isfinite(v) for v in self.values):
            raise DatasetError(f"non-finite context value in {self.values}")

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class FeatureVector:
    """Ordered landmark slots; ``None`` marks a missing slot, never NaN."""

    slots: tuple[float | None, ...]

    def __post_init__(self):
        for i, v in enumerate(self.slots):
            if v is not None and not math.isfinite(v):
                raise DatasetError(f"slot {i} is non-finite ({v!r}); encode missing as None")

    def __len__(self) -> int:
        return len(self.slots)

    @property
    def missing_slots(self) -> tuple[int, ...]:
        return tuple(i for i, v in enumerate(self.slots) if v is None)


@dataclass(frozen=True)
class NormalizedFeatureVector:
    """Output of feature normalization; same arity as the source vector.

    After missing-value resolution every slot is a finite float.
    """

    slots: tuple[float, ...]

    def __post_init__(self):
        for i, v in enumerate(self.slots):
            if v is None or not math.isfinite(v):
                raise DatasetError(f"normalized slot {i} is not a finite float ({v!r})")

    def __len__(self) -> int:
        return len(self.slots)


@dataclass(frozen=True)
class Observation:
    id: str
    context: ContextVector
    features: FeatureVector
    label: str
    severity: float
    regime: str

    def __post_init__(self):
        if not (0.0 <= self.severity <= 1.0):
            raise DatasetError(f"observation {self.id}: severity {self.severity} outside [0, 1]")


@dataclass(frozen=True)
class LabeledDataset:
    observations: tuple[Observation, ...]
    schema: Schema
    baselines: tuple[str, ...] = field(default=())

    def __post_init__(self):
        by_id = {}
        for obs in self.observations:
            if obs.id in by_id:
                raise DatasetError(f"duplicate observation id {obs.id!r}")
            by_id[obs.id] = obs
            if obs.label not in self.schema.class_names:
                raise DatasetError(f"observation {obs.id}: unknown class {obs.label!r}")
            if obs.label == self.schema.healthy_class and obs.severity != 0.0:
                raise DatasetError(f"observation {obs.id}: healthy observation with severity > 0")
            if len(obs.context) != self.schema.n_context:
                raise DatasetError(
                    f"observation {obs.id}: context arity {len(obs.context)} != {self.schema.n_context}"
                )
            if len(obs.features) != self.schema.n_slots:
                raise DatasetError(
                    f"observation {obs.id}: feature arity {len(obs.features)} != {self.schema.n_slots}"
                )
        for bid in self.baselines:
            if bid not in by_id:
                raise DatasetError(f"baseline id {bid!r} not in dataset")
            if by_id[bid].label != self.schema.healthy_class:
                raise DatasetError(f"baseline id {bid!r} refers to a non-healthy observation")

    def __len__(self) -> int:
        return len(self.observations)

    def by_id(self, obs_id: str) -> Observation:
        for obs in self.observations:
            if obs.id == obs_id:
                return obs
        raise KeyError(obs_id)

    @property
    def baseline_observations(self) -> tuple[Observation, ...]:
        wanted = set(self.baselines)
        return tuple(obs for obs in self.observations if obs.id in wanted)

    @property
    def regimes(self) -> tuple[str, ...]:
        seen: list[str] = []
        for obs in self.observations:
            if obs.regime not in seen:
                seen.append(obs.regime)
        return tuple(seen)

    def class_counts(self) -> dict[str, int]:
        counts = {name: 0 for name in self.schema.class_names}
        for obs in self.observations:
            counts[obs.label] += 1
        return counts


# ---------------------------------------------------------------------------
# CSV format
#
# Header: id, regime, label:<healthy_class>, severity, is_baseline,
#         ctx:<name> ..., feat:<name>:<x|y> ...
# Feature cells may be empty (= missing). A sidecar JSON schema file, when
# given, overrides header inference.
# ---------------------------------------------------------------------------

_FIXED_COLUMNS = ("id", "regime", "label", "severity", "is_baseline")


def _parse_header(header: list[str]) -> tuple[Schema | None, str, list[str], list[tuple[str, str]]]:
    """Split a header row into fixed columns, context names, and feature slots.

    Returns (None, healthy_or_empty, context_names, feature_slots); the schema
    itself needs the class set, which is only known after reading the rows.
    """
    if len(header) < 5:
        raise DatasetError("header too short; expected at least the 5 fixed columns")
    fixed = header[:5]
    healthy = ""
    label_col = fixed[2]
    if label_col.startswith("label:"):
        healthy = label_col.split(":", 1)[1]
        fixed[2] = "label"
    if tuple(fixed) != _FIXED_COLUMNS:
        raise DatasetError(f"unexpected fixed columns {header[:5]}; want {_FIXED_COLUMNS}")
    context_names: list[str] = []
    feature_slots: list[tuple[str, str]] = []
    for col in header[5:]:
        if col.startswith("ctx:"):
            if feature_slots:
                raise DatasetError("context columns must precede feature columns")
            context_names.append(col[4:])
        elif col.startswith("feat:"):
            parts = col.split(":")
            if len(parts) != 3 or parts[2] not in (AXIS_X, AXIS_Y):
                raise DatasetError(f"malformed feature column {col!r}")
            feature_slots.append((parts[1], parts[2]))
        else:
            raise DatasetError(f"unknown column {col!r}")
    names = [name for name, axis in feature_slots[::2]]
    if len(feature_slots) % 2 != 0:
        raise DatasetError("odd number of feature columns; each feature needs an x and a y slot")
    for i, name in enumerate(names):
        if feature_slots[2 * i] != (name, AXIS_X) or feature_slots[2 * i + 1] != (name, AXIS_Y):
            raise DatasetError(f"feature {name!r} must contribute adjacent x then y columns")
    return None, healthy, context_names, feature_slots


def _parse_float(cell: str, row_no: int, col: str) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise DatasetError(f"row {row_no}: non-numeric value {cell!r} in column {col}") from None
    if math.isnan(value) or math.isinf(value):
        raise DatasetError(
            f"row {row_no}: non-finite value {cell!r} in column {col}; encode missing as an empty cell"
        )
    return value


def load_dataset(path: str | Path, schema: Schema | None = None) -> LabeledDataset:
    """Load a dataset CSV, optionally overriding header inference with a schema.

    When no explicit schema is given and ``<path>.schema.json`` exists, it is
    used as the sidecar schema. Errors carry the 1-based row number of the
    offending line.
    """
    path = Path(path)
    if schema is None:
        sidecar = path.with_suffix(path.suffix + ".schema.json")
        if sidecar.exists():
            schema = schema_from_json(json.loads(sidecar.read_text()))
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetError("empty file") from None
        _, healthy_from_header, context_names, feature_slots = _parse_header(header)
        n_ctx, n_slots = len(context_names), len(feature_slots)

        observations: list[Observation] = []
        row_numbers: list[int] = []
        baseline_ids: list[str] = []
        seen_labels: list[str] = []
        for row_no, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 5 + n_ctx + n_slots:
                raise DatasetError(
                    f"row {row_no}: expected {5 + n_ctx + n_slots} cells, found {len(row)}"
                )
            obs_id, regime, label, severity_cell, baseline_cell = row[:5]
            severity = _parse_float(severity_cell, row_no, "severity")
            ctx_vals = tuple(
                _parse_float(cell, row_no, f"ctx:{name}")
                for name, cell in zip(context_names, row[5 : 5 + n_ctx])
            )
            slots: list[float | None] = []
            for (fname, axis), cell in zip(feature_slots, row[5 + n_ctx :]):
                if cell == "":
                    slots.append(None)
                else:
                    slots.append(_parse_float(cell, row_no, f"feat:{fname}:{axis}"))
            if schema is not None and label not in schema.class_names:
                raise DatasetError(f"row {row_no}: unknown class label {label!r}")
            if label not in seen_labels:
                seen_labels.append(label)
            if baseline_cell not in ("", "0", "1"):
                raise DatasetError(f"row {row_no}: is_baseline must be 0 or 1, got {baseline_cell!r}")
            if baseline_cell == "1":
                baseline_ids.append(obs_id)
            try:
                observations.append(
                    Observation(
                        id=obs_id,
                        context=ContextVector(ctx_vals),
                        features=FeatureVector(tuple(slots)),
                        label=label,
                        severity=severity,
                        regime=regime,
                    )
                )
            except DatasetError as exc:
                raise DatasetError(f"row {row_no}: {exc}") from None
            row_numbers.append(row_no)

    if schema is None:
        healthy = healthy_from_header
        if not healthy:
            baseline_labels = {o.label for o in observations if o.id in set(baseline_ids)}
            if len(baseline_labels) == 1:
                healthy = baseline_labels.pop()
            elif "healthy" in seen_labels:
                healthy = "healthy"
            else:
                raise DatasetError(
                    "cannot infer the healthy class: name it in the label header "
                    "(label:<class>) or provide a sidecar schema"
                )
        if healthy not in seen_labels:
            seen_labels.append(healthy)
        schema = Schema(
            feature_names=tuple(name for name, _ in feature_slots[::2]),
            context_names=tuple(context_names),
            class_names=tuple(seen_labels),
            healthy_class=healthy,
        )
    else:
        if tuple(context_names) != schema.context_names:
            raise DatasetError("context columns do not match the provided schema")
        if tuple(name for name, _ in feature_slots[::2]) != schema.feature_names:
            raise DatasetError("feature columns do not match the provided schema")

    # Surface baseline-on-faulted-row errors with their row numbers.
    flagged = set(baseline_ids)
    for row_no, obs in zip(row_numbers, observations):
        if obs.id in flagged and obs.label != schema.healthy_class:
            raise DatasetError(f"row {row_no}: baseline flag on non-healthy observation {obs.id!r}")
    return LabeledDataset(tuple(observations), schema, tuple(baseline_ids))


def _fmt(value: float) -> str:
    return repr(float(value))


def dataset_to_csv(ds: LabeledDataset) -> str:
    """Render a dataset in canonical CSV form (stable float formatting)."""
    schema = ds.schema
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    header = ["id", "regime", f"label:{schema.healthy_class}", "severity", "is_baseline"]
    header += [f"ctx:{name}" for name in schema.context_names]
    for name in schema.feature_names:
        header += [f"feat:{name}:x", f"feat:{name}:y"]
    writer.writerow(header)
    baseline_ids = set(ds.baselines)
    for obs in ds.observations:
        row = [
            obs.id,
            obs.regime,
            obs.label,
            _fmt(obs.severity),
            "1" if obs.id in baseline_ids else "0",
        ]
        row += [_fmt(v) for v in obs.context.values]
        row += ["" if v is None else _fmt(v) for v in obs.features.slots]
        writer.writerow(row)
    return buf.getvalue()


def save_dataset(ds: LabeledDataset, path: str | Path) -> None:
    Path(path).write_text(dataset_to_csv(ds), encoding="utf-8")


def schema_to_json(schema: Schema) -> dict:
    return {
        "feature_names": list(schema.feature_names),
        "context_names": list(schema.context_names),
        "class_names": list(schema.class_names),
        "healthy_class": schema.healthy_class,
    }


def schema_from_json(doc: dict) -> Schema:
    return Schema(
        feature_names=tuple(doc["feature_names"]),
        context_names=tuple(doc["context_names"]),
        class_names=tuple(doc["class_names"]),
        healthy_class=doc["healthy_class"],
    )


# ---------------------------------------------------------------------------
# Baseline selection and dataset partitioning
# ---------------------------------------------------------------------------


def _scaled_contexts(observations: tuple[Observation, ...]) -> list[tuple[float, ...]]:
    n = len(observations[0].context)
    lo = [min(o.context.values[j] for o in observations) for j in range(n)]
    hi = [max(o.context.values[j] for o in observations) for j in range(n)]
    span = [h - l if h > l else 1.0 for l, h in zip(lo, hi)]
    return [
        tuple((o.context.values[j] - lo[j]) / span[j] for j in range(n)) for o in observations
    ]


def select_baselines(candidates: tuple[Observation, ...], count: int) -> tuple[str, ...]:
    """Pick ``count`` observations spanning the widest context range.

    Greedy max-min dispersion on min-max-scaled context: seed with the most
    distant pair, then repeatedly add the candidate farthest from the current
    selection. Ties break on observation id. Returns ids in dataset order.
    """
    if count <= 0:
        return ()
    if len(candidates) <= count:
        return tuple(o.id for o in candidates)
    pts = _scaled_contexts(candidates)

    def dist(a: int, b: int) -> float:
        return math.dist(pts[a], pts[b])

    n = len(candidates)
    best_pair = min(
        ((i, j) for i in range(n) for j in range(i + 1, n)),
        key=lambda p: (-dist(*p), candidates[p[0]].id, candidates[p[1]].id),
    )
    chosen = [best_pair[0], best_pair[1]]
    remaining = [i for i in range(n) if i not in chosen]
    while len(chosen) < count:
        nxt = min(
            remaining,
            key=lambda i: (-min(dist(i, c) for c in chosen), candidates[i].id),
        )
        chosen.append(nxt)
        remaining.remove(nxt)
    chosen_set = set(chosen)
    return tuple(candidates[i].id for i in range(n) if i in chosen_set)


def _with_side_baselines(
    observations: tuple[Observation, ...], schema: Schema, baseline_count: int
) -> LabeledDataset:
    healthy = tuple(o for o in observations if o.label == schema.healthy_class)
    baselines = select_baselines(healthy, baseline_count) if healthy else ()
    return LabeledDataset(observations, schema, baselines)


def split_by_regime(
    ds: LabeledDataset, regime_a: str, regime_b: str, baseline_count: int = 16
) -> tuple[LabeledDataset, LabeledDataset]:
    """Partition a dataset by regime tag into (side_a, side_b).

    Each side gets its own baselines, re-selected among that side's healthy
    observations by max-min context dispersion; normalization for a train/test
    pass always uses the training side's baselines.
    """
    side_a: list[Observation] = []
    side_b: list[Observation] = []
    for obs in ds.observations:
        if obs.regime == regime_a:
            side_a.append(obs)
        elif obs.regime == regime_b:
            side_b.append(obs)
        else:
            raise DatasetError(
                f"observation {obs.id!r} has regime {obs.regime!r}; expected "
                f"{regime_a!r} or {regime_b!r}"
            )
    if not side_a or not side_b:
        empty = regime_a if not side_a else regime_b
        warnings.warn(f"regime {empty!r} has no observations; split is degenerate", stacklevel=2)
    return (
        _with_side_baselines(tuple(side_a), ds.schema, baseline_count),
        _with_side_baselines(tuple(side_b), ds.schema, baseline_count),
    )


def filter_by_severity(ds: LabeledDataset, min_severity: float) -> LabeledDataset:
    """Drop faulted observations with severity below the threshold.

    Healthy observations are always retained, so the baseline set survives.
    """
    if not (0.0 <= min_severity):
        raise DatasetError(f"min_severity must be nonnegative, got {min_severity}")
    kept = tuple(
        obs
        for obs in ds.observations
        if obs.label == ds.schema.healthy_class or obs.severity >= min_severity
    )
    kept_ids = {o.id for o in kept}
    baselines = tuple(b for b in ds.baselines if b in kept_ids)
    return replace(ds, observations=kept, baselines=baselines)
