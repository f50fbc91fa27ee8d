"""Feature normalization: context-sensitive scaling plus five stock baselines.

Every normalizer maps a raw feature vector to a zero-ish-centered normalized
vector of the same arity. The two context-sensitive methods estimate, per
slot, the value a *healthy* unit would show in the observation's ambient
context (``mu``) and the expected variation around it (``sigma``), then emit
``(v - mu) / sigma``. Both are fitted only on the healthy baseline set:

- ``ibl_contextual``: mu is a similarity-weighted mean over the k1 baselines
  with the most similar (min-max scaled) context; sigma is the root mean
  square deviation from mu over the *next* k2 most similar baselines, a
  disjoint halo around the k1 set, which deliberately overestimates the
  variation.
- ``mlr_contextual``: mu comes from one stepwise-selected linear equation per
  slot (context variables as candidates, F threshold ``f``); sigma is the
  degrees-of-freedom-corrected RMS residual of that fit, the same for every
  context.

The five non-contextual comparison methods are: no normalization, train
min/max, train mean/stddev, train percentile, and baseline mean/stddev.

Missing-value policies ``zero``, ``train_average``, and ``xmax_ymin`` impute
in raw feature space before normalization (imputing the raw training average,
for example), so affine normalizers stay exact affine maps of each other.
``d_clamp`` instead substitutes +d for a missing x slot and -d for a missing
y slot after normalization, and treats any normalized value outside [-d, d]
as erroneous, replacing it the same way; it presumes a zero-centered scale
and is therefore only valid with the baseline-anchored methods 5-7.
"""

from __future__ import annotations

import json
import math
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import regress
from .data import (
    ContextVector,
    LabeledDataset,
    NormalizedFeatureVector,
    Observation,
)

__all__ = [
    "METHODS",
    "MISSING_POLICIES",
    "NormalizerParams",
    "Normalizer",
    "ContextScaler",
    "ConfigurationError",
    "similarity",
    "fit_normalizer",
    "contextual_mu_sigma_ibl",
    "contextual_mu_sigma_mlr",
    "normalize",
    "normalize_dataset",
]

METHODS = (
    "none",
    "minmax_train",
    "avgdev_train",
    "percentile_train",
    "avgdev_base",
    "ibl_contextual",
    "mlr_contextual",
)
MISSING_POLICIES = ("zero", "train_average", "xmax_ymin", "d_clamp")
CONTEXTUAL_METHODS = ("avgdev_base", "ibl_contextual", "mlr_contextual")

_DIV_FLOOR = 1e-12
_WEIGHT_FLOOR = 1e-6


class ConfigurationError(ValueError):
    """Invalid method/policy/parameter combination."""


_METHOD_ALIASES = {"ibl": "ibl_contextual", "mlr": "mlr_contextual"}


def method_name(method: int | str) -> str:
    """Accept 1-based numbers and the ibl/mlr shorthands as method aliases."""
    if isinstance(method, int):
        if not 1 <= method <= len(METHODS):
            raise ConfigurationError(f"method number {method} outside 1..{len(METHODS)}")
        return METHODS[method - 1]
    method = _METHOD_ALIASES.get(method, method)
    if method not in METHODS:
        raise ConfigurationError(f"unknown normalization method {method!r}")
    return method


def missing_policy_name(policy: int | str) -> str:
    if isinstance(policy, int):
        if not 1 <= policy <= len(MISSING_POLICIES):
            raise ConfigurationError(f"missing policy number {policy} outside 1..{len(MISSING_POLICIES)}")
        return MISSING_POLICIES[policy - 1]
    if policy not in MISSING_POLICIES:
        raise ConfigurationError(f"unknown missing policy {policy!r}")
    return policy


def similarity(x, y) -> float:
    """Sum over components of (1 - |x_i - y_i|); not clamped per term."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"length mismatch: {x.shape} vs {y.shape}")
    return float(np.sum(1.0 - np.abs(x - y)))


@dataclass(frozen=True)
class NormalizerParams:
    k1: int = 2
    k2: int = 6
    f: float = 5.0
    d: float = 50.0
    missing: str = "d_clamp"
    stddev_ddof: int = 1  # sample convention for the mean/stddev methods
    halo: str = "disjoint"  # neighborhood layout for the IBL sigma; see fit

    def __post_init__(self):
        if self.k1 < 1 or self.k2 < 1:
            raise ConfigurationError("k1 and k2 must be >= 1")
        if self.f <= 0:
            raise ConfigurationError("f must be positive")
        if self.d <= 0:
            raise ConfigurationError("d must be positive")
        if self.halo not in ("disjoint", "subset", "equal"):
            raise ConfigurationError(f"unknown halo layout {self.halo!r}")
        missing_policy_name(self.missing)

    @property
    def missing_name(self) -> str:
        return missing_policy_name(self.missing)


@dataclass(frozen=True)
class ContextScaler:
    """Per-context-variable min/max over the baseline set; maps min->0, max->1."""

    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        if any(h < l for l, h in zip(self.lo, self.hi)):
            raise ValueError("context scaler has min > max")

    def scale(self, values) -> np.ndarray:
        lo = np.asarray(self.lo)
        span = np.maximum(np.asarray(self.hi) - lo, _DIV_FLOOR)
        return (np.asarray(values, dtype=float) - lo) / span


@dataclass(frozen=True)
class _BaselineInstance:
    obs_id: str
    scaled_context: tuple[float, ...]
    raw_context: tuple[float, ...]
    slots: tuple[float | None, ...]


@dataclass(frozen=True)
class Normalizer:
    """A fitted normalizer: method tag, parameters, and per-slot state."""

    method: str
    params: NormalizerParams
    n_slots: int
    slot_axes: tuple[str, ...]
    # Raw training statistics over observed values, used by the raw-space
    # imputation policies and by minmax/avgdev/percentile fitting.
    train_mean: tuple[float, ...] = ()
    train_min: tuple[float, ...] = ()
    train_max: tuple[float, ...] = ()
    # Method-specific state.
    slot_mean: tuple[float, ...] = ()  # avgdev_train / avgdev_base
    slot_std: tuple[float, ...] = ()
    sorted_train: tuple[tuple[float, ...], ...] = ()  # percentile_train
    baselines: tuple[_BaselineInstance, ...] = ()  # ibl_contextual
    context_scaler: ContextScaler | None = None
    slot_models: tuple[regress.LinearModel, ...] = ()  # mlr_contextual
    slot_variation: tuple[float, ...] = ()
    degenerate_slots: tuple[int, ...] = ()  # slots whose divisor hit the floor

    def mu_sigma(self, context: ContextVector, slot: int) -> tuple[float, float]:
        """Expected value and variation for one slot in one context."""
        if self.method == "ibl_contextual":
            return contextual_mu_sigma_ibl(self, context, slot)
        if self.method == "mlr_contextual":
            return contextual_mu_sigma_mlr(self, context, slot)
        if self.method in ("avgdev_train", "avgdev_base"):
            return self.slot_mean[slot], self.slot_std[slot]
        raise ConfigurationError(f"method {self.method!r} has no mu/sigma form")


def _observed(values: list[float | None]) -> list[float]:
    return [v for v in values if v is not None]


def _slot_columns(observations, n_slots: int) -> list[list[float | None]]:
    return [[obs.features.slots[i] for obs in observations] for i in range(n_slots)]


def fit_normalizer(
    method: int | str, train: LabeledDataset, params: NormalizerParams | None = None
) -> Normalizer:
    """Fit a normalizer of the given method on a training dataset.

    The baseline-anchored methods (5-7) require a nonempty baseline set, and
    the IBL method needs k1 + k2 baselines to fill its neighborhood and halo.
    Any slot with no observed value in the relevant fitting set is an error.
    """
    method = method_name(method)
    params = params or NormalizerParams()
    if params.missing_name == "d_clamp" and method not in CONTEXTUAL_METHODS:
        raise ConfigurationError(
            "the d-substitution missing policy presumes a zero-centered scale; "
            "use it with the baseline-anchored methods only"
        )
    schema = train.schema
    n_slots = schema.n_slots
    axes = tuple(schema.slot_axis(i) for i in range(n_slots))
    columns = _slot_columns(train.observations, n_slots)

    train_mean, train_min, train_max = [], [], []
    for i, col in enumerate(columns):
        obs_vals = _observed(col)
        if not obs_vals:
            raise ConfigurationError(f"slot {i} ({schema.slot_label(i)}) has no observed training value")
        train_mean.append(float(np.mean(obs_vals)))
        train_min.append(float(np.min(obs_vals)))
        train_max.append(float(np.max(obs_vals)))

    base = dict(
        method=method,
        params=params,
        n_slots=n_slots,
        slot_axes=axes,
        train_mean=tuple(train_mean),
        train_min=tuple(train_min),
        train_max=tuple(train_max),
    )
    degenerate: list[int] = []

    if method == "none":
        return Normalizer(**base)

    if method == "minmax_train":
        for i in range(n_slots):
            if train_max[i] - train_min[i] < _DIV_FLOOR:
                degenerate.append(i)
        return Normalizer(**base, degenerate_slots=tuple(degenerate))

    if method == "avgdev_train":
        means, stds = [], []
        for i, col in enumerate(columns):
            obs_vals = _observed(col)
            means.append(float(np.mean(obs_vals)))
            std = float(np.std(obs_vals, ddof=params.stddev_ddof)) if len(obs_vals) > params.stddev_ddof else 0.0
            if std < _DIV_FLOOR:
                degenerate.append(i)
            stds.append(std)
        return Normalizer(
            **base, slot_mean=tuple(means), slot_std=tuple(stds), degenerate_slots=tuple(degenerate)
        )

    if method == "percentile_train":
        pools = tuple(tuple(sorted(_observed(col))) for col in columns)
        return Normalizer(**base, sorted_train=pools)

    baseline_obs = train.baseline_observations
    if not baseline_obs:
        raise ConfigurationError(f"method {method!r} requires a nonempty baseline set")
    baseline_cols = _slot_columns(baseline_obs, n_slots)
    for i, col in enumerate(baseline_cols):
        if not _observed(col):
            raise ConfigurationError(
                f"slot {i} ({schema.slot_label(i)}) has no observed baseline value"
            )

    if method == "avgdev_base":
        means, stds = [], []
        for i, col in enumerate(baseline_cols):
            obs_vals = _observed(col)
            means.append(float(np.mean(obs_vals)))
            std = float(np.std(obs_vals, ddof=params.stddev_ddof)) if len(obs_vals) > params.stddev_ddof else 0.0
            if std < _DIV_FLOOR:
                degenerate.append(i)
            stds.append(std)
        return Normalizer(
            **base, slot_mean=tuple(means), slot_std=tuple(stds), degenerate_slots=tuple(degenerate)
        )

    if method == "ibl_contextual":
        need = params.k1 + params.k2 if params.halo == "disjoint" else max(params.k1, params.k2)
        if need > len(baseline_obs):
            raise ConfigurationError(
                f"k1 + k2 = {need} exceeds the {len(baseline_obs)} baselines"
            )
        ctx = np.array([o.context.values for o in baseline_obs], dtype=float)
        scaler = ContextScaler(
            lo=tuple(float(v) for v in ctx.min(axis=0)),
            hi=tuple(float(v) for v in ctx.max(axis=0)),
        )
        instances = tuple(
            _BaselineInstance(
                obs_id=o.id,
                scaled_context=tuple(float(v) for v in scaler.scale(o.context.values)),
                raw_context=o.context.values,
                slots=o.features.slots,
            )
            for o in baseline_obs
        )
        return Normalizer(**base, baselines=instances, context_scaler=scaler)

    # mlr_contextual: one stepwise equation per slot over the raw context.
    models: list[regress.LinearModel] = []
    variations: list[float] = []
    for i, col in enumerate(baseline_cols):
        rows = [
            baseline_obs[j].context.values for j, v in enumerate(col) if v is not None
        ]
        targets = [v for v in col if v is not None]
        X = np.array(rows, dtype=float)
        y = np.array(targets, dtype=float)
        model = regress.stepwise_select(X, y, params.f)
        try:
            var = regress.residual_variation(model, X, y)
        except regress.UnderdeterminedError:
            var = 0.0
        if var < _DIV_FLOOR:
            degenerate.append(i)
        models.append(model)
        variations.append(var)
    return Normalizer(
        **base,
        slot_models=tuple(models),
        slot_variation=tuple(variations),
        degenerate_slots=tuple(degenerate),
    )


def _ranked_baselines(norm: Normalizer, scaled_query: np.ndarray, slot: int):
    """Baselines with this slot observed, most-similar first; ties by id."""
    usable = [b for b in norm.baselines if b.slots[slot] is not None]
    sims = [similarity(scaled_query, b.scaled_context) for b in usable]
    order = sorted(range(len(usable)), key=lambda j: (-sims[j], usable[j].obs_id))
    return [(usable[j], sims[j]) for j in order]


def contextual_mu_sigma_ibl(
    norm: Normalizer, context: ContextVector, slot: int
) -> tuple[float, float]:
    """Expected value and variation of one slot from the baseline neighbors.

    mu is the similarity-weighted mean over the k1 most context-similar
    baselines (weights floored at a small positive value so off-range queries
    with negative similarities cannot flip the mean). sigma is the plain RMS
    deviation from mu over the next k2 baselines. Baselines missing this slot
    are skipped and the ranking redrawn, shrinking the sets only when the
    usable baselines run out.
    """
    if norm.method != "ibl_contextual":
        raise ConfigurationError("normalizer was not fitted with the IBL method")
    scaled = norm.context_scaler.scale(context.values)
    ranked = _ranked_baselines(norm, scaled, slot)
    k1, k2 = norm.params.k1, norm.params.k2
    if norm.params.halo == "equal":
        near, halo = ranked[:k1], ranked[:k1]
    elif norm.params.halo == "subset":
        near, halo = ranked[:k1], ranked[:k2]
    else:
        near, halo = ranked[:k1], ranked[k1 : k1 + k2]
    if not near:
        raise ConfigurationError(f"no baseline carries slot {slot}")

    weights = np.maximum([s for _, s in near], _WEIGHT_FLOOR)
    weights = weights / weights.sum()
    anchor = near[0][0].slots[slot]
    mu = float(anchor + np.dot(weights, [b.slots[slot] - anchor for b, _ in near]))
    if halo:
        sq = [(b.slots[slot] - mu) ** 2 for b, _ in halo]
        sigma = float(math.sqrt(sum(sq) / len(sq)))
    else:
        sigma = 0.0
    return mu, sigma


def contextual_mu_sigma_mlr(
    norm: Normalizer, context: ContextVector, slot: int
) -> tuple[float, float]:
    """Linear-equation expected value; variation is context-independent."""
    if norm.method != "mlr_contextual":
        raise ConfigurationError("normalizer was not fitted with the MLR method")
    mu = norm.slot_models[slot].predict(context.values)
    return mu, norm.slot_variation[slot]


def _percentile(pool: tuple[float, ...], v: float) -> float:
    below = bisect_left(pool, v)
    equal = bisect_right(pool, v) - below
    return (below + 0.5 * equal) / len(pool)


def _impute_raw(norm: Normalizer, slot: int) -> float:
    policy = norm.params.missing_name
    if policy == "zero":
        return 0.0
    if policy == "train_average":
        return norm.train_mean[slot]
    if policy == "xmax_ymin":
        return norm.train_max[slot] if norm.slot_axes[slot] == "x" else norm.train_min[slot]
    raise AssertionError(policy)


def _scale_value(norm: Normalizer, context: ContextVector, slot: int, v: float) -> float:
    method = norm.method
    if method == "none":
        return v
    if method == "minmax_train":
        span = max(norm.train_max[slot] - norm.train_min[slot], _DIV_FLOOR)
        return (v - norm.train_min[slot]) / span
    if method == "percentile_train":
        return _percentile(norm.sorted_train[slot], v)
    mu, sigma = norm.mu_sigma(context, slot)
    return (v - mu) / max(sigma, _DIV_FLOOR)


def normalize(norm: Normalizer, obs: Observation) -> NormalizedFeatureVector:
    """Normalize one observation; the output has no missing slots.

    Raw-space policies impute before scaling. The d-substitution policy fills
    a missing x slot with +d and a missing y slot with -d after scaling, and
    snaps any finite normalized value outside [-d, d] to the same substitute
    (an out-of-range value is taken to be an erroneous detection).
    """
    if len(obs.features) != norm.n_slots:
        raise ValueError(f"observation arity {len(obs.features)} != fitted arity {norm.n_slots}")
    policy = norm.params.missing_name
    d = norm.params.d
    out: list[float] = []
    for slot, v in enumerate(obs.features.slots):
        if policy == "d_clamp":
            if v is None:
                out.append(d if norm.slot_axes[slot] == "x" else -d)
                continue
            eta = _scale_value(norm, obs.context, slot, v)
            if not -d <= eta <= d:
                eta = d if norm.slot_axes[slot] == "x" else -d
            out.append(eta)
        else:
            raw = _impute_raw(norm, slot) if v is None else v
            out.append(_scale_value(norm, obs.context, slot, raw))
    return NormalizedFeatureVector(tuple(out))


def normalize_dataset(norm: Normalizer, ds: LabeledDataset) -> list[NormalizedFeatureVector]:
    return [normalize(norm, obs) for obs in ds.observations]


# ---------------------------------------------------------------------------
# JSON round trip, so training and evaluation can run as separate invocations
# ---------------------------------------------------------------------------


def normalizer_to_json(norm: Normalizer) -> dict:
    doc = {
        "method": norm.method,
        "params": {
            "k1": norm.params.k1,
            "k2": norm.params.k2,
            "f": norm.params.f,
            "d": norm.params.d,
            "missing": norm.params.missing,
            "stddev_ddof": norm.params.stddev_ddof,
            "halo": norm.params.halo,
        },
        "n_slots": norm.n_slots,
        "slot_axes": list(norm.slot_axes),
        "train_mean": list(norm.train_mean),
        "train_min": list(norm.train_min),
        "train_max": list(norm.train_max),
        "slot_mean": list(norm.slot_mean),
        "slot_std": list(norm.slot_std),
        "sorted_train": [list(p) for p in norm.sorted_train],
        "degenerate_slots": list(norm.degenerate_slots),
        "slot_variation": list(norm.slot_variation),
    }
    if norm.context_scaler is not None:
        doc["context_scaler"] = {"lo": list(norm.context_scaler.lo), "hi": list(norm.context_scaler.hi)}
    if norm.baselines:
        doc["baselines"] = [
            {
                "id": b.obs_id,
                "scaled_context": list(b.scaled_context),
                "raw_context": list(b.raw_context),
                "slots": [None if v is None else v for v in b.slots],
            }
            for b in norm.baselines
        ]
    if norm.slot_models:
        doc["slot_models"] = [
            {
                "selected": list(m.selected),
                "coefficients": list(m.coefficients),
                "intercept": m.intercept,
                "ssr": m.ssr,
                "row_count": m.row_count,
            }
            for m in norm.slot_models
        ]
    return doc


def normalizer_from_json(doc: dict) -> Normalizer:
    scaler = None
    if "context_scaler" in doc:
        scaler = ContextScaler(lo=tuple(doc["context_scaler"]["lo"]), hi=tuple(doc["context_scaler"]["hi"]))
    baselines = tuple(
        _BaselineInstance(
            obs_id=b["id"],
            scaled_context=tuple(b["scaled_context"]),
            raw_context=tuple(b["raw_context"]),
            slots=tuple(None if v is None else float(v) for v in b["slots"]),
        )
        for b in doc.get("baselines", [])
    )
    models = tuple(
        regress.LinearModel(
            selected=tuple(m["selected"]),
            coefficients=tuple(m["coefficients"]),
            intercept=m["intercept"],
            ssr=m["ssr"],
            row_count=m["row_count"],
        )
        for m in doc.get("slot_models", [])
    )
    return Normalizer(
        method=doc["method"],
        params=NormalizerParams(**doc["params"]),
        n_slots=doc["n_slots"],
        slot_axes=tuple(doc["slot_axes"]),
        train_mean=tuple(doc["train_mean"]),
        train_min=tuple(doc["train_min"]),
        train_max=tuple(doc["train_max"]),
        slot_mean=tuple(doc["slot_mean"]),
        slot_std=tuple(doc["slot_std"]),
        sorted_train=tuple(tuple(p) for p in doc["sorted_train"]),
        baselines=baselines,
        context_scaler=scaler,
        slot_models=models,
        slot_variation=tuple(doc["slot_variation"]),
        degenerate_slots=tuple(doc["degenerate_slots"]),
    )


def save_normalizer(norm: Normalizer, path: str | Path) -> None:
    Path(path).write_text(json.dumps(normalizer_to_json(norm), indent=2) + "\n", encoding="utf-8")


def load_normalizer(path: str | Path) -> Normalizer:
    return normalizer_from_json(json.loads(Path(path).read_text(encoding="utf-8")))
