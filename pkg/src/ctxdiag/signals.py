"""Transient-curve landmarks and the synthetic observation generator.

The landmark extractor turns uniformly sampled transient curves into (x, y)
feature slots by watching the curve's slope cross hand-set entry/exit
thresholds inside a search window. Detectors that find no matching slope
pattern report the feature as missing; real detectors also occasionally lock
onto the wrong excursion, so the generator simulates both failure modes.

The generator does not synthesize curves. It draws a context from a per-regime
distribution, places each feature's healthy (x, y) location with a smooth
context response, shifts the affected features by severity-scaled fault
offsets, adds Gaussian noise, and knocks slots out per the missing/erroneous
model. Faulted features drift late and low by default: x offsets are
nonnegative and y offsets nonpositive.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .data import (
    ContextVector,
    DatasetError,
    FeatureVector,
    LabeledDataset,
    Observation,
    Schema,
    select_baselines,
)

__all__ = [
    "TransientCurve",
    "FeatureDetectorSpec",
    "extract_features",
    "SlotResponse",
    "RegimeContext",
    "FaultShift",
    "CalibrationModel",
    "MissingModel",
    "SeveritySpec",
    "GeneratorConfig",
    "generate_observation",
    "generate_dataset",
    "default_config",
    "load_config",
    "save_config",
    "load_curve_csv",
]

DETECTOR_KINDS = ("peak", "valley", "rise-crossing", "settle-point")


@dataclass(frozen=True)
class TransientCurve:
    """One uniformly sampled recording of a single variable."""

    name: str
    times: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        if len(self.times) != len(self.values):
            raise ValueError(f"curve {self.name}: {len(self.times)} times vs {len(self.values)} values")
        if len(self.times) < 2:
            raise ValueError(f"curve {self.name}: need at least 2 samples")
        diffs = np.diff(self.times)
        if np.any(diffs <= 0):
            raise ValueError(f"curve {self.name}: time must be strictly increasing")
        step = diffs[0]
        if np.any(np.abs(diffs - step) > 1e-9 * max(abs(step), 1.0)):
            raise ValueError(f"curve {self.name}: sampling step is not uniform")


@dataclass(frozen=True)
class FeatureDetectorSpec:
    """Slope-threshold recipe for locating one landmark on one curve.

    ``entry_slope``/``exit_slope`` are in value units per second. For peaks the
    slope must first rise through ``entry_slope`` and later fall through
    ``exit_slope``; valleys mirror that. ``rise-crossing`` fires at the first
    sample whose slope reaches ``entry_slope``; ``settle-point`` fires at the
    first sample where ``|slope|`` drops to ``exit_slope`` after having reached
    ``entry_slope``.
    """

    feature: str
    curve: str
    kind: str
    entry_slope: float
    exit_slope: float
    window: tuple[float, float]

    def __post_init__(self):
        if self.kind not in DETECTOR_KINDS:
            raise ValueError(f"unknown detector kind {self.kind!r}")
        if not self.window[0] < self.window[1]:
            raise ValueError(f"detector {self.feature}: window {self.window} is empty")
        if self.kind in ("peak", "valley") and self.entry_slope == self.exit_slope:
            raise ValueError(f"detector {self.feature}: entry and exit slopes must differ")


def _smooth5(values: np.ndarray) -> np.ndarray:
    # Centered 5-point moving average with edge replication; linear in the
    # values, which keeps detection scale-covariant.
    padded = np.pad(values, 2, mode="edge")
    kernel = np.ones(5) / 5.0
    return np.convolve(padded, kernel, mode="valid")


def _slopes(times: np.ndarray, smoothed: np.ndarray) -> np.ndarray:
    slopes = np.empty_like(smoothed)
    slopes[1:-1] = (smoothed[2:] - smoothed[:-2]) / (times[2:] - times[:-2])
    slopes[0] = (smoothed[1] - smoothed[0]) / (times[1] - times[0])
    slopes[-1] = (smoothed[-1] - smoothed[-2]) / (times[-1] - times[-2])
    return slopes


def _detect(spec: FeatureDetectorSpec, curve: TransientCurve) -> tuple[float, float] | None:
    times = np.asarray(curve.times, dtype=float)
    raw = np.asarray(curve.values, dtype=float)
    slopes = _slopes(times, _smooth5(raw))
    in_window = (times >= spec.window[0]) & (times <= spec.window[1])
    idx = np.nonzero(in_window)[0]
    if idx.size == 0:
        return None

    if spec.kind == "peak":
        entry = next((i for i in idx if slopes[i] >= spec.entry_slope), None)
        if entry is None:
            return None
        exit_ = next((i for i in idx if i > entry and slopes[i] <= spec.exit_slope), None)
        if exit_ is None:
            return None
        seg = slice(entry, exit_ + 1)
        k = entry + int(np.argmax(raw[seg]))
        return float(times[k]), float(raw[k])

    if spec.kind == "valley":
        entry = next((i for i in idx if slopes[i] <= spec.entry_slope), None)
        if entry is None:
            return None
        exit_ = next((i for i in idx if i > entry and slopes[i] >= spec.exit_slope), None)
        if exit_ is None:
            return None
        seg = slice(entry, exit_ + 1)
        k = entry + int(np.argmin(raw[seg]))
        return float(times[k]), float(raw[k])

    if spec.kind == "rise-crossing":
        k = next((i for i in idx if slopes[i] >= spec.entry_slope), None)
        if k is None:
            return None
        return float(times[k]), float(raw[k])

    # settle-point: activity, then the slope magnitude dies down.
    armed = False
    for i in idx:
        if not armed:
            if abs(slopes[i]) >= spec.entry_slope:
                armed = True
        elif abs(slopes[i]) <= spec.exit_slope:
            return float(times[i]), float(raw[i])
    return None


def extract_features(
    curves: list[TransientCurve], specs: list[FeatureDetectorSpec]
) -> FeatureVector:
    """Run every detector and pack the landmarks into an interleaved x/y vector.

    A detector that finds no matching slope pattern yields missing x and y
    slots. Deterministic given its inputs.
    """
    by_name = {c.name: c for c in curves}
    slots: list[float | None] = []
    for spec in specs:
        if spec.curve not in by_name:
            raise ValueError(f"detector {spec.feature!r} targets absent curve {spec.curve!r}")
        hit = _detect(spec, by_name[spec.curve])
        if hit is None:
            slots += [None, None]
        else:
            slots += [hit[0], hit[1]]
    return FeatureVector(tuple(slots))


def load_curve_csv(path: str | Path, name: str | None = None) -> TransientCurve:
    """Read a two-column (time,value) CSV; the curve name defaults to the stem."""
    path = Path(path)
    rows = np.loadtxt(path, delimiter=",", ndmin=2)
    if rows.shape[1] != 2:
        raise ValueError(f"{path}: expected two columns (time,value)")
    return TransientCurve(
        name=name or path.stem,
        times=tuple(float(t) for t in rows[:, 0]),
        values=tuple(float(v) for v in rows[:, 1]),
    )


# ---------------------------------------------------------------------------
# Synthetic observation generator
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SlotResponse:
    """Healthy location of one slot as a smooth function of context.

    Affine part plus two smooth nonlinear terms around ``curve_center``: a
    saturating bend, gain * tanh(weights . (c - center)), and a medium-scale
    ripple, gain * sin(weights . (c - center)). The ripple is what a linear
    fit cannot follow but a local estimate can.
    """

    intercept: float
    linear: tuple[float, ...]
    curve_gain: float = 0.0
    curve_weights: tuple[float, ...] = ()
    curve_center: tuple[float, ...] = ()
    ripple_gain: float = 0.0
    ripple_weights: tuple[float, ...] = ()

    def __call__(self, context: tuple[float, ...]) -> float:
        value = self.intercept + float(np.dot(self.linear, context))
        if self.curve_gain or self.ripple_gain:
            centered = np.asarray(context, dtype=float)
            if self.curve_center:
                centered = centered - np.asarray(self.curve_center)
            if self.curve_gain:
                value += self.curve_gain * math.tanh(float(np.dot(self.curve_weights, centered)))
            if self.ripple_gain:
                value += self.ripple_gain * math.sin(float(np.dot(self.ripple_weights, centered)))
        return value


@dataclass(frozen=True)
class RegimeContext:
    """Per-regime Gaussian distribution of the context variables.

    ``loadings`` (one row per variable, one column per shared latent factor)
    correlate the variables the way real ambient conditions co-move; each
    variable keeps enough idiosyncratic variance for unit total variance, so
    ``spread`` stays the per-variable standard deviation. With probability
    ``tail_prob`` a day is unseasonable and the whole draw widens by
    ``tail_scale``; those days are what lets a baseline set span conditions
    well beyond one campaign's typical weather.
    """

    mean: tuple[float, ...]
    spread: tuple[float, ...]
    loadings: tuple[tuple[float, ...], ...] = ()
    tail_prob: float = 0.0
    tail_scale: float = 1.0

    def __post_init__(self):
        if any(s < 0 for s in self.spread):
            raise ValueError("context spread must be nonnegative")
        if not (0.0 <= self.tail_prob <= 1.0):
            raise ValueError("tail_prob outside [0, 1]")
        if self.tail_scale < 1.0:
            raise ValueError("tail_scale must be >= 1")
        if self.loadings:
            if len(self.loadings) != len(self.mean):
                raise ValueError("need one loading row per context variable")
            if any(sum(l * l for l in row) > 1.0 + 1e-12 for row in self.loadings):
                raise ValueError("loading rows must have norm <= 1")

    def draw(self, rng: np.random.Generator) -> tuple[float, ...]:
        n = len(self.mean)
        widen = self.tail_scale if rng.random() < self.tail_prob else 1.0
        eps = rng.standard_normal(n)
        if not self.loadings:
            return tuple(
                float(m + widen * s * e) for m, s, e in zip(self.mean, self.spread, eps)
            )
        z = rng.standard_normal(len(self.loadings[0]))
        values = []
        for i in range(n):
            row = np.asarray(self.loadings[i])
            resid = math.sqrt(max(0.0, 1.0 - float(row @ row)))
            values.append(
                self.mean[i] + widen * self.spread[i] * (float(row @ z) + resid * eps[i])
            )
        return tuple(values)


@dataclass(frozen=True)
class FaultShift:
    feature: str
    x_shift: float
    y_shift: float


@dataclass(frozen=True)
class CalibrationModel:
    """Wide-span healthy calibration runs.

    With probability ``prob``, a healthy observation is a deliberate
    calibration run whose ambient conditions are drawn uniformly (in latent
    factor space, half-range ``z_span``) around a season-wide ``center``
    instead of the campaign's weather. These runs are what gives the baseline
    pool its reach across ambient conditions; faulted runs never get them.
    """

    prob: float = 0.0
    center: tuple[float, ...] = ()
    z_span: float = 0.0

    def __post_init__(self):
        if not (0.0 <= self.prob <= 1.0):
            raise ValueError("calibration prob outside [0, 1]")
        if self.z_span < 0:
            raise ValueError("z_span must be nonnegative")


@dataclass(frozen=True)
class MissingModel:
    """Detector failure model: whole features drop out or report wild values.

    Any feature goes missing with probability ``base`` (both slots at once). A
    feature the fault actually distorts additionally goes missing with
    ``severity_gain * severity``: the landmark is deformed past what its
    detector recognizes, so missingness itself carries a class signature.
    Independently, with probability ``erroneous``, the detector locks onto the
    wrong excursion and both slots land ``erroneous_scale`` noise units away
    from the truth.
    """

    base: float = 0.0
    severity_gain: float = 0.0
    erroneous: float = 0.0
    erroneous_scale: float = 120.0

    def __post_init__(self):
        for p in (self.base, self.severity_gain, self.erroneous):
            if not (0.0 <= p <= 1.0):
                raise ValueError(f"missing-model probability {p} outside [0, 1]")
        if self.erroneous_scale < 0:
            raise ValueError("erroneous_scale must be nonnegative")

    def p_missing(self, severity: float, affected: bool) -> float:
        p = self.base + (self.severity_gain * severity if affected else 0.0)
        return min(1.0, p)


@dataclass(frozen=True)
class SeveritySpec:
    """How severities are drawn for one fault class."""

    kind: str = "constant"  # "constant" or "uniform"
    value: float = 1.0
    low: float = 0.0
    high: float = 1.0

    def draw(self, rng: np.random.Generator) -> float:
        if self.kind == "constant":
            return self.value
        if self.kind == "uniform":
            return float(rng.uniform(self.low, self.high))
        raise ValueError(f"unknown severity kind {self.kind!r}")


@dataclass(frozen=True)
class GeneratorConfig:
    schema: Schema
    regimes: dict[str, RegimeContext]
    responses: tuple[SlotResponse, ...]  # one per slot, x then y per feature
    noise: tuple[float, ...]  # per-slot Gaussian sigma
    fault_profiles: dict[str, tuple[FaultShift, ...]]
    missing: MissingModel = field(default_factory=MissingModel)
    calibration: CalibrationModel = field(default_factory=CalibrationModel)
    counts: dict[str, dict[str, int]] = field(default_factory=dict)  # regime -> class -> n
    severity: dict[str, SeveritySpec] = field(default_factory=dict)
    baseline_count: int = 16
    seed: int = 0

    def __post_init__(self):
        if len(self.responses) != self.schema.n_slots:
            raise ValueError("need one response per slot")
        if len(self.noise) != self.schema.n_slots:
            raise ValueError("need one noise scale per slot")
        if any(s < 0 for s in self.noise):
            raise ValueError("noise scales must be nonnegative")
        for label in self.fault_profiles:
            if label not in self.schema.class_names:
                raise ValueError(f"fault profile for unknown class {label!r}")

    def slot_index(self, feature: str, axis: str) -> int:
        return 2 * self.schema.feature_names.index(feature) + (0 if axis == "x" else 1)


def _draw_context(
    cfg: GeneratorConfig, regime: str, label: str, rng: np.random.Generator
) -> ContextVector:
    dist = cfg.regimes[regime]
    cal = cfg.calibration
    is_calibration = (
        label == cfg.schema.healthy_class and cal.prob > 0.0 and rng.random() < cal.prob
    )
    if not is_calibration:
        return ContextVector(dist.draw(rng))
    n = len(dist.mean)
    eps = rng.standard_normal(n)
    if not dist.loadings:
        z = rng.uniform(-cal.z_span, cal.z_span, size=n)
        return ContextVector(
            tuple(float(c + s * zi) for c, s, zi in zip(cal.center, dist.spread, z))
        )
    z = rng.uniform(-cal.z_span, cal.z_span, size=len(dist.loadings[0]))
    values = []
    for i in range(n):
        row = np.asarray(dist.loadings[i])
        resid = math.sqrt(max(0.0, 1.0 - float(row @ row)))
        values.append(cal.center[i] + dist.spread[i] * (float(row @ z) + resid * eps[i]))
    return ContextVector(tuple(values))


def generate_observation(
    cfg: GeneratorConfig,
    label: str,
    severity: float,
    regime: str,
    rng: np.random.Generator,
    obs_id: str = "obs",
) -> Observation:
    """Synthesize one observation; reproducible from the generator state."""
    if label not in cfg.schema.class_names:
        raise ValueError(f"unknown class {label!r}")
    if not (0.0 <= severity <= 1.0):
        raise ValueError(f"severity {severity} outside [0, 1]")
    if regime not in cfg.regimes:
        raise ValueError(f"unknown regime {regime!r}")

    context = _draw_context(cfg, regime, label, rng)
    clean = np.array([resp(context.values) for resp in cfg.responses], dtype=float)
    for shift in cfg.fault_profiles.get(label, ()):
        clean[cfg.slot_index(shift.feature, "x")] += severity * shift.x_shift
        clean[cfg.slot_index(shift.feature, "y")] += severity * shift.y_shift
    noisy = clean + rng.normal(0.0, cfg.noise)

    slots: list[float | None] = list(map(float, noisy))
    affected = {shift.feature for shift in cfg.fault_profiles.get(label, ())}
    for f, fname in enumerate(cfg.schema.feature_names):
        u_err, u_miss = rng.random(), rng.random()
        if u_err < cfg.missing.erroneous:
            for slot in (2 * f, 2 * f + 1):
                wild = cfg.missing.erroneous_scale * max(cfg.noise[slot], 1e-6)
                slots[slot] = float(slots[slot] + rng.choice((-1.0, 1.0)) * wild)
        if u_miss < cfg.missing.p_missing(severity, fname in affected):
            slots[2 * f] = None
            slots[2 * f + 1] = None

    return Observation(
        id=obs_id,
        context=context,
        features=FeatureVector(tuple(slots)),
        label=label,
        severity=severity,
        regime=regime,
    )


def generate_dataset(cfg: GeneratorConfig) -> LabeledDataset:
    """Generate the composition in ``cfg.counts`` and auto-select baselines.

    Observations are generated in (regime, class) order with one spawned RNG
    stream each, so the dataset is reproducible and generation could be
    parallelized per observation.
    """
    total = sum(n for per_class in cfg.counts.values() for n in per_class.values())
    streams = iter(np.random.SeedSequence(cfg.seed).spawn(total))
    observations: list[Observation] = []
    for regime in cfg.counts:
        if regime not in cfg.regimes:
            raise ValueError(f"counts reference unknown regime {regime!r}")
        for label, n in cfg.counts[regime].items():
            if n < 0:
                raise ValueError(f"negative count for ({regime}, {label})")
            spec = cfg.severity.get(label, SeveritySpec())
            for k in range(n):
                rng = np.random.default_rng(next(streams))
                severity = 0.0 if label == cfg.schema.healthy_class else spec.draw(rng)
                observations.append(
                    generate_observation(
                        cfg, label, severity, regime, rng, obs_id=f"{regime}-{label}-{k:03d}"
                    )
                )
    healthy = tuple(o for o in observations if o.label == cfg.schema.healthy_class)
    if cfg.baseline_count > 0 and not healthy:
        raise DatasetError("baselines requested but the composition has no healthy observations")
    baselines = select_baselines(healthy, cfg.baseline_count)
    return LabeledDataset(tuple(observations), cfg.schema, baselines)


# ---------------------------------------------------------------------------
# Config serialization and the stock configuration
# ---------------------------------------------------------------------------


def config_to_json(cfg: GeneratorConfig) -> dict:
    return {
        "seed": cfg.seed,
        "baseline_count": cfg.baseline_count,
        "schema": {
            "feature_names": list(cfg.schema.feature_names),
            "context_names": list(cfg.schema.context_names),
            "class_names": list(cfg.schema.class_names),
            "healthy_class": cfg.schema.healthy_class,
        },
        "regimes": {
            name: {
                "mean": list(r.mean),
                "spread": list(r.spread),
                "loadings": [list(row) for row in r.loadings],
                "tail_prob": r.tail_prob,
                "tail_scale": r.tail_scale,
            }
            for name, r in cfg.regimes.items()
        },
        "responses": [
            {
                "intercept": r.intercept,
                "linear": list(r.linear),
                "curve_gain": r.curve_gain,
                "curve_weights": list(r.curve_weights),
                "curve_center": list(r.curve_center),
                "ripple_gain": r.ripple_gain,
                "ripple_weights": list(r.ripple_weights),
            }
            for r in cfg.responses
        ],
        "noise": list(cfg.noise),
        "fault_profiles": {
            label: [
                {"feature": s.feature, "x_shift": s.x_shift, "y_shift": s.y_shift}
                for s in shifts
            ]
            for label, shifts in cfg.fault_profiles.items()
        },
        "missing": {
            "base": cfg.missing.base,
            "severity_gain": cfg.missing.severity_gain,
            "erroneous": cfg.missing.erroneous,
            "erroneous_scale": cfg.missing.erroneous_scale,
        },
        "calibration": {
            "prob": cfg.calibration.prob,
            "center": list(cfg.calibration.center),
            "z_span": cfg.calibration.z_span,
        },
        "counts": {regime: dict(per) for regime, per in cfg.counts.items()},
        "severity": {
            label: {"kind": s.kind, "value": s.value, "low": s.low, "high": s.high}
            for label, s in cfg.severity.items()
        },
    }


def config_from_json(doc: dict) -> GeneratorConfig:
    schema = Schema(
        feature_names=tuple(doc["schema"]["feature_names"]),
        context_names=tuple(doc["schema"]["context_names"]),
        class_names=tuple(doc["schema"]["class_names"]),
        healthy_class=doc["schema"]["healthy_class"],
    )
    return GeneratorConfig(
        schema=schema,
        regimes={
            name: RegimeContext(
                mean=tuple(r["mean"]),
                spread=tuple(r["spread"]),
                loadings=tuple(tuple(row) for row in r.get("loadings", ())),
                tail_prob=r.get("tail_prob", 0.0),
                tail_scale=r.get("tail_scale", 1.0),
            )
            for name, r in doc["regimes"].items()
        },
        responses=tuple(
            SlotResponse(
                intercept=r["intercept"],
                linear=tuple(r["linear"]),
                curve_gain=r.get("curve_gain", 0.0),
                curve_weights=tuple(r.get("curve_weights", ())),
                curve_center=tuple(r.get("curve_center", ())),
                ripple_gain=r.get("ripple_gain", 0.0),
                ripple_weights=tuple(r.get("ripple_weights", ())),
            )
            for r in doc["responses"]
        ),
        noise=tuple(doc["noise"]),
        fault_profiles={
            label: tuple(
                FaultShift(feature=s["feature"], x_shift=s["x_shift"], y_shift=s["y_shift"])
                for s in shifts
            )
            for label, shifts in doc["fault_profiles"].items()
        },
        missing=MissingModel(**doc.get("missing", {})),
        calibration=CalibrationModel(
            prob=doc.get("calibration", {}).get("prob", 0.0),
            center=tuple(doc.get("calibration", {}).get("center", ())),
            z_span=doc.get("calibration", {}).get("z_span", 0.0),
        ),
        counts={regime: dict(per) for regime, per in doc.get("counts", {}).items()},
        severity={
            label: SeveritySpec(**spec) for label, spec in doc.get("severity", {}).items()
        },
        baseline_count=doc.get("baseline_count", 16),
        seed=doc.get("seed", 0),
    )


def load_config(path: str | Path) -> GeneratorConfig:
    return config_from_json(json.loads(Path(path).read_text(encoding="utf-8")))


def save_config(cfg: GeneratorConfig, path: str | Path) -> None:
    Path(path).write_text(json.dumps(config_to_json(cfg), indent=2) + "\n", encoding="utf-8")


_FEATURES = (
    "thrust_peak",
    "egt_peak",
    "speed_rise",
    "fuel_peak",
    "pressure_settle",
    "nozzle_valley",
    "exhaust_peak",
    "vane_rise",
    "flow_settle",
    "egt_settle",
)

_CONTEXT = ("t1", "tex", "tdew", "baro", "humid")

_CLASSES = (
    "supply_leak",
    "sensor_gain_drift",
    "actuator_lag",
    "compensator_offset",
    "governor_misadjust",
    "bleed_valve_stuck",
    "igniter_inoperative",
    "healthy",
)

# Faults push landmarks late (x up) and weak (y down); severity scales the
# shift. x shifts are in seconds, y shifts per mille of the feature's scale.
# Profiles overlap on purpose so no single slot separates two classes.
_FAULT_PROFILES: dict[str, tuple[tuple[str, float, float], ...]] = {
    "supply_leak": (
        ("thrust_peak", 0.80, -37.7),
        ("speed_rise", 0.51, -18.8),
        ("pressure_settle", 0.87, -40.6),
        ("vane_rise", 0.36, -15.9),
    ),
    "sensor_gain_drift": (
        ("egt_peak", 0.87, -40.6),
        ("speed_rise", 0.29, -13.0),
        ("exhaust_peak", 0.61, -26.1),
    ),
    "actuator_lag": (
        ("thrust_peak", 0.41, -17.4),
        ("fuel_peak", 0.84, -39.1),
        ("pressure_settle", 0.48, -20.3),
        ("flow_settle", 0.72, -33.4),
    ),
    "compensator_offset": (
        ("egt_peak", 0.43, -18.8),
        ("nozzle_valley", 0.87, -40.6),
        ("vane_rise", 0.65, -29.0),
        ("exhaust_peak", 0.29, -13.0),
    ),
    "governor_misadjust": (
        ("speed_rise", 0.87, -40.6),
        ("fuel_peak", 0.41, -17.4),
        ("egt_settle", 0.65, -30.4),
    ),
    "bleed_valve_stuck": (
        ("pressure_settle", 1.01, -47.9),
        ("nozzle_valley", 0.72, -31.9),
        ("egt_settle", 0.43, -18.8),
    ),
    "igniter_inoperative": (
        ("thrust_peak", 0.52, -23.2),
        ("flow_settle", 0.48, -21.8),
        ("egt_settle", 0.90, -42.0),
    ),
}


def default_config(seed: int = 7) -> GeneratorConfig:
    """Stock two-regime configuration at desk scale.

    Ten features, five context variables, seven fault classes plus healthy,
    242 observations split over a warm and a cold collection campaign the way
    the stock class totals are (52/12/36/39/15/5/5/78). The healthy response
    depends strongly on context, so context shift between regimes dominates
    the fault signal unless normalization is context-sensitive.
    """
    schema = Schema(
        feature_names=_FEATURES,
        context_names=_CONTEXT,
        class_names=_CLASSES,
        healthy_class="healthy",
    )
    # Feature magnitudes: x in seconds (2..8), y per-feature units.
    y_base = {
        "thrust_peak": 2600.0,
        "egt_peak": 720.0,
        "speed_rise": 15200.0,
        "fuel_peak": 7800.0,
        "pressure_settle": 86.0,
        "nozzle_valley": 22.0,
        "exhaust_peak": 31.0,
        "vane_rise": 38.0,
        "flow_settle": 6900.0,
        "egt_settle": 640.0,
    }
    x_base = {
        "thrust_peak": 3.1,
        "egt_peak": 2.4,
        "speed_rise": 1.6,
        "fuel_peak": 2.0,
        "pressure_settle": 5.2,
        "nozzle_valley": 2.9,
        "exhaust_peak": 3.4,
        "vane_rise": 1.9,
        "flow_settle": 5.8,
        "egt_settle": 7.3,
    }
    # Context midpoint between the two collection campaigns; the nonlinear
    # bend in the healthy response is centered here.
    center = (8.5, 6.5, 1.5, 14.65, 64.5)
    responses: list[SlotResponse] = []
    noise: list[float] = []
    rng = np.random.default_rng(20_406)  # fixed: the response pattern is part of the config
    for i, name in enumerate(_FEATURES):
        # x responds mostly to temperatures, y to temperature and pressure.
        lin_x = (
            0.050 + 0.006 * (i % 3),
            0.024 - 0.004 * (i % 2),
            0.010,
            -0.05,
            0.0018,
        )
        scale = y_base[name]
        lin_y = (
            -0.0275 * scale / 10.0,
            -0.0125 * scale / 10.0,
            -0.005 * scale / 10.0,
            0.04 * scale / 10.0,
            -0.0015 * scale / 10.0,
        )
        bend = (
            float(rng.normal(0.10, 0.03)),
            float(rng.normal(0.05, 0.02)),
            float(rng.normal(0.03, 0.01)),
            float(rng.normal(0.0, 0.2)),
            float(rng.normal(0.0, 0.01)),
        )
        ripple = (
            float(rng.normal(0.55, 0.10)),
            float(rng.normal(0.30, 0.08)),
            float(rng.normal(0.10, 0.04)),
            float(rng.normal(0.0, 0.5)),
            float(rng.normal(0.0, 0.02)),
        )
        responses.append(
            SlotResponse(
                intercept=x_base[name],
                linear=lin_x,
                curve_gain=0.35,
                curve_weights=bend,
                curve_center=center,
                ripple_gain=0.15,
                ripple_weights=ripple,
            )
        )
        responses.append(
            SlotResponse(
                intercept=scale,
                linear=lin_y,
                curve_gain=0.006 * scale,
                curve_weights=bend,
                curve_center=center,
                ripple_gain=0.009 * scale,
                ripple_weights=ripple,
            )
        )
        noise += [0.09, 0.006 * scale]

    profiles = {
        label: tuple(FaultShift(f, xs, ys) for f, xs, ys in shifts)
        for label, shifts in _FAULT_PROFILES.items()
    }
    # Scale the y shifts onto each feature's unit system.
    scaled: dict[str, tuple[FaultShift, ...]] = {}
    for label, shifts in profiles.items():
        scaled[label] = tuple(
            FaultShift(s.feature, s.x_shift, s.y_shift * y_base[s.feature] / 1000.0)
            for s in shifts
        )

    counts = {
        "october": {
            "supply_leak": 26,
            "sensor_gain_drift": 6,
            "actuator_lag": 18,
            "compensator_offset": 20,
            "governor_misadjust": 8,
            "bleed_valve_stuck": 3,
            "igniter_inoperative": 3,
            "healthy": 39,
        },
        "november": {
            "supply_leak": 26,
            "sensor_gain_drift": 6,
            "actuator_lag": 18,
            "compensator_offset": 19,
            "governor_misadjust": 7,
            "bleed_valve_stuck": 2,
            "igniter_inoperative": 2,
            "healthy": 39,
        },
    }
    severity = {
        "supply_leak": SeveritySpec(kind="uniform", low=0.15, high=1.0),
        "sensor_gain_drift": SeveritySpec(kind="uniform", low=0.3, high=1.0),
        "actuator_lag": SeveritySpec(kind="uniform", low=0.15, high=1.0),
        "compensator_offset": SeveritySpec(kind="uniform", low=0.15, high=1.0),
        "governor_misadjust": SeveritySpec(kind="uniform", low=0.15, high=1.0),
        "bleed_valve_stuck": SeveritySpec(kind="constant", value=1.0),
        "igniter_inoperative": SeveritySpec(kind="constant", value=1.0),
    }
    # Ambient conditions co-move: the temperatures share a weather factor and
    # pressure/humidity share a second one, as on real observation days.
    loadings = (
        (0.96, 0.0),
        (0.94, 0.10),
        (0.88, -0.20),
        (-0.15, 0.90),
        (-0.25, 0.85),
    )
    return GeneratorConfig(
        schema=schema,
        regimes={
            "october": RegimeContext(
                mean=(13.0, 11.0, 6.0, 14.55, 57.0),
                spread=(2.2, 2.2, 2.0, 0.25, 7.0),
                loadings=loadings,
                tail_prob=0.25,
                tail_scale=2.6,
            ),
            "november": RegimeContext(
                mean=(5.0, 3.0, -2.0, 14.72, 68.0),
                spread=(2.2, 2.2, 2.0, 0.25, 7.0),
                loadings=loadings,
                tail_prob=0.25,
                tail_scale=2.6,
            ),
        },
        responses=tuple(responses),
        noise=tuple(noise),
        fault_profiles=scaled,
        missing=MissingModel(base=0.015, severity_gain=0.22, erroneous=0.006, erroneous_scale=400.0),
        calibration=CalibrationModel(prob=0.5, center=center, z_span=4.5),
        counts=counts,
        severity=severity,
        baseline_count=16,
        seed=seed,
    )
