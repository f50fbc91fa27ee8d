"""Scoring, the regime-swap protocol, factorial experiments, and comparisons.

The confusion matrix is indexed (predicted, actual). Two scores summarize it:

- raw score: percent of correct classifications over everything evaluated;
- adjusted score: per class, average the probability of predicting X given
  the class was X (P1) and the probability the class was X given X was
  predicted (P2); the adjusted score is the mean of these class scores, which
  strips the advantage of betting on large classes. 0/0 counts as 0.

The swap protocol trains on one regime and tests on the other, then exchanges
the roles and pools both confusion matrices, so every score reflects
classification under context shift.

Comparisons between configurations use row-wise score ratios and a one-sided
Student t lower confidence bound on the mean ratio; a bound above 1 means the
first configuration is credibly better.

Multiple predictions for one underlying fault can be fused by conditional
probability: the likelihood of hypothesis h is the product over predictions p
of P(predicted = p | actual = h), estimated from a confusion matrix with
add-one smoothing so a single unseen cell cannot zero out a hypothesis.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats

from . import classify as _classify
from . import normalize as _normalize
from .data import LabeledDataset, split_by_regime

__all__ = [
    "ConfusionMatrix",
    "PipelineConfig",
    "ExperimentResult",
    "GridSpec",
    "raw_score",
    "adjusted_score",
    "swap_evaluate",
    "factorial_experiment",
    "ratio_ttest",
    "combine_observations",
    "chance_baselines",
    "compare_configurations",
]


@dataclass(frozen=True)
class ConfusionMatrix:
    """(predicted, actual) counts with class names along both axes."""

    counts: tuple[tuple[int, ...], ...]
    classes: tuple[str, ...]

    def __post_init__(self):
        c = len(self.classes)
        if len(self.counts) != c or any(len(row) != c for row in self.counts):
            raise ValueError("counts must be square over the class list")
        if any(v < 0 for row in self.counts for v in row):
            raise ValueError("counts must be nonnegative")

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.counts)

    @property
    def trace(self) -> int:
        return sum(self.counts[i][i] for i in range(len(self.classes)))

    def row_total(self, i: int) -> int:
        return sum(self.counts[i])

    def column_total(self, j: int) -> int:
        return sum(row[j] for row in self.counts)

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if self.classes != other.classes:
            raise ValueError("cannot pool matrices over different class lists")
        return ConfusionMatrix(
            counts=tuple(
                tuple(a + b for a, b in zip(ra, rb)) for ra, rb in zip(self.counts, other.counts)
            ),
            classes=self.classes,
        )

    @staticmethod
    def empty(classes: tuple[str, ...]) -> "ConfusionMatrix":
        c = len(classes)
        return ConfusionMatrix(tuple(tuple(0 for _ in range(c)) for _ in range(c)), classes)

    @staticmethod
    def from_pairs(pairs, classes: tuple[str, ...]) -> "ConfusionMatrix":
        index = {name: i for i, name in enumerate(classes)}
        grid = [[0] * len(classes) for _ in classes]
        for predicted, actual in pairs:
            grid[index[predicted]][index[actual]] += 1
        return ConfusionMatrix(tuple(tuple(row) for row in grid), classes)


def raw_score(cm: ConfusionMatrix) -> float:
    """Percent correct: 100 * trace / total."""
    if cm.total == 0:
        raise ValueError("empty confusion matrix")
    return 100.0 * cm.trace / cm.total


def adjusted_score(cm: ConfusionMatrix) -> tuple[float, tuple[float, ...], tuple[float, ...]]:
    """Class-size-compensated score plus the per-class P1 and P2 lists.

    P1[j] = P(predicted = j | actual = j), P2[j] = P(actual = j | predicted = j),
    both as percentages with 0/0 defined as 0. The adjusted score is the mean
    over classes of (P1 + P2) / 2.
    """
    if cm.total == 0:
        raise ValueError("empty confusion matrix")
    p1, p2 = [], []
    for j in range(len(cm.classes)):
        col = cm.column_total(j)
        row = cm.row_total(j)
        diag = cm.counts[j][j]
        p1.append(100.0 * diag / col if col else 0.0)
        p2.append(100.0 * diag / row if row else 0.0)
    per_class = [(a + b) / 2.0 for a, b in zip(p1, p2)]
    return float(np.mean(per_class)), tuple(p1), tuple(p2)


# ---------------------------------------------------------------------------
# Pipelines and the swap protocol
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PipelineConfig:
    """Everything needed to run one normalize-then-classify pipeline."""

    method: str = "ibl_contextual"
    missing: str = "d_clamp"
    classifier: str = "ibl"  # "ibl" or "mlr"
    k1: int = 2
    k2: int = 6
    k3: int = 1
    f: float = 5.0
    m: int = 1
    d: float = 50.0
    baseline_count: int = 16

    def __post_init__(self):
        _normalize.method_name(self.method)
        _normalize.missing_policy_name(self.missing)
        if self.classifier not in ("ibl", "mlr"):
            raise ValueError(f"unknown classifier {self.classifier!r}")
        if min(self.k1, self.k2, self.k3) < 1 or self.f <= 0 or self.m < 0 or self.d <= 0:
            raise ValueError("parameter out of range: need k1,k2,k3 >= 1, f > 0, m >= 0, d > 0")

    def sort_key(self):
        return (
            _normalize.METHODS.index(self.method),
            _normalize.MISSING_POLICIES.index(self.missing),
            self.classifier,
            self.k1,
            self.k2,
            self.k3,
            self.f,
            self.m,
            self.d,
        )

    def normalizer_params(self) -> _normalize.NormalizerParams:
        return _normalize.NormalizerParams(
            k1=self.k1, k2=self.k2, f=self.f, d=self.d, missing=self.missing
        )


@dataclass(frozen=True)
class ExperimentResult:
    config: PipelineConfig
    matrix: ConfusionMatrix
    raw: float
    adjusted: float
    p1: tuple[float, ...]
    p2: tuple[float, ...]
    direction_matrices: tuple[ConfusionMatrix, ...] = ()

    def recomputed(self) -> tuple[float, float]:
        adj, _, _ = adjusted_score(self.matrix)
        return raw_score(self.matrix), adj


def _run_direction(
    train: LabeledDataset, test: LabeledDataset, config: PipelineConfig
) -> ConfusionMatrix:
    norm = _normalize.fit_normalizer(config.method, train, config.normalizer_params())
    train_vectors = _normalize.normalize_dataset(norm, train)
    labels = [obs.label for obs in train.observations]
    classes = train.schema.class_names
    if config.classifier == "ibl":
        clf = _classify.train_ibl(zip(train_vectors, labels), config.k3, classes)
        predict = lambda v: _classify.classify_ibl(clf, v).label
    else:
        clf = _classify.train_mlr(zip(train_vectors, labels), config.m, classes)
        predict = lambda v: _classify.classify_mlr(clf, v).label
    pairs = []
    for obs in test.observations:
        vec = _normalize.normalize(norm, obs)
        pairs.append((predict(vec), obs.label))
    return ConfusionMatrix.from_pairs(pairs, classes)


def swap_evaluate(
    ds: LabeledDataset, config: PipelineConfig, regimes: tuple[str, str] | None = None
) -> ExperimentResult:
    """Train on each regime, test on the other, and score the pooled matrix."""
    if regimes is None:
        found = ds.regimes
        if len(found) != 2:
            raise ValueError(f"need exactly two regimes, found {found}")
        regimes = (found[0], found[1])
    side_a, side_b = split_by_regime(ds, regimes[0], regimes[1], config.baseline_count)
    forward = _run_direction(side_a, side_b, config)
    backward = _run_direction(side_b, side_a, config)
    pooled = forward + backward
    adj, p1, p2 = adjusted_score(pooled)
    return ExperimentResult(
        config=config,
        matrix=pooled,
        raw=raw_score(pooled),
        adjusted=adj,
        p1=p1,
        p2=p2,
        direction_matrices=(forward, backward),
    )


# ---------------------------------------------------------------------------
# Factorial grids
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    """Cartesian grid of pipeline settings; invalid cells are reported, not run."""

    methods: tuple[str, ...] = _normalize.METHODS
    missing: tuple[str, ...] = ("zero", "train_average", "xmax_ymin")
    classifiers: tuple[str, ...] = ("ibl", "mlr")
    k1: tuple[int, ...] = (2,)
    k2: tuple[int, ...] = (6,)
    k3: tuple[int, ...] = (1,)
    f: tuple[float, ...] = (5.0,)
    m: tuple[int, ...] = (1,)
    d: tuple[float, ...] = (50.0,)
    baseline_count: int = 16

    def cells(self) -> list[PipelineConfig]:
        configs = []
        for combo in itertools.product(
            self.methods, self.missing, self.classifiers, self.k1, self.k2, self.k3, self.f, self.m, self.d
        ):
            method, missing, classifier, k1, k2, k3, f, m, d = combo
            configs.append(
                PipelineConfig(
                    method=_normalize.method_name(method),
                    missing=_normalize.missing_policy_name(missing),
                    classifier=classifier,
                    k1=k1,
                    k2=k2,
                    k3=k3,
                    f=f,
                    m=m,
                    d=d,
                    baseline_count=self.baseline_count,
                )
            )
        return sorted(configs, key=PipelineConfig.sort_key)


def _validate_cell(config: PipelineConfig) -> str | None:
    if config.missing == "d_clamp" and config.method not in _normalize.CONTEXTUAL_METHODS:
        return "d-substitution missing policy requires a baseline-anchored method (5-7)"
    return None


def _run_cell(args):
    ds, config = args
    return swap_evaluate(ds, config)


def factorial_experiment(
    ds: LabeledDataset, grid: GridSpec, jobs: int = 1
) -> tuple[list[ExperimentResult], list[tuple[PipelineConfig, str]]]:
    """Run every valid grid cell; returns (results, skipped-with-reason).

    Results come back sorted by configuration regardless of execution order,
    so parallel runs are reproducible.
    """
    configs = grid.cells()
    skipped = [(c, reason) for c in configs if (reason := _validate_cell(c)) is not None]
    runnable = [c for c in configs if _validate_cell(c) is None]
    if jobs > 1 and len(runnable) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_cell, [(ds, c) for c in runnable]))
    else:
        results = [swap_evaluate(ds, c) for c in runnable]
    results.sort(key=lambda r: r.config.sort_key())
    return results, skipped


# ---------------------------------------------------------------------------
# Statistical comparison
# ---------------------------------------------------------------------------


def ratio_ttest(
    scores_a, scores_b, confidence: float = 0.95
) -> tuple[float, float, bool]:
    """One-sided lower confidence bound on the mean of a_i / b_i.

    Returns (mean ratio, lower bound, bound > 1). With a single pair the bound
    is undefined; with zero spread the bound degenerates to the mean itself.
    """
    a = np.asarray(list(scores_a), dtype=float)
    b = np.asarray(list(scores_b), dtype=float)
    if a.shape != b.shape or a.size == 0:
        raise ValueError("need matched, nonempty score lists")
    if np.any(b == 0):
        raise ValueError("zero denominator score")
    if a.size == 1:
        raise ValueError("a confidence bound needs at least two pairs")
    ratios = a / b
    mean = float(np.mean(ratios))
    sd = float(np.std(ratios, ddof=1))
    if sd == 0.0:
        return mean, mean, mean > 1.0
    t_crit = float(stats.t.ppf(confidence, df=ratios.size - 1))
    bound = mean - t_crit * sd / math.sqrt(ratios.size)
    return mean, float(bound), bound > 1.0


def compare_configurations(
    results: list[ExperimentResult],
    pick_a,
    pick_b,
    match_on=("missing", "classifier"),
    score=lambda r: r.adjusted,
    confidence: float = 0.95,
) -> tuple[float, float, bool, int]:
    """Ratio t-test of one configuration family against another.

    For every result selected by ``pick_b``, find the ``pick_a`` result that
    agrees on the ``match_on`` fields and form the ratio a/b. Returns
    (mean ratio, lower bound, verdict, number of pairs).
    """
    a_results = [r for r in results if pick_a(r.config)]
    b_results = [r for r in results if pick_b(r.config)]

    def key(config: PipelineConfig):
        return tuple(getattr(config, field_name) for field_name in match_on)

    a_by_key: dict = {}
    for r in a_results:
        a_by_key.setdefault(key(r.config), r)
    pairs = [(a_by_key[key(r.config)], r) for r in b_results if key(r.config) in a_by_key]
    if len(pairs) < 2:
        raise ValueError("not enough matched pairs to compare")
    mean, bound, verdict = ratio_ttest(
        [score(a) for a, _ in pairs], [score(b) for _, b in pairs], confidence
    )
    return mean, bound, verdict, len(pairs)


# ---------------------------------------------------------------------------
# Combining repeated observations of one fault
# ---------------------------------------------------------------------------


def combine_observations(
    cm: ConfusionMatrix, predictions: list[str]
) -> tuple[str, dict[str, float]]:
    """Fuse several predictions of the same underlying fault.

    likelihood(h) = product over predictions p of P(predicted = p | actual = h),
    with the conditional probabilities estimated from the matrix counts under
    add-one smoothing. Returns the maximum-likelihood hypothesis (ties to
    class order) and all per-hypothesis likelihoods.
    """
    if not predictions:
        raise ValueError("no predictions to combine")
    index = {name: i for i, name in enumerate(cm.classes)}
    for p in predictions:
        if p not in index:
            raise ValueError(f"unknown class {p!r}")
    c = len(cm.classes)
    likelihoods: dict[str, float] = {}
    for h, name in enumerate(cm.classes):
        col_total = cm.column_total(h)
        product = 1.0
        for p in predictions:
            product *= (cm.counts[index[p]][h] + 1.0) / (col_total + c)
        likelihoods[name] = product
    winner = max(cm.classes, key=lambda name: (likelihoods[name], -index[name]))
    return winner, likelihoods


def chance_baselines(ds: LabeledDataset) -> tuple[float, float]:
    """Best constant-guess raw score and expected adjusted score of
    frequency-proportional guessing.

    Guessing the most common class maximizes the raw score at 100 * max class
    frequency. Guessing class X with probability equal to its frequency gives
    P1 = P2 = frequency for every class, so the expected adjusted score is the
    mean class frequency, i.e. 100 / C whenever the frequencies span all C
    classes.
    """
    if len(ds) == 0:
        raise ValueError("empty dataset")
    counts = ds.class_counts()
    total = len(ds)
    freqs = [counts[name] / total for name in ds.schema.class_names]
    return 100.0 * max(freqs), 100.0 * float(np.mean(freqs))


# ---------------------------------------------------------------------------
# Matrix I/O and reports
# ---------------------------------------------------------------------------


def matrix_to_csv(cm: ConfusionMatrix) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["predicted"] + list(cm.classes))
    for name, row in zip(cm.classes, cm.counts):
        writer.writerow([name] + [str(v) for v in row])
    return buf.getvalue()


def save_matrix(cm: ConfusionMatrix, path: str | Path) -> None:
    Path(path).write_text(matrix_to_csv(cm), encoding="utf-8")


def load_matrix(path: str | Path) -> ConfusionMatrix:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if not header or header[0] != "predicted":
            raise ValueError("first header cell must be 'predicted'")
        classes = tuple(header[1:])
        rows = []
        for row in reader:
            if not row:
                continue
            if row[0] != classes[len(rows)]:
                raise ValueError(f"row {len(rows) + 2}: expected class {classes[len(rows)]!r}, got {row[0]!r}")
            rows.append(tuple(int(v) for v in row[1:]))
    return ConfusionMatrix(tuple(rows), classes)


def render_matrix_report(cm: ConfusionMatrix) -> str:
    """Aligned text report: counts, totals, P1/P2, and both scores."""
    adj, p1, p2 = adjusted_score(cm)
    raw = raw_score(cm)
    names = list(cm.classes)
    width = max(9, max(len(n) for n in names) + 1)

    def cell(v) -> str:
        return f"{v:>{width}}"

    lines = []
    lines.append("predicted \\ actual".ljust(width + 10) + "".join(cell(n) for n in names) + cell("total") + cell("P2%"))
    for i, name in enumerate(names):
        row = cm.counts[i]
        lines.append(
            name.ljust(width + 10)
            + "".join(cell(v) for v in row)
            + cell(cm.row_total(i))
            + cell(f"{p2[i]:.1f}")
        )
    lines.append(
        "total".ljust(width + 10)
        + "".join(cell(cm.column_total(j)) for j in range(len(names)))
        + cell(cm.total)
        + cell("")
    )
    lines.append(
        "P1%".ljust(width + 10) + "".join(cell(f"{v:.1f}") for v in p1) + cell("") + cell("")
    )
    lines.append("")
    lines.append(f"P1 mean: {float(np.mean(p1)):.1f}%   P2 mean: {float(np.mean(p2)):.1f}%")
    lines.append(f"Raw score: {raw:.1f}%   Adjusted score: {adj:.1f}%")
    return "\n".join(lines) + "\n"


_METHOD_TITLES = {
    "none": "1. no normalize",
    "minmax_train": "2. min/max train",
    "avgdev_train": "3. avg/dev train",
    "percentile_train": "4. percent train",
    "avgdev_base": "5. avg/dev base",
    "ibl_contextual": "6. contextual ibl",
    "mlr_contextual": "7. contextual mlr",
}

_MISSING_TITLES = {
    "zero": "1. zero",
    "train_average": "2. average",
    "xmax_ymin": "3. min/max",
    "d_clamp": "4. +/-d subst",
}


def render_grid_report(results: list[ExperimentResult]) -> str:
    """Comparison table: one row per grid cell with both scores."""
    lines = [
        f"{'Normalize':<20}{'Phase 2':<10}{'Missing':<16}{'Raw Score':>10}{'Adjusted Score':>16}"
    ]
    for r in results:
        cfg = r.config
        lines.append(
            f"{_METHOD_TITLES[cfg.method]:<20}"
            f"{('1. IBL' if cfg.classifier == 'ibl' else '2. MLR'):<10}"
            f"{_MISSING_TITLES[cfg.missing]:<16}"
            f"{r.raw:>10.1f}"
            f"{r.adjusted:>16.1f}"
        )
    return "\n".join(lines) + "\n"


def results_to_csv(results: list[ExperimentResult]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["method", "missing", "classifier", "k1", "k2", "k3", "f", "m", "d", "raw", "adjusted"]
    )
    for r in results:
        cfg = r.config
        writer.writerow(
            [
                cfg.method,
                cfg.missing,
                cfg.classifier,
                cfg.k1,
                cfg.k2,
                cfg.k3,
                repr(cfg.f),
                cfg.m,
                repr(cfg.d),
                repr(r.raw),
                repr(r.adjusted),
            ]
        )
    return buf.getvalue()


def result_to_json(result: ExperimentResult) -> dict:
    cfg = result.config
    return {
        "config": {
            "method": cfg.method,
            "missing": cfg.missing,
            "classifier": cfg.classifier,
            "k1": cfg.k1,
            "k2": cfg.k2,
            "k3": cfg.k3,
            "f": cfg.f,
            "m": cfg.m,
            "d": cfg.d,
            "baseline_count": cfg.baseline_count,
        },
        "raw": result.raw,
        "adjusted": result.adjusted,
        "p1": list(result.p1),
        "p2": list(result.p2),
        "classes": list(result.matrix.classes),
        "matrix": [list(row) for row in result.matrix.counts],
        "direction_matrices": [
            [list(row) for row in m.counts] for m in result.direction_matrices
        ],
    }
