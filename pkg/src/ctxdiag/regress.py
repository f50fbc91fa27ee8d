"""Small dense least-squares engine with stepwise and forward variable selection.

Fits are solved through an orthogonal factorization (numpy's SVD-backed
``lstsq``), which also resolves rank-deficient designs with the minimum-norm
solution; plain normal equations exist only as a test oracle. Designs here are
tiny (tens of rows, at most a handful of candidate variables), so every
selection step simply refits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "LinearModel",
    "UnderdeterminedError",
    "fit_least_squares",
    "stepwise_select",
    "forward_select_to_m",
    "residual_variation",
    "partial_f",
]

_ZERO_VAR_TOL = 1e-12


class UnderdeterminedError(ValueError):
    """Fewer rows than model terms."""


@dataclass(frozen=True)
class LinearModel:
    """Affine model over a selected subset of the input variables."""

    selected: tuple[int, ...]
    coefficients: tuple[float, ...]
    intercept: float
    ssr: float
    row_count: int

    @property
    def term_count(self) -> int:
        """Selected variables plus the constant term."""
        return len(self.selected) + 1

    def predict(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return float(self.intercept + sum(c * x[j] for j, c in zip(self.selected, self.coefficients)))

    def predict_rows(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        out = np.full(X.shape[0], self.intercept)
        for j, c in zip(self.selected, self.coefficients):
            out += c * X[:, j]
        return out


def _as_design(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise ValueError("X must be a 2-D array of rows")
    if not np.all(np.isfinite(X)):
        raise ValueError("X contains non-finite values")
    return X


def fit_least_squares(X, y, variables: tuple[int, ...] | list[int] | None = None) -> LinearModel:
    """Least-squares fit of ``y`` on the chosen columns of ``X`` plus a constant.

    Raises UnderdeterminedError when there are fewer rows than terms.
    """
    X = _as_design(X)
    y = np.asarray(y, dtype=float)
    if variables is None:
        variables = tuple(range(X.shape[1]))
    variables = tuple(int(v) for v in variables)
    n = X.shape[0]
    t = len(variables) + 1
    if n < t:
        raise UnderdeterminedError(f"{n} rows cannot determine {t} terms")
    if not variables:
        mean = float(np.mean(y))
        resid = y - mean
        return LinearModel(
            selected=(), coefficients=(), intercept=mean, ssr=float(resid @ resid), row_count=n
        )
    design = np.column_stack([np.ones(n)] + [X[:, j] for j in variables])
    beta, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ beta
    return LinearModel(
        selected=variables,
        coefficients=tuple(float(b) for b in beta[1:]),
        intercept=float(beta[0]),
        ssr=float(resid @ resid),
        row_count=n,
    )


def _usable_columns(X: np.ndarray) -> list[int]:
    # Constant columns carry no information and would zero the F denominator.
    cols = []
    for j in range(X.shape[1]):
        col = X[:, j]
        if np.ptp(col) > _ZERO_VAR_TOL * max(1.0, float(np.max(np.abs(col)))):
            cols.append(j)
    return cols


def partial_f(
    ssr_without: float, ssr_with: float, rows: int, terms_with: int, tol: float = 0.0
) -> float:
    """F-statistic for one variable's contribution on top of a smaller model.

    Residual sums within ``tol`` of each other (or of zero) count as equal, so
    floating-point dust around an exact fit cannot fabricate significance.
    """
    numer = ssr_without - ssr_with
    if numer <= tol:
        return 0.0
    dof = rows - terms_with
    if dof <= 0 or ssr_with <= tol:
        return math.inf
    return numer / (ssr_with / dof)


def stepwise_select(X, y, f_threshold: float, add_only: bool = False) -> LinearModel:
    """Classical stepwise selection with one F threshold for entry and exit.

    Repeatedly adds the excluded variable with the largest partial F above the
    threshold, then drops included variables whose partial F falls below it.
    A subset history guards against the classical add/remove oscillation: any
    step that would revisit a previous subset stops the procedure. The
    intercept-only model is a valid outcome.
    """
    X = _as_design(X)
    y = np.asarray(y, dtype=float)
    n = X.shape[0]
    candidates = _usable_columns(X)
    current: list[int] = []
    model = fit_least_squares(X, y, ())
    tol = 1e-12 * max(model.ssr, 1.0)  # intercept-only SSR is the total sum of squares
    seen = {frozenset()}

    while True:
        changed = False

        # Entry: best candidate by partial F, ties to the lowest index.
        # Adding must leave at least one residual degree of freedom.
        best_j, best_f = None, f_threshold
        if n - (len(current) + 2) >= 1:
            for j in candidates:
                if j in current:
                    continue
                trial = fit_least_squares(X, y, tuple(current + [j]))
                f_stat = partial_f(model.ssr, trial.ssr, n, trial.term_count, tol)
                if f_stat > best_f:
                    best_j, best_f = j, f_stat
        if best_j is not None:
            nxt = frozenset(current + [best_j])
            if nxt in seen:
                return model
            current.append(best_j)
            seen.add(nxt)
            model = fit_least_squares(X, y, tuple(current))
            changed = True

        # Exit: drop any included variable no longer pulling its weight.
        if not add_only:
            while len(current) > 0:
                worst_j, worst_f = None, math.inf
                for j in sorted(current):
                    reduced = fit_least_squares(X, y, tuple(v for v in current if v != j))
                    f_stat = partial_f(reduced.ssr, model.ssr, n, model.term_count, tol)
                    if f_stat < worst_f:
                        worst_j, worst_f = j, f_stat
                if worst_j is None or worst_f >= f_threshold:
                    break
                nxt = frozenset(v for v in current if v != worst_j)
                if nxt in seen:
                    return model
                current.remove(worst_j)
                seen.add(nxt)
                model = fit_least_squares(X, y, tuple(current))
                changed = True

        if not changed:
            return model


def forward_select_to_m(X, y, m: int) -> LinearModel:
    """Greedy forward selection of exactly ``m`` variables, no significance test.

    Each step adds the variable with the largest residual-sum reduction, ties
    to the lowest index. Constant columns are skipped; if fewer than ``m``
    usable variables exist, all of them are taken.
    """
    X = _as_design(X)
    y = np.asarray(y, dtype=float)
    if m < 0:
        raise ValueError("m must be nonnegative")
    if m > X.shape[1]:
        raise ValueError(f"m={m} exceeds the {X.shape[1]} input variables")
    candidates = _usable_columns(X)
    current: list[int] = []
    model = fit_least_squares(X, y, ())
    while len(current) < m and len(current) < len(candidates):
        best_j, best_ssr = None, None
        for j in candidates:
            if j in current:
                continue
            trial = fit_least_squares(X, y, tuple(current + [j]))
            if best_ssr is None or trial.ssr < best_ssr:
                best_j, best_ssr = j, trial.ssr
        if best_j is None:
            break
        current.append(best_j)
        model = fit_least_squares(X, y, tuple(current))
    return model


def residual_variation(model: LinearModel, rows, targets) -> float:
    """Root mean squared residual over fitting rows, with degrees-of-freedom
    correction: sqrt(sum((target - prediction)^2) / (s - t)).
    """
    rows = _as_design(rows)
    targets = np.asarray(targets, dtype=float)
    s = rows.shape[0]
    t = model.term_count
    if s <= t:
        raise UnderdeterminedError(f"need more rows ({s}) than terms ({t}) for a variation estimate")
    resid = targets - model.predict_rows(rows)
    return float(math.sqrt(float(resid @ resid) / (s - t)))
