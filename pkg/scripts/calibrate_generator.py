"""Calibration dashboard for the stock generator configuration.

Prints the aggregates the acceptance gates depend on: the 42-cell grid
(methods 1-7 x missing 1-3 x both classifiers), the matched-row ratio tests
for the two contextual methods, the substitute-d pipelines, the k1/k2 and f
sweeps, and the severity-filter effect. Run after any generator retune:

    python3 scripts/calibrate_generator.py [seed]
"""

import sys
import time

sys.path.insert(0, "src")

from ctxdiag import evaluate as ev
from ctxdiag import normalize as nz
from ctxdiag import signals
from ctxdiag.data import filter_by_severity


def main(seed: int = 7) -> None:
    t0 = time.time()
    cfg = signals.default_config(seed=seed)
    ds = signals.generate_dataset(cfg)

    grid = ev.GridSpec()  # 7 x 3 x 2 defaults
    results, _ = ev.factorial_experiment(ds, grid)
    by_key = {(r.config.method, r.config.missing, r.config.classifier): r for r in results}

    print(f"== 42-cell grid (seed {seed}) ==")
    print(ev.render_grid_report(results))

    plain = [m for m in nz.METHODS if m not in ("ibl_contextual", "mlr_contextual")]
    best_plain = max(r.adjusted for r in results if r.config.method in plain)
    best6 = max(r.adjusted for r in results if r.config.method == "ibl_contextual")
    best7 = max(r.adjusted for r in results if r.config.method == "mlr_contextual")
    print(f"best methods 1-5 adjusted: {best_plain:.1f}")
    print(f"best method 6 adjusted:    {best6:.1f}  (ratio {best6 / best_plain:.2f})")
    print(f"best method 7 adjusted:    {best7:.1f}  (ratio {best7 / best_plain:.2f})")

    for method in ("ibl_contextual", "mlr_contextual"):
        mean, bound, verdict, pairs = ev.compare_configurations(
            results,
            pick_a=lambda c, m=method: c.method == m,
            pick_b=lambda c: c.method in plain,
        )
        worst = min(
            by_key[(method, r.config.missing, r.config.classifier)].adjusted / r.adjusted
            for r in results
            if r.config.method in plain
        )
        print(
            f"{method}: mean ratio {mean:.3f}, bound {bound:.3f}, verdict {verdict}, "
            f"pairs {pairs}, worst row ratio {worst:.3f}"
        )

    print("\n== substitute-d pipelines ==")
    nn_run = ev.swap_evaluate(
        ds, ev.PipelineConfig(method="ibl_contextual", missing="d_clamp", classifier="ibl", d=50.0)
    )
    lin_run = ev.swap_evaluate(
        ds, ev.PipelineConfig(method="mlr_contextual", missing="d_clamp", classifier="mlr", d=15.0)
    )
    print(f"contextual ibl pipeline d=50: raw={nn_run.raw:.1f} adj={nn_run.adjusted:.1f}")
    print(f"contextual mlr pipeline d=15: raw={lin_run.raw:.1f} adj={lin_run.adjusted:.1f}")

    print("\n== phase-1 sweep: k1 x k2 (ibl, k3=1, d=50) vs f (mlr, m=1, d=15) ==")
    best_lin = 0.0
    for f in range(1, 9):
        r = ev.swap_evaluate(
            ds,
            ev.PipelineConfig(
                method="mlr_contextual", missing="d_clamp", classifier="mlr", f=float(f), d=15.0
            ),
        )
        best_lin = max(best_lin, r.adjusted)
        print(f"  f={f}: adj={r.adjusted:.1f}")
    wins = 0
    cells = []
    for k1 in range(1, 9):
        for k2 in (4, 6, 8):
            r = ev.swap_evaluate(
                ds,
                ev.PipelineConfig(
                    method="ibl_contextual", missing="d_clamp", classifier="ibl",
                    k1=k1, k2=k2, d=50.0,
                ),
            )
            cells.append((k1, k2, r.adjusted))
            if r.adjusted > best_lin:
                wins += 1
    print(f"best mlr-pipeline adjusted: {best_lin:.1f}")
    for k1, k2, adj in cells:
        mark = "" if adj > best_lin else "  <-- below"
        print(f"  k1={k1} k2={k2}: adj={adj:.1f}{mark}")
    print(f"ibl cells above best mlr: {wins}/24")

    print("\n== severity filter (threshold 0.35) ==")
    full = nn_run
    reduced = ev.swap_evaluate(
        filter_by_severity(ds, 0.35),
        ev.PipelineConfig(method="ibl_contextual", missing="d_clamp", classifier="ibl", d=50.0),
    )
    removed = len(ds) - len(filter_by_severity(ds, 0.35))
    print(f"removed {removed} mild faults of {len(ds)}")
    print(f"raw {full.raw:.1f} -> {reduced.raw:.1f}   adj {full.adjusted:.1f} -> {reduced.adjusted:.1f}")

    print(f"\n[{time.time() - t0:.1f}s]")


if __name__ == "__main__":
    main(int(sys.argv[1]) if len(sys.argv) > 1 else 7)
