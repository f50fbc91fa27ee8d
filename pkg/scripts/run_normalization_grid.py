"""Full normalization comparison on the stock synthetic dataset.

Runs every cell of the 7-methods x 3-missing-policies x 2-classifiers grid
under the regime-swap protocol, prints the comparison table, and tests the
two superiority hypotheses (each contextual method vs the five plain ones)
with a one-sided ratio t-test at 95% confidence.

    python3 scripts/run_normalization_grid.py [seed] [--out results.csv]
"""

import argparse
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from ctxdiag import evaluate as ev
from ctxdiag import signals

PLAIN = ("none", "minmax_train", "avgdev_train", "percentile_train", "avgdev_base")


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("seed", nargs="?", type=int, default=7)
    parser.add_argument("--out", type=Path, help="also write the cells as CSV")
    parser.add_argument("--jobs", type=int, default=1)
    args = parser.parse_args()

    ds = signals.generate_dataset(signals.default_config(seed=args.seed))
    results, skipped = ev.factorial_experiment(ds, ev.GridSpec(), jobs=args.jobs)
    assert not skipped

    print(ev.render_grid_report(results))
    if args.out:
        args.out.write_text(ev.results_to_csv(results))
        print(f"wrote {args.out}")

    for method in ("ibl_contextual", "mlr_contextual"):
        mean, bound, confirmed, pairs = ev.compare_configurations(
            results,
            pick_a=lambda c, m=method: c.method == m,
            pick_b=lambda c: c.method in PLAIN,
        )
        print(
            f"{method} vs plain methods: mean ratio {mean:.3f}, 95% lower bound "
            f"{bound:.3f} over {pairs} rows -> {'better' if confirmed else 'not shown better'}"
        )

    families = {
        "purebred ibl": ("ibl_contextual", "ibl"),
        "purebred mlr": ("mlr_contextual", "mlr"),
        "hybrid ibl->mlr": ("ibl_contextual", "mlr"),
        "hybrid mlr->ibl": ("mlr_contextual", "ibl"),
    }
    print("\nfamily bests (adjusted):")
    for name, (method, classifier) in families.items():
        best = max(
            r.adjusted
            for r in results
            if r.config.method == method and r.config.classifier == classifier
        )
        print(f"  {name:<18} {best:.1f}")


if __name__ == "__main__":
    main()
