"""Parameter sensitivity sweeps on the stock synthetic dataset.

Produces the data files behind the usual sensitivity plots:

- substitute-d sweep for the two purebred pipelines and the two hybrids,
- k1 x k2 sweep for the neighborhood pipeline (k3 = 1),
- f sweep for the linear pipeline (m = 1),
- k3 and m sweeps at the otherwise-optimal settings.

Each sweep is written as a CSV under --outdir (default sweep_data/).

    python3 scripts/run_parameter_sweeps.py [seed] [--outdir DIR]
"""

import argparse
import csv
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from ctxdiag import evaluate as ev
from ctxdiag import signals


def run(ds, **kwargs):
    return ev.swap_evaluate(ds, ev.PipelineConfig(**kwargs))


def write_rows(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    print(f"wrote {path}")


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("seed", nargs="?", type=int, default=7)
    parser.add_argument("--outdir", type=Path, default=Path("sweep_data"))
    args = parser.parse_args()
    args.outdir.mkdir(parents=True, exist_ok=True)

    ds = signals.generate_dataset(signals.default_config(seed=args.seed))

    pipelines = {
        "ibl": dict(method="ibl_contextual", classifier="ibl"),
        "mlr": dict(method="mlr_contextual", classifier="mlr"),
        "ibl1_mlr2": dict(method="ibl_contextual", classifier="mlr"),
        "mlr1_ibl2": dict(method="mlr_contextual", classifier="ibl"),
    }
    rows = []
    for d in range(5, 85, 5):
        for name, kw in pipelines.items():
            r = run(ds, missing="d_clamp", d=float(d), **kw)
            rows.append([name, d, f"{r.raw:.6f}", f"{r.adjusted:.6f}"])
    write_rows(args.outdir / "d_sweep.csv", ["pipeline", "d", "raw", "adjusted"], rows)

    rows = []
    for k1 in range(1, 9):
        for k2 in (4, 6, 8):
            r = run(ds, method="ibl_contextual", classifier="ibl", missing="d_clamp",
                    k1=k1, k2=k2, k3=1, d=50.0)
            rows.append([k1, k2, f"{r.raw:.6f}", f"{r.adjusted:.6f}"])
    write_rows(args.outdir / "k1_k2_sweep.csv", ["k1", "k2", "raw", "adjusted"], rows)

    rows = []
    for f in range(1, 9):
        r = run(ds, method="mlr_contextual", classifier="mlr", missing="d_clamp",
                f=float(f), m=1, d=15.0)
        rows.append([f, f"{r.raw:.6f}", f"{r.adjusted:.6f}"])
    write_rows(args.outdir / "f_sweep.csv", ["f", "raw", "adjusted"], rows)

    rows = []
    for k3 in range(1, 6):
        r = run(ds, method="ibl_contextual", classifier="ibl", missing="d_clamp",
                k1=2, k2=6, k3=k3, d=50.0)
        rows.append([k3, f"{r.raw:.6f}", f"{r.adjusted:.6f}"])
    write_rows(args.outdir / "k3_sweep.csv", ["k3", "raw", "adjusted"], rows)

    rows = []
    for m in range(1, 6):
        r = run(ds, method="mlr_contextual", classifier="mlr", missing="d_clamp",
                f=5.0, m=m, d=15.0)
        rows.append([m, f"{r.raw:.6f}", f"{r.adjusted:.6f}"])
    write_rows(args.outdir / "m_sweep.csv", ["m", "raw", "adjusted"], rows)


if __name__ == "__main__":
    main()
