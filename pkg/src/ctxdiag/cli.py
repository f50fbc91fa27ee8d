"""Command-line entry point.

Subcommands: gen (synthesize a dataset), extract (landmarks from curve CSVs),
eval (regime-swap evaluation of one pipeline), sweep (factorial grids and
parameter sweeps), combine (fuse repeated predictions), flag (anomalous-slot
report), score (score a stored confusion matrix).

Every flag can also be set through an environment variable with the CTXDIAG_
prefix (for example CTXDIAG_SEED=3 ctxdiag gen out.csv). Output files are
written only after a command has fully succeeded.
"""

from __future__ import annotations

import functools
import json
from dataclasses import replace
from pathlib import Path

import click

from . import evaluate as ev
from . import normalize as nz
from . import signals
from .data import DatasetError, load_dataset, save_dataset


def friendly_errors(fn):
    """Turn domain errors into clean nonzero exits instead of tracebacks."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (DatasetError, nz.ConfigurationError, ValueError, OSError) as exc:
            raise click.ClickException(str(exc)) from exc

    return wrapper

_pipeline_options = [
    click.option("--normalizer", "-n", default="ibl_contextual", show_default=True,
                 help="Normalization method, by name or number 1-7."),
    click.option("--missing", default="d_clamp", show_default=True,
                 help="Missing-value policy: zero, train_average, xmax_ymin, or d_clamp."),
    click.option("--classifier", "-c", default="ibl", show_default=True,
                 type=click.Choice(["ibl", "mlr"]), help="Phase-2 classifier."),
    click.option("--k1", default=2, show_default=True, help="Neighbors for the expected value."),
    click.option("--k2", default=6, show_default=True, help="Halo size for the expected variation."),
    click.option("--k3", default=1, show_default=True, help="Vote size for the IBL classifier."),
    click.option("-f", "--f-threshold", "f", default=5.0, show_default=True,
                 help="F threshold for stepwise selection."),
    click.option("-m", "--m-terms", "m", default=1, show_default=True,
                 help="Selected terms per class equation."),
    click.option("-d", "--d-limit", "d", default=50.0, show_default=True,
                 help="Substitute for missing/out-of-range normalized values."),
    click.option("--baseline-count", default=16, show_default=True,
                 help="Baselines re-selected per training side."),
]


def pipeline_options(fn):
    for option in reversed(_pipeline_options):
        fn = option(fn)
    return fn


def _coerce(value: str) -> int | str:
    return int(value) if value.isdigit() else value


def _build_config(normalizer, missing, classifier, k1, k2, k3, f, m, d, baseline_count):
    return ev.PipelineConfig(
        method=nz.method_name(_coerce(normalizer)),
        missing=nz.missing_policy_name(_coerce(missing)),
        classifier=classifier,
        k1=k1,
        k2=k2,
        k3=k3,
        f=f,
        m=m,
        d=d,
        baseline_count=baseline_count,
    )


def _write(path: str | None, content: str) -> None:
    if path is None or path == "-":
        click.echo(content, nl=False)
    else:
        Path(path).write_text(content, encoding="utf-8")


@click.group()
def cli():
    """Context-sensitive diagnosis toolkit for transient machinery data."""


@cli.command()
@click.argument("out", type=click.Path(dir_okay=False))
@click.option("--config", "config_path", type=click.Path(exists=True, dir_okay=False),
              help="Generator config JSON; defaults to the stock configuration.")
@click.option("--seed", type=int, default=None,
              help="Generator seed; defaults to the config's own (stock: 7).")
@click.option("--emit-config", type=click.Path(dir_okay=False),
              help="Also write the effective generator config JSON here.")
@friendly_errors
def gen(out, config_path, seed, emit_config):
    """Synthesize a labeled dataset CSV."""
    if config_path:
        cfg = signals.load_config(config_path)
        if seed is not None:
            cfg = replace(cfg, seed=seed)
    else:
        cfg = signals.default_config(seed=7 if seed is None else seed)
    ds = signals.generate_dataset(cfg)
    save_dataset(ds, out)
    if emit_config:
        signals.save_config(cfg, emit_config)
    counts = ds.class_counts()
    click.echo(f"wrote {len(ds)} observations to {out}")
    for name in ds.schema.class_names:
        click.echo(f"  {name:<22} {counts[name]}")
    click.echo(f"  baselines: {len(ds.baselines)}")


@cli.command()
@click.argument("curves", nargs=-1, required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--specs", "specs_path", required=True, type=click.Path(exists=True, dir_okay=False),
              help="JSON list of detector specs.")
@click.option("--out", "-o", default="-", help="Output CSV path, or - for stdout.")
@friendly_errors
def extract(curves, specs_path, out):
    """Extract (x, y) landmarks from two-column curve CSVs."""
    specs = [
        signals.FeatureDetectorSpec(
            feature=s["feature"],
            curve=s["curve"],
            kind=s["kind"],
            entry_slope=s["entry_slope"],
            exit_slope=s["exit_slope"],
            window=tuple(s["window"]),
        )
        for s in json.loads(Path(specs_path).read_text(encoding="utf-8"))
    ]
    curve_objs = [signals.load_curve_csv(p) for p in curves]
    vector = signals.extract_features(curve_objs, specs)
    lines = ["feature,x,y"]
    for i, spec in enumerate(specs):
        x, y = vector.slots[2 * i], vector.slots[2 * i + 1]
        lines.append(f"{spec.feature},{'' if x is None else repr(x)},{'' if y is None else repr(y)}")
    _write(out, "\n".join(lines) + "\n")


@cli.command(name="eval")
@click.argument("dataset", required=False, type=click.Path(exists=True, dir_okay=False))
@click.option("--matrix", "matrix_path", type=click.Path(exists=True, dir_okay=False),
              help="Scoring-only mode: score this stored confusion matrix instead.")
@pipeline_options
@click.option("--format", "format", default="text", show_default=True,
              type=click.Choice(["text", "csv", "json"]))
@click.option("--out", "-o", default="-", help="Output path, or - for stdout.")
@friendly_errors
def eval_cmd(dataset, matrix_path, normalizer, missing, classifier, k1, k2, k3, f, m, d,
             baseline_count, format, out):
    """Swap-evaluate one pipeline on a two-regime dataset."""
    if matrix_path:
        cm = ev.load_matrix(matrix_path)
        _write(out, _matrix_output(cm, format))
        return
    if not dataset:
        raise click.UsageError("give a dataset path or --matrix")
    config = _build_config(normalizer, missing, classifier, k1, k2, k3, f, m, d, baseline_count)
    ds = load_dataset(dataset)
    result = ev.swap_evaluate(ds, config)
    if format == "text":
        _write(out, ev.render_matrix_report(result.matrix))
    elif format == "csv":
        _write(out, ev.results_to_csv([result]))
    else:
        _write(out, json.dumps(ev.result_to_json(result), indent=2) + "\n")


def _matrix_output(cm: ev.ConfusionMatrix, style: str) -> str:
    raw = ev.raw_score(cm)
    adj, p1, p2 = ev.adjusted_score(cm)
    if style == "text":
        return ev.render_matrix_report(cm)
    if style == "csv":
        return f"raw,adjusted\n{raw!r},{adj!r}\n"
    return json.dumps(
        {"raw": raw, "adjusted": adj, "p1": list(p1), "p2": list(p2)}, indent=2
    ) + "\n"


@cli.command()
@click.argument("matrix", type=click.Path(exists=True, dir_okay=False))
@click.option("--format", "format", default="text", show_default=True,
              type=click.Choice(["text", "csv", "json"]))
@click.option("--out", "-o", default="-", help="Output path, or - for stdout.")
@friendly_errors
def score(matrix, format, out):
    """Score a stored confusion matrix (raw, adjusted, P1/P2)."""
    cm = ev.load_matrix(matrix)
    _write(out, _matrix_output(cm, format))


def _parse_values(raw: str, conv):
    return tuple(conv(part) for part in raw.split(",") if part != "")


@cli.command()
@click.argument("dataset", type=click.Path(exists=True, dir_okay=False))
@click.option("--methods", default="1,2,3,4,5,6,7", show_default=True,
              help="Comma-separated normalization methods (names or numbers).")
@click.option("--missing", default="zero,train_average,xmax_ymin", show_default=True,
              help="Comma-separated missing policies.")
@click.option("--classifiers", default="ibl,mlr", show_default=True)
@click.option("--k1", default="2", show_default=True, help="Comma-separated k1 values.")
@click.option("--k2", default="6", show_default=True)
@click.option("--k3", default="1", show_default=True)
@click.option("-f", "--f-threshold", "f", default="5", show_default=True)
@click.option("-m", "--m-terms", "m", default="1", show_default=True)
@click.option("-d", "--d-limit", "d", default="50", show_default=True)
@click.option("--baseline-count", default=16, show_default=True)
@click.option("--compare", multiple=True,
              help="Ratio t-test spec method_a:methods_b, e.g. 6:1,2,3,4,5.")
@click.option("--jobs", default=1, show_default=True, help="Parallel grid cells.")
@click.option("--format", "format", default="text", show_default=True,
              type=click.Choice(["text", "csv", "json"]))
@click.option("--out", "-o", default="-", help="Output path, or - for stdout.")
@friendly_errors
def sweep(dataset, methods, missing, classifiers, k1, k2, k3, f, m, d, baseline_count,
          compare, jobs, format, out):
    """Run a factorial grid and report every cell's scores."""
    ds = load_dataset(dataset)
    grid = ev.GridSpec(
        methods=tuple(nz.method_name(_coerce(v)) for v in methods.split(",")),
        missing=tuple(nz.missing_policy_name(_coerce(v)) for v in missing.split(",")),
        classifiers=_parse_values(classifiers, str),
        k1=_parse_values(k1, int),
        k2=_parse_values(k2, int),
        k3=_parse_values(k3, int),
        f=_parse_values(f, float),
        m=_parse_values(m, int),
        d=_parse_values(d, float),
        baseline_count=baseline_count,
    )
    results, skipped = ev.factorial_experiment(ds, grid, jobs=jobs)
    for config, reason in skipped:
        click.echo(f"skipped {config.method}/{config.missing}/{config.classifier}: {reason}", err=True)

    sections = []
    if format == "csv":
        sections.append(ev.results_to_csv(results))
    elif format == "json":
        sections.append(json.dumps([ev.result_to_json(r) for r in results], indent=2) + "\n")
    else:
        sections.append(ev.render_grid_report(results))
        best = max(results, key=lambda r: r.adjusted)
        sections.append(
            f"\nbest cell: {best.config.method} + {best.config.missing} + "
            f"{best.config.classifier} (raw {best.raw:.1f}%, adjusted {best.adjusted:.1f}%)\n"
        )
    for spec in compare:
        a_token, b_tokens = spec.split(":")
        method_a = nz.method_name(_coerce(a_token))
        methods_b = tuple(nz.method_name(_coerce(v)) for v in b_tokens.split(","))
        try:
            mean, bound, verdict, pairs = ev.compare_configurations(
                results,
                pick_a=lambda c: c.method == method_a,
                pick_b=lambda c: c.method in methods_b,
            )
        except ValueError as exc:
            click.echo(f"compare {spec!r} skipped: {exc}", err=True)
            continue
        sections.append(
            f"compare {method_a} vs {'/'.join(methods_b)}: mean ratio {mean:.3f}, "
            f"95% lower bound {bound:.3f}, better={verdict} ({pairs} pairs)\n"
        )
    _write(out, "".join(sections))


@cli.command()
@click.argument("matrix", type=click.Path(exists=True, dir_okay=False))
@click.argument("predictions", nargs=-1, required=True)
@click.option("--format", "format", default="text", show_default=True,
              type=click.Choice(["text", "json"]))
@friendly_errors
def combine(matrix, predictions, format):
    """Fuse repeated predictions of one fault via conditional probabilities."""
    cm = ev.load_matrix(matrix)
    winner, likelihoods = ev.combine_observations(cm, list(predictions))
    if format == "json":
        click.echo(json.dumps({"hypothesis": winner, "likelihoods": likelihoods}, indent=2))
        return
    click.echo(f"{'hypothesis':<22}likelihood")
    for name in cm.classes:
        mark = " <= best" if name == winner else ""
        click.echo(f"{name:<22}{likelihoods[name]:.6g}{mark}")


@cli.command()
@click.argument("dataset", type=click.Path(exists=True, dir_okay=False))
@pipeline_options
@click.option("--threshold", default=5.0, show_default=True,
              help="Flag slots with |normalized value| above this.")
@click.option("--format", "format", default="text", show_default=True,
              type=click.Choice(["text", "json"]))
@click.option("--out", "-o", default="-", help="Output path, or - for stdout.")
@friendly_errors
def flag(dataset, normalizer, missing, classifier, k1, k2, k3, f, m, d, baseline_count,
         threshold, format, out):
    """List anomalous feature slots per observation, most anomalous first."""
    ds = load_dataset(dataset)
    params = nz.NormalizerParams(k1=k1, k2=k2, f=f, d=d, missing=nz.missing_policy_name(_coerce(missing)))
    norm = nz.fit_normalizer(nz.method_name(_coerce(normalizer)), ds, params)
    report = []
    for obs in ds.observations:
        vec = nz.normalize(norm, obs)
        flagged = sorted(
            ((abs(v), i, v) for i, v in enumerate(vec.slots) if abs(v) > threshold),
            reverse=True,
        )
        report.append(
            {
                "id": obs.id,
                "label": obs.label,
                "flags": [
                    {"slot": ds.schema.slot_label(i), "value": v} for _, i, v in flagged
                ],
            }
        )
    if format == "json":
        _write(out, json.dumps(report, indent=2) + "\n")
        return
    lines = []
    for entry in report:
        lines.append(f"{entry['id']} ({entry['label']})")
        if not entry["flags"]:
            lines.append("  no flags")
        for item in entry["flags"]:
            lines.append(f"  {item['slot']:<24} {item['value']:+.2f}")
    _write(out, "\n".join(lines) + "\n")


def main():
    cli(auto_envvar_prefix="CTXDIAG")


if __name__ == "__main__":
    main()
