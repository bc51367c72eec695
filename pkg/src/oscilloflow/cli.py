"""
Command-line interface for oscilloflow.

Exit status: 0 on success, 1 when a run fails under --strict or a sharp
inequality constant is violated, 2 on configuration errors.
"""

import functools
import io
import json
import logging
import os
import sys

import click
import numpy as np

from .config import load_config, load_sweep_document
from .errors import ConfigurationError, OscilloflowError
from .harness import SweepPlan, export_sweep, run_sweep
from .inequalities import (
    RECIPES, InequalityId, as_id, ensemble_report, mollifier_checks, trajectory_ratio,
)
from .initial_data import random_band_field
from .io_handlers import load_checkpoint, load_snapshots, read_json, write_json, write_rows_csv
from .model import OscillatedFlowModel
from .norms import h2_full_norm, norm_sample
from .spectral import TorusGrid, forward_transform

logger = logging.getLogger(__name__)

REPORT_COLUMNS = ("source", "n", "health", "sup_h2", "xt", "energy_residual", "bootstrap_ok",
                  "final_time", "steps", "wall_seconds", "config_digest", "initial_digest")
MOLLIFIER_EPS = (0.5, 0.25, 0.125, 0.0625)


def _guarded(fn):
    """Turn library input errors into exit status 2 with a one-line diagnostic."""
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except OscilloflowError as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(2)
    return wrapper


@click.group()
@click.option("--verbose", "-v", is_flag=True, help="Log progress at INFO level")
def main(verbose: bool):
    """oscilloflow - time-oscillated Navier-Stokes and SQG lab"""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING,
                        format="%(asctime)s %(name)s %(levelname)s: %(message)s")


def _check_resume(ckpt, cfg) -> None:
    if ckpt.equation_kind != cfg.equation_kind:
        raise ConfigurationError(
            f"equation: checkpoint holds a {ckpt.equation_kind} state, config runs {cfg.equation_kind}")
    if ckpt.equation_kind == "SQG" and ckpt.alpha != cfg.alpha:
        raise ConfigurationError(f"alpha: checkpoint was written with alpha={ckpt.alpha}, config has {cfg.alpha}")
    if ckpt.n_multiplier != cfg.profile.n_multiplier:
        raise ConfigurationError(
            f"oscillation.N: checkpoint was written with N={ckpt.n_multiplier:g}, "
            f"config has {cfg.profile.n_multiplier:g}")


@main.command()
@click.option("--config", "-c", type=str, required=True, help="Path to JSON/YAML run config")
@click.option("--output-dir", "-o", type=str, default=None, help="Override output.dir")
@click.option("--resume", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Restart from a checkpoint file")
@click.option("--strict/--no-strict", default=None, help="Exit 1 on diverged/under_resolved runs")
@_guarded
def simulate(config: str, output_dir, resume, strict):
    """Run one configuration and write trace.csv and summary.json."""
    cfg = load_config(config)
    if output_dir is not None:
        cfg = cfg.with_output(dir=output_dir)
    if strict is not None:
        cfg = cfg.with_output(strict=strict)
    state = None
    if resume is not None:
        ckpt = load_checkpoint(resume)
        _check_resume(ckpt, cfg)
        state = ckpt.state
    model = OscillatedFlowModel(cfg)
    summary = model.fit(initial_state=state)
    paths = model.export()
    click.echo(f"{cfg.equation_kind} N={cfg.profile.n_multiplier:g}: health {summary.health}, "
               f"t={summary.final_time:.6g}, sup H2 {summary.sup_h2:.6g}, X_T {summary.xt:.6g}")
    click.echo(f"trace: {paths['trace']}")
    if model.failed and cfg.output.strict:
        sys.exit(1)


@main.command()
@click.option("--config", "-c", type=str, required=True, help="Sweep config (run config plus a sweep section)")
@click.option("--output-dir", "-o", type=str, default=None, help="Override output.dir")
@click.option("--parallelism", "-j", type=int, default=None, help="Override sweep.parallelism")
@_guarded
def sweep(config: str, output_dir, parallelism):
    """Run the base configuration once per N in sweep.n_values."""
    base, section = load_sweep_document(config)
    if parallelism is not None:
        section["parallelism"] = parallelism
    outdir = output_dir or base.output.dir
    plan = SweepPlan.from_document(base, section, output_dir=outdir)
    summaries = run_sweep(plan)
    paths = export_sweep(plan, summaries, outdir)
    for s in summaries:
        click.echo(f"N={s.n_multiplier:g}: {s.health}, sup H2 {s.sup_h2:.6g}, X_T {s.xt:.6g}")
    click.echo(f"summary: {paths['csv']}")
    if base.output.strict and any(s.health != "ok" for s in summaries):
        sys.exit(1)


def _mollifier_campaign(n: int, seed: int):
    grid = TorusGrid(2, n)
    x1, _ = grid.coordinates()
    fields = {"cos_x1": forward_transform(np.cos(x1), grid),
              "random_band": random_band_field(grid, 1, seed, kmax=4)}
    out = []
    for name, f in fields.items():
        for s in (0.5, 1.0):
            report = mollifier_checks(f, s, 0, 1, MOLLIFIER_EPS)
            out.append({"field": name, **report.to_dict()})
    return out


@main.command("verify-inequalities")
@click.option("--ids", "ids", multiple=True, help="Inequality ids (repeatable or comma separated); default all")
@click.option("--count", type=int, default=200, show_default=True, help="Ensemble size")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--n", "grid_n", type=int, default=32, show_default=True, help="Grid points per axis")
@click.option("--alpha", type=float, default=0.5, show_default=True, help="Dissipation exponent for SQG ids")
@click.option("--workers", type=int, default=1, show_default=True, help="Threads for ensemble evaluation")
@click.option("--trajectory", type=click.Path(exists=True, dir_okay=False), default=None,
              help="snapshots.npz for the trajectory ids")
@click.option("--mollifier/--no-mollifier", default=False, help="Also run the mollifier scaling checks")
@click.option("--output", type=str, default=None, help="Write the JSON report here instead of stdout")
@_guarded
def verify_inequalities(ids, count, seed, grid_n, alpha, workers, trajectory, mollifier, output):
    """Ensemble, trajectory and mollifier checks of the interpolation inequalities."""
    names = [part.strip() for item in ids for part in item.split(",") if part.strip()]
    selected = [as_id(name) for name in names] if names else [i for i in InequalityId if not RECIPES[i].trajectory]
    report = {"ensembles": [], "trajectories": [], "mollifier": []}
    tight_failed = False

    snaps = snap_alpha = None
    if trajectory is not None:
        snaps, _, snap_alpha = load_snapshots(trajectory)
    for ident in selected:
        recipe = RECIPES[ident]
        if recipe.trajectory:
            if snaps is None:
                raise OscilloflowError(f"{ident.value} is a trajectory inequality; pass --trajectory")
            ratio = trajectory_ratio(snaps, ident, snap_alpha if snap_alpha is not None else alpha)
            report["trajectories"].append({"inequality": ident.value, "ratio": ratio, "snapshots": len(snaps)})
            click.echo(f"{ident.value}: trajectory ratio {ratio}")
            continue
        rr = ensemble_report(ident, count, seed, TorusGrid(recipe.dim, grid_n), alpha, workers)
        report["ensembles"].append(rr.to_dict())
        flag = "" if rr.tight_constant_ok is None else (" [sharp ok]" if rr.tight_constant_ok else " [SHARP FAILED]")
        click.echo(f"{ident.value}: max ratio {rr.max_ratio}, mean {rr.mean_ratio}, "
                   f"{rr.degenerate_count} degenerate{flag}")
        tight_failed |= rr.tight_constant_ok is False
    if mollifier:
        report["mollifier"] = _mollifier_campaign(grid_n, seed)
        for entry in report["mollifier"]:
            click.echo(f"mollifier {entry['field']} s={entry['s']}: slope {entry['fitted_slope']}")

    if output:
        write_json(report, output)
    else:
        click.echo(json.dumps({k: v for k, v in report.items() if v}, default=float, indent=2))
    if tight_failed:
        sys.exit(1)


@main.command()
@click.argument("checkpoint", type=click.Path(exists=True, dir_okay=False))
@_guarded
def norms(checkpoint):
    """Print the norm table of a checkpointed field."""
    ckpt = load_checkpoint(checkpoint)
    sample = norm_sample(ckpt.state.field, ckpt.equation_kind, ckpt.alpha)
    rows = [("time", ckpt.state.time), ("l2", sample.l2)]
    if sample.h_alpha2 is not None:
        rows.append(("h_alpha2", sample.h_alpha2))
    rows += [("h1", sample.h1), ("h2", sample.h2), ("h_top", sample.h_top),
             ("grad_linf", sample.grad_linf), ("h2_full", h2_full_norm(ckpt.state.field))]
    for name, value in rows:
        click.echo(f"{name:>10}  {value:.12g}")


def _collect_summaries(directory: str):
    rows = []
    for root, _, files in sorted(os.walk(directory)):
        for fname in sorted(files):
            path = os.path.join(root, fname)
            if fname not in ("summary.json", "sweep_summary.json"):
                continue
            try:
                doc = read_json(path)
                if fname == "summary.json":
                    row = dict(doc["summary"])
                    row["n"] = row.pop("n_multiplier")
                    rows.append({"source": path, **row})
                else:
                    rows.extend({"source": path, **run} for run in doc["runs"])
            except (KeyError, TypeError, ValueError) as e:
                raise OscilloflowError(f"{path}: not a run summary ({e!r})") from e
    return rows


@main.command()
@click.argument("directory", type=click.Path(exists=True, file_okay=False))
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@click.option("--output", type=str, default=None, help="Write here instead of stdout")
@_guarded
def report(directory, fmt, output):
    """Combine summary.json and sweep_summary.json files found under DIRECTORY."""
    rows = _collect_summaries(directory)
    if not rows:
        raise OscilloflowError(f"no summary files under {directory}")
    if fmt == "json":
        text = json.dumps(rows, indent=2)
        if output:
            with open(output, "w") as fh:
                fh.write(text)
        else:
            click.echo(text)
    elif output:
        write_rows_csv(rows, REPORT_COLUMNS, output)
    else:
        buffer = io.StringIO()
        write_rows_csv(rows, REPORT_COLUMNS, buffer)
        click.echo(buffer.getvalue(), nl=False)


if __name__ == "__main__":
    main()
