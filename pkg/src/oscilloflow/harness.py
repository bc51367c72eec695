"""
N-sweeps: one base configuration run at several oscillation frequencies.

Every member starts from the same initial coefficients, generated once from
the base configuration. Members are independent, so they may run in a
process pool; rows are sorted by N before they are emitted.
"""

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, List, Mapping, Optional, Sequence, Tuple

from .config import SimulationConfig, config_to_dict
from .errors import ConfigurationError
from .initial_data import make_initial_data
from .io_handlers import write_json, write_rows_csv
from .model import OscillatedFlowModel, RunSummary
from .spectral import SpectralField

logger = logging.getLogger(__name__)

SUMMARY_COLUMNS = ("n", "health", "sup_h2", "xt", "energy_residual", "bootstrap_ok", "wall_seconds")


@dataclass(frozen=True)
class SweepPlan:
    base_config: SimulationConfig
    n_values: Tuple[float, ...]
    parallelism: int = 1
    output_dir: Optional[str] = None

    def __post_init__(self):
        values = tuple(float(v) for v in self.n_values)
        if not values:
            raise ConfigurationError("sweep.n_values: must not be empty")
        if any(v < 0 for v in values):
            raise ConfigurationError(f"sweep.n_values: frequencies must be >= 0, got {values}")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ConfigurationError(f"sweep.n_values: must increase strictly, got {values}")
        if int(self.parallelism) < 1:
            raise ConfigurationError(f"sweep.parallelism: must be >= 1, got {self.parallelism}")
        object.__setattr__(self, "n_values", values)
        object.__setattr__(self, "parallelism", int(self.parallelism))

    @classmethod
    def from_document(cls, base: SimulationConfig, sweep: Mapping[str, Any],
                      output_dir: Optional[str] = None) -> "SweepPlan":
        if "n_values" not in sweep:
            raise ConfigurationError("missing config key: sweep.n_values")
        n_values = sweep["n_values"]
        if not isinstance(n_values, (list, tuple)):
            raise ConfigurationError("sweep.n_values: expected a list")
        return cls(base, tuple(n_values), sweep.get("parallelism", 1), output_dir)

    def member_configs(self) -> List[SimulationConfig]:
        return [self.base_config.with_frequency(n) for n in self.n_values]


def shared_initial_data(cfg: SimulationConfig) -> SpectralField:
    spec = cfg.initial_data
    return make_initial_data(spec.generator, spec.params, cfg.grid, spec.target_h2, spec.seed, cfg.equation_kind)


def member_dir(root: str, n_multiplier: float) -> str:
    return os.path.join(root, f"N_{n_multiplier:g}")


def _run_member(cfg: SimulationConfig, initial: SpectralField, outdir: Optional[str]) -> RunSummary:
    model = OscillatedFlowModel(cfg)
    summary = model.fit(initial_field=initial)
    if outdir is not None:
        model.export(outdir)
    logger.info("sweep member N=%g finished: health %s, sup H2 %.6g", cfg.profile.n_multiplier,
                summary.health, summary.sup_h2)
    return summary


def run_sweep(plan: SweepPlan) -> List[RunSummary]:
    """Run every member of the plan; one RunSummary per N, sorted by N."""
    initial = shared_initial_data(plan.base_config)
    configs = plan.member_configs()
    outdirs = [member_dir(plan.output_dir, c.profile.n_multiplier) if plan.output_dir else None for c in configs]
    logger.info("sweep over N=%s with parallelism %d", list(plan.n_values), plan.parallelism)

    if plan.parallelism > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=min(plan.parallelism, len(configs))) as pool:
            futures = [pool.submit(_run_member, c, initial, d) for c, d in zip(configs, outdirs)]
            summaries = [fut.result() for fut in futures]
    else:
        summaries = [_run_member(c, initial, d) for c, d in zip(configs, outdirs)]
    return sorted(summaries, key=lambda s: s.n_multiplier)


def summary_rows(summaries: Sequence[RunSummary]) -> List[Dict[str, Any]]:
    rows = []
    for s in summaries:
        row = s.to_dict()
        row["n"] = row.pop("n_multiplier")
        rows.append(row)
    return rows


def export_sweep(plan: SweepPlan, summaries: Sequence[RunSummary], outdir: str) -> Dict[str, str]:
    """sweep_summary.csv with the fixed columns and sweep_summary.json with full records."""
    os.makedirs(outdir, exist_ok=True)
    rows = summary_rows(summaries)
    paths = {"csv": os.path.join(outdir, "sweep_summary.csv"), "json": os.path.join(outdir, "sweep_summary.json")}
    write_rows_csv(rows, SUMMARY_COLUMNS, paths["csv"])
    write_json({"base_config": config_to_dict(plan.base_config), "n_values": list(plan.n_values),
                "runs": rows}, paths["json"])
    return paths
