"""
Core model for oscilloflow runs.

This module provides the OscillatedFlowModel class that ties one
configuration to the integrator, the trace functionals and the exporters.
"""

import logging
import os
import time
from dataclasses import asdict, dataclass
from typing import Any, Dict, Optional

from .config import SimulationConfig, config_to_dict
from .dynamics import Health, RunResult, SimulationState, run_simulation
from .errors import DomainError
from .io_handlers import (
    config_digest, field_digest, persist_checkpoint, save_snapshots, write_json, write_trace_csv,
)
from .norms import bootstrap_monitor, energy_balance_report, h2_full_norm, xt_functional
from .spectral import SpectralField

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunSummary:
    """One row of a sweep; present for failed runs too, with their health."""
    n_multiplier: float
    health: str
    sup_h2: float
    xt: float
    energy_residual: Optional[float]
    bootstrap_ok: Optional[bool]
    bootstrap_first_violation: Optional[float]
    final_time: float
    steps: int
    wall_seconds: float
    config_digest: str
    initial_digest: str

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def summarize(cfg: SimulationConfig, result: RunResult, wall_seconds: float) -> RunSummary:
    trace = result.trace
    try:
        residual = energy_balance_report(trace)
    except DomainError:
        residual = None
    h2_initial = h2_full_norm(result.initial_field)
    if h2_initial > 0:
        verdict = bootstrap_monitor(trace, 1.0, h2_initial)
        bootstrap_ok, violation = verdict.holds, verdict.first_violation
    else:
        bootstrap_ok, violation = None, None
    return RunSummary(
        n_multiplier=cfg.profile.n_multiplier,
        health=result.state.health.value,
        sup_h2=float(max(trace.column("h2"))),
        xt=xt_functional(trace),
        energy_residual=residual,
        bootstrap_ok=bootstrap_ok,
        bootstrap_first_violation=violation,
        final_time=result.state.time,
        steps=result.state.step_count,
        wall_seconds=wall_seconds,
        config_digest=config_digest(config_to_dict(cfg)),
        initial_digest=field_digest(result.initial_field),
    )


class OscillatedFlowModel:
    def __init__(self, cfg: SimulationConfig):
        self.cfg = cfg
        self.result: Optional[RunResult] = None
        self.summary: Optional[RunSummary] = None

    def fit(self, initial_field: Optional[SpectralField] = None,
            initial_state: Optional[SimulationState] = None) -> RunSummary:
        """Run the configured simulation; keeps the RunResult for export."""
        start = time.perf_counter()
        self.result = run_simulation(self.cfg, initial_field=initial_field, initial_state=initial_state)
        self.summary = summarize(self.cfg, self.result, time.perf_counter() - start)
        return self.summary

    @property
    def failed(self) -> bool:
        return self.result is not None and self.result.state.health is not Health.OK

    def export(self, outdir: Optional[str] = None) -> Dict[str, str]:
        """
        Write trace.csv and summary.json, plus snapshots.npz and
        checkpoint.oscf when the output section asks for them.
        """
        if self.result is None:
            raise RuntimeError("export() called before fit()")
        cfg, result = self.cfg, self.result
        outdir = outdir or cfg.output.dir
        os.makedirs(outdir, exist_ok=True)
        paths = {"trace": os.path.join(outdir, "trace.csv"), "summary": os.path.join(outdir, "summary.json")}
        write_trace_csv(result.trace, paths["trace"])
        write_json({"config": config_to_dict(cfg), "summary": self.summary.to_dict()}, paths["summary"])
        if result.snapshots:
            paths["snapshots"] = os.path.join(outdir, "snapshots.npz")
            save_snapshots(result.snapshots, paths["snapshots"], cfg.equation_kind, cfg.alpha)
        if cfg.output.checkpoint:
            if result.state.health is Health.DIVERGED:
                logger.warning("run diverged; no checkpoint written")
            else:
                paths["checkpoint"] = os.path.join(outdir, "checkpoint.oscf")
                persist_checkpoint(result.state, paths["checkpoint"], cfg.equation_kind,
                                   cfg.alpha, cfg.profile.n_multiplier)
        logger.info("results written to %s", outdir)
        return paths
