"""
Sobolev norms, sup-norms and trajectory functionals.

Norms carry the torus measure explicitly:
    ||f||_{H^s-dot} = ((2 pi)^d sum_k |k|^(2s) |f_hat(k)|^2)^(1/2),
summed over components for vector fields. A NormTrace is the time series a
run emits; X_T, the energy audit and the bootstrap monitor are computed from
it.
"""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import List, NamedTuple, Optional, Sequence

import numpy as np
import scipy.fft as sfft
from scipy.integrate import cumulative_trapezoid, trapezoid

from .errors import DomainError
from .spectral import SpectralField, fft_workers, inverse_transform

logger = logging.getLogger(__name__)

EQUATION_KINDS = ("NS", "SQG")


def sobolev_norm(f: SpectralField, s: float) -> float:
    """Homogeneous H^s norm; the k=0 mode only contributes when s = 0."""
    if s < 0:
        raise DomainError(f"Sobolev index must be >= 0, got {s}")
    c = f.coefficients
    power = np.sum(c.real ** 2 + c.imag ** 2, axis=0)
    if s == 0:
        total = np.sum(power)
    else:
        total = np.sum(f.grid.k_squared ** s * power)
    return math.sqrt(f.grid.measure * float(total))


def h2_full_norm(f: SpectralField) -> float:
    """(||f||_{L^2}^2 + ||f||_{H^2-dot}^2)^(1/2)."""
    return math.hypot(sobolev_norm(f, 0.0), sobolev_norm(f, 2.0))


def _pointwise_sup(coeffs: np.ndarray, f: SpectralField) -> float:
    # coeffs: (m, n, ..., n); max over the grid of the Euclidean norm across m.
    values = sfft.ifftn(coeffs, axes=f.grid.axes, norm="forward", workers=fft_workers()).real
    return float(np.sqrt(np.max(np.sum(values * values, axis=0))))


def sup_norm(f: SpectralField) -> float:
    values = inverse_transform(f)
    return float(np.sqrt(np.max(np.sum(values * values, axis=0))))


def grad_sup_norm(f: SpectralField) -> float:
    """Grid maximum of |grad f| (Frobenius norm of the Jacobian for vectors)."""
    return sup_derivative_norm(f, 1)


def sup_derivative_norm(f: SpectralField, order: int) -> float:
    """Grid maximum of the Euclidean norm of the full derivative tensor of given order."""
    if order < 0:
        raise DomainError(f"derivative order must be >= 0, got {order}")
    if order == 0:
        return sup_norm(f)
    kv = f.grid.k_vectors
    blocks = []
    for index in itertools.product(range(f.grid.dim), repeat=order):
        multiplier = np.ones(f.grid.shape, dtype=np.complex128)
        for axis in index:
            multiplier = multiplier * (1j * kv[axis])
        blocks.append(multiplier * f.coefficients)
    return _pointwise_sup(np.concatenate(blocks, axis=0), f)


@dataclass(frozen=True)
class NormSample:
    """Norms of one field at one diagnostic time."""
    l2: float
    h1: float
    h2: float
    h_top: float
    grad_linf: float
    h_alpha2: Optional[float] = None

    def values(self) -> List[float]:
        vals = [self.l2, self.h1, self.h2, self.h_top, self.grad_linf]
        if self.h_alpha2 is not None:
            vals.append(self.h_alpha2)
        return vals


def top_order(equation_kind: str, alpha: Optional[float]) -> float:
    """Sobolev index of the L^2_T part of X_T: 3 for NS, 2 + alpha/2 for SQG."""
    return 3.0 if equation_kind == "NS" else 2.0 + 0.5 * alpha


def dissipation_order(equation_kind: str, alpha: Optional[float]) -> float:
    return 1.0 if equation_kind == "NS" else 0.5 * alpha


def norm_sample(f: SpectralField, equation_kind: str, alpha: Optional[float] = None) -> NormSample:
    if equation_kind not in EQUATION_KINDS:
        raise DomainError(f"unknown equation kind {equation_kind!r}")
    return NormSample(
        l2=sobolev_norm(f, 0.0),
        h1=sobolev_norm(f, 1.0),
        h2=sobolev_norm(f, 2.0),
        h_top=sobolev_norm(f, top_order(equation_kind, alpha)),
        grad_linf=grad_sup_norm(f),
        h_alpha2=sobolev_norm(f, 0.5 * alpha) if equation_kind == "SQG" else None,
    )


class NormTrace:
    """
    Time series of norms emitted by a run.

    Each sample also stores the running dissipation integral
    int_0^t D dt with D = ||.||^2 in H^1 (NS) or H^(alpha/2) (SQG). The
    integrator supplies it at step resolution; otherwise it is the trapezoid
    over sample times.
    """

    def __init__(self, equation_kind: str, alpha: Optional[float] = None):
        if equation_kind not in EQUATION_KINDS:
            raise DomainError(f"unknown equation kind {equation_kind!r}")
        if equation_kind == "SQG" and alpha is None:
            raise DomainError("SQG traces need alpha")
        self.equation_kind = equation_kind
        self.alpha = alpha
        self.times: List[float] = []
        self.samples: List[NormSample] = []
        self.dissipation_integrals: List[float] = []
        self.running_sup_H2_sq = 0.0

    def __len__(self) -> int:
        return len(self.times)

    @property
    def running_dissipation_integral(self) -> float:
        return self.dissipation_integrals[-1] if self.dissipation_integrals else 0.0

    def dissipation_of(self, sample: NormSample) -> float:
        return sample.h1 if self.equation_kind == "NS" else sample.h_alpha2

    def append(self, time: float, sample: NormSample, dissipation_integral: Optional[float] = None) -> None:
        if self.times and not time > self.times[-1]:
            raise DomainError(f"trace times must increase strictly: {time} after {self.times[-1]}")
        if self.equation_kind == "SQG" and sample.h_alpha2 is None:
            raise DomainError("SQG samples need the H^(alpha/2) norm")
        for value in sample.values():
            if not (math.isfinite(value) and value >= 0.0):
                raise DomainError(f"norm samples must be finite and >= 0, got {value}")
        if dissipation_integral is None:
            if self.times:
                d_prev = self.dissipation_of(self.samples[-1])
                d_now = self.dissipation_of(sample)
                dissipation_integral = self.dissipation_integrals[-1] + \
                    0.5 * (time - self.times[-1]) * (d_prev ** 2 + d_now ** 2)
            else:
                dissipation_integral = 0.0
        self.times.append(float(time))
        self.samples.append(sample)
        self.dissipation_integrals.append(float(dissipation_integral))
        self.running_sup_H2_sq = max(self.running_sup_H2_sq, sample.h2 ** 2)

    @classmethod
    def from_columns(cls, equation_kind: str, times: Sequence[float], alpha: Optional[float] = None,
                     **columns: Sequence[float]) -> "NormTrace":
        """Build a trace from per-column sequences; missing columns are zero."""
        trace = cls(equation_kind, alpha)
        names = ("l2", "h1", "h2", "h_top", "grad_linf")
        zeros = [0.0] * len(times)
        for i, t in enumerate(times):
            kwargs = {name: float(columns.get(name, zeros)[i]) for name in names}
            if equation_kind == "SQG":
                kwargs["h_alpha2"] = float(columns.get("h_alpha2", zeros)[i])
            trace.append(t, NormSample(**kwargs))
        return trace

    def column(self, name: str) -> np.ndarray:
        if name == "dissipation":
            return np.array([self.dissipation_of(s) for s in self.samples], dtype=float)
        return np.array([getattr(s, name) for s in self.samples], dtype=float)

    def time_array(self) -> np.ndarray:
        return np.asarray(self.times, dtype=float)

    def xt_running(self) -> np.ndarray:
        """X_t evaluated at every sample time."""
        if not self.times:
            return np.zeros(0)
        sup_sq = np.maximum.accumulate(self.column("h2") ** 2)
        top_sq = self.column("h_top") ** 2
        return sup_sq + cumulative_trapezoid(top_sq, self.time_array(), initial=0.0)

    def energy_residual_running(self) -> np.ndarray:
        l2_sq = self.column("l2") ** 2
        if not len(l2_sq) or l2_sq[0] == 0.0:
            return np.zeros(len(l2_sq))
        integrals = np.asarray(self.dissipation_integrals) - self.dissipation_integrals[0]
        return np.abs(l2_sq - l2_sq[0] + 2.0 * integrals) / l2_sq[0]


def xt_functional(trace: NormTrace) -> float:
    """
    X_T = (sup_t ||.||_{H^2-dot})^2 + int_0^T ||.||_{top}^2 dt.

    The sup runs over sample times only, so this is a lower bound of the
    continuum value.
    """
    if not len(trace):
        raise DomainError("X_T of an empty trace is undefined")
    h2 = trace.column("h2")
    top_sq = trace.column("h_top") ** 2
    return float(np.max(h2) ** 2 + trapezoid(top_sq, trace.time_array()))


def energy_balance_report(trace: NormTrace) -> float:
    """
    Relative residual |E(T) - E(0) + 2 int D dt| / E(0) with E = ||.||_{L^2}^2.

    The oscillating advection is energy-neutral, so in the continuum this is 0.
    """
    if len(trace) < 2:
        raise DomainError("the energy audit needs at least two samples")
    e0 = trace.samples[0].l2 ** 2
    if e0 == 0.0:
        raise DomainError("the energy audit is undefined for zero initial energy")
    e_end = trace.samples[-1].l2 ** 2
    integral = trace.dissipation_integrals[-1] - trace.dissipation_integrals[0]
    return abs(e_end - e0 + 2.0 * integral) / e0


class BootstrapVerdict(NamedTuple):
    holds: bool
    first_violation: Optional[float]
    bound: float


def bootstrap_monitor(trace: NormTrace, c_bootstrap: float = 1.0,
                      h2_initial: Optional[float] = None) -> BootstrapVerdict:
    """
    Check X_t <= 2 C ||u_0||_{H^2}^2 at every sample time.

    ``h2_initial`` is the full H^2 norm of the initial data; C is the
    unspecified constant of the a priori estimate (user supplied, default 1).
    """
    if c_bootstrap <= 0:
        raise DomainError(f"bootstrap constant must be positive, got {c_bootstrap}")
    if h2_initial is None or h2_initial <= 0:
        raise DomainError(f"initial H^2 norm must be positive, got {h2_initial}")
    bound = 2.0 * c_bootstrap * h2_initial ** 2
    for t, x in zip(trace.times, trace.xt_running()):
        if x > bound:
            logger.info("bootstrap bound %.6g exceeded at t=%.6g (X_t=%.6g)", bound, t, x)
            return BootstrapVerdict(False, t, bound)
    return BootstrapVerdict(True, None, bound)
