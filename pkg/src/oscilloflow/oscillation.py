"""
The oscillating coefficient b(N t) multiplying the nonlinear term.

Profiles are evaluated at N t. The admissibility condition

    ||b||_{L^inf} + |int_{t1}^{t2} b| <= M  for all t2 > t1 > 0

is estimated on the base function b, and the explicit frequency threshold
of the Navier-Stokes result is exposed together with the a priori bounds it
closes.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.signal import square

from .errors import ConfigurationError, DomainError

logger = logging.getLogger(__name__)

PROFILE_KINDS = ("sine", "square_wave", "constant_one", "zero", "tabulated")


@dataclass(frozen=True)
class OscillationProfile:
    """
    b and its frequency multiplier N.

    ``constant_one`` is the classical equation; it violates the admissibility
    condition on unbounded horizons. ``tabulated`` interpolates
    ``table = (times, values)`` linearly and is undefined outside its range.
    """
    kind: str = "sine"
    n_multiplier: float = 1.0
    table: Optional[Tuple[Tuple[float, ...], Tuple[float, ...]]] = None

    def __post_init__(self):
        if self.kind not in PROFILE_KINDS:
            raise ConfigurationError(f"unknown oscillation kind {self.kind!r}; expected one of {PROFILE_KINDS}")
        if not (math.isfinite(self.n_multiplier) and self.n_multiplier >= 0):
            raise ConfigurationError(f"oscillation N must be finite and >= 0, got {self.n_multiplier}")
        if self.kind == "tabulated":
            if self.table is None:
                raise ConfigurationError("tabulated profile needs a table")
            times, values = (tuple(float(v) for v in col) for col in self.table)
            if len(times) < 2 or len(times) != len(values):
                raise ConfigurationError("table needs >= 2 (time, value) pairs of equal length")
            if any(b <= a for a, b in zip(times, times[1:])):
                raise ConfigurationError("table times must increase strictly")
            if not all(math.isfinite(v) for v in values):
                raise ConfigurationError("table values must be finite")
            object.__setattr__(self, "table", (times, values))

    def base(self, s):
        """b(s) for scalar or array s >= 0."""
        s = np.asarray(s, dtype=float)
        if self.kind == "sine":
            out = np.sin(s)
        elif self.kind == "square_wave":
            out = square(s)
        elif self.kind == "constant_one":
            out = np.ones_like(s)
        elif self.kind == "zero":
            out = np.zeros_like(s)
        else:
            times, values = self.table
            if np.any(s < times[0]) or np.any(s > times[-1]):
                raise DomainError(f"tabulated profile is defined on [{times[0]}, {times[-1]}] only")
            out = np.interp(s, times, values)
        return float(out) if out.ndim == 0 else out

    def is_identically_zero(self) -> bool:
        return self.kind == "zero" or self.n_multiplier == 0 and float(self.base(0.0)) == 0.0


def evaluate(p: OscillationProfile, t: float) -> float:
    """b(N t)."""
    if t < 0:
        raise DomainError(f"time must be >= 0, got {t}")
    return float(p.base(p.n_multiplier * t))


def _sample_base(p: OscillationProfile, s: np.ndarray) -> np.ndarray:
    # past the end of a table the last value is held; only the tail segment reads it
    if p.kind == "tabulated":
        s = np.minimum(s, p.table[0][-1])
    return np.asarray(p.base(s), dtype=float)


def oscillation_bound_estimate(p: OscillationProfile, horizon: float, samples: int) -> float:
    """
    Estimate M = sup|b| + sup_{t1<t2} |int_{t1}^{t2} b| on [0, horizon].

    b is replaced by its piecewise-linear interpolant on the fixed grid of
    spacing 2 pi / samples, and both suprema are taken exactly for that
    interpolant over [0, horizon]. The grid does not depend on the horizon,
    so a longer horizon only extends the interval and the estimate never
    decreases. The pairwise sup equals max - min of the primitive, which is
    piecewise quadratic with extrema at grid points, at sign changes of the
    interpolant and at the horizon.
    """
    if not horizon > 0:
        raise DomainError(f"horizon must be positive, got {horizon}")
    if samples < 100:
        raise DomainError(f"need at least 100 samples, got {samples}")
    if p.kind == "tabulated" and horizon > p.table[0][-1]:
        raise DomainError(f"tabulated profile is defined on [{p.table[0][0]}, {p.table[0][-1]}] only")
    h = 2.0 * math.pi / samples
    m = int(math.floor(horizon / h))
    while m > 0 and h * m > horizon:
        m -= 1
    t = h * np.arange(m + 2)
    b = _sample_base(p, t)
    primitive = cumulative_trapezoid(b, t, initial=0.0)

    tail = horizon - t[m]
    b_end = b[m] + (b[m + 1] - b[m]) * tail / h
    q_end = primitive[m] + 0.5 * (b[m] + b_end) * tail

    left, right = b[:-1], b[1:]
    crossing = left * right < 0
    frac = left[crossing] / (left[crossing] - right[crossing])
    t_cross = t[:-1][crossing] + frac * h
    q_cross = primitive[:-1][crossing] + 0.5 * left[crossing] * frac * h
    q_cross = q_cross[t_cross <= horizon]

    values = np.concatenate([primitive[: m + 1], [q_end], q_cross])
    sup_b = max(float(np.max(np.abs(b[: m + 1]))), abs(b_end))
    estimate = sup_b + float(np.max(values) - np.min(values))
    logger.debug("M estimate for %s over [0, %g] with %d samples per 2pi: %.6g",
                 p.kind, horizon, samples, estimate)
    return estimate


def n_zero_ns(h2_norm: float, m_bound: float, c_const: float) -> float:
    """N_0 = 500 M^3 C^8 (||u_0||_{H^2} + 1)^4."""
    for name, value in (("h2_norm", h2_norm), ("m_bound", m_bound), ("c_const", c_const)):
        if not math.isfinite(value):
            raise DomainError(f"{name} must be finite, got {value}")
    return 500.0 * m_bound ** 3 * c_const ** 8 * (h2_norm + 1.0) ** 4


def ns_bootstrap_rhs(x_t: float, n: float, m_bound: float, c_const: float,
                     l2_0: float, h2dot_0: float, h2_0: float) -> float:
    """
    Right-hand side of the Navier-Stokes a priori estimate for X_T:

        C (|u0|_{H2dot}^2 + M N^{-1/3} (|u0|^{3/4} X^{9/8} + |u0|^{3/2} X^{5/4}
           + |u0|_{H2}^3)^{1/3} |u0|^{1/6} X^{11/12}),   |u0| = L^2 norm.
    """
    if n <= 0:
        raise DomainError(f"N must be positive, got {n}")
    inner = l2_0 ** 0.75 * x_t ** 1.125 + l2_0 ** 1.5 * x_t ** 1.25 + h2_0 ** 3
    coupling = m_bound * n ** (-1.0 / 3.0) * inner ** (1.0 / 3.0) * l2_0 ** (1.0 / 6.0) * x_t ** (11.0 / 12.0)
    return c_const * (h2dot_0 ** 2 + coupling)


def sqg_bootstrap_rhs(x_t: float, n: float, alpha: float, m_bound: float, c_const: float,
                      l2_0: float, h2dot_0: float, h2_0: float) -> float:
    """
    Right-hand side of the SQG a priori estimate for X~_T, with a = alpha/(4+alpha):

        C (|th0|_{H2dot}^2 + M N^{-a} (|th0| X + |th0|^{1+alpha/2} X^{(6-alpha)/4}
           + |th0|^{1+alpha/4} X^{(8-alpha)/8} + |th0|_{H2})^a |th0|^a X^{(12-alpha)/(8+2 alpha)}).
    """
    if n <= 0:
        raise DomainError(f"N must be positive, got {n}")
    if not 0 < alpha < 1:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    a = alpha / (4.0 + alpha)
    inner = (l2_0 * x_t
             + l2_0 ** (1 + alpha / 2) * x_t ** ((6 - alpha) / 4)
             + l2_0 ** (1 + alpha / 4) * x_t ** ((8 - alpha) / 8)
             + h2_0)
    coupling = m_bound * n ** (-a) * inner ** a * l2_0 ** a * x_t ** ((12 - alpha) / (8 + 2 * alpha))
    return c_const * (h2dot_0 ** 2 + coupling)
