"""
Numerical checks of the interpolation and trajectory inequalities.

Pointwise ids compare one field against a Gagliardo-Nirenberg or Hoelder
bound; trajectory ids compare a time integral along stored snapshots against
the sup/L^2-in-time functional that controls it. The implicit constants are
never specified, so the lab reports estimated constants (LHS/RHS ratios) and
asserts constant-1 sharpness only where Fourier Hoelder makes it exact.

Stable ids:

    NS_11_4, NS_9_4, NS_5_2      trajectory bounds for 3D velocity fields
    GN_u_inf, GN_grad_inf        L^inf interpolation, 3D
    GN_H1_a, GN_H1_b, GN_H2      Hoelder interpolation, 3D (tight)
    SQG_est1 .. SQG_est4         trajectory bounds for 2D temperatures
    SQG_grad_inf                 L^inf interpolation, 2D
    SQG_H1, SQG_H1alpha          Hoelder interpolation, 2D (tight)

All L^inf checks assume mean-zero fields; on the torus the mean breaks the
homogeneous form.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import trapezoid
from scipy.stats import linregress

from .dynamics import convective_term
from .errors import ConfigurationError, DomainError
from .norms import grad_sup_norm, sobolev_norm, sup_derivative_norm, sup_norm
from .spectral import SpectralField, TorusGrid, leray_project, mollify
from .initial_data import random_band_field

logger = logging.getLogger(__name__)

TIGHT_TOL = 1e-10
MIN_ENSEMBLE = 10


class InequalityId(str, Enum):
    NS_11_4 = "NS_11_4"
    NS_9_4 = "NS_9_4"
    NS_5_2 = "NS_5_2"
    GN_u_inf = "GN_u_inf"
    GN_grad_inf = "GN_grad_inf"
    GN_H1_a = "GN_H1_a"
    GN_H1_b = "GN_H1_b"
    GN_H2 = "GN_H2"
    SQG_est1 = "SQG_est1"
    SQG_est2 = "SQG_est2"
    SQG_est3 = "SQG_est3"
    SQG_est4 = "SQG_est4"
    SQG_grad_inf = "SQG_grad_inf"
    SQG_H1 = "SQG_H1"
    SQG_H1alpha = "SQG_H1alpha"


@dataclass(frozen=True)
class InequalityRecipe:
    dim: int
    trajectory: bool
    tight_constant_one: bool
    statement: str

    @property
    def vector(self) -> bool:
        return self.dim == 3


RECIPES: Dict[InequalityId, InequalityRecipe] = {
    InequalityId.NS_11_4: InequalityRecipe(
        3, True, False, "int |grad u|_inf |u|_H2 |u|_H3 <= sup|u|^(1/4) (sup|u|_H2^(11/4) + |u|_{L2 H3}^(11/4))"),
    InequalityId.NS_9_4: InequalityRecipe(
        3, True, False, "int |grad u|_inf |u|_H1 |u|_H3 <= sup|u|^(3/4) (sup|u|_H2^(9/4) + |u|_{L2 H3}^(9/4))"),
    InequalityId.NS_5_2: InequalityRecipe(
        3, True, False, "int |grad u|_inf |u|_H1 |u.grad u|_H1 <= sup|u|^(3/2) (sup|u|_H2^(5/2) + |u|_{L2 H3}^(5/2))"),
    InequalityId.GN_u_inf: InequalityRecipe(3, False, False, "|u|_inf <= |u|^(1/2) |u|_H3^(1/2)"),
    InequalityId.GN_grad_inf: InequalityRecipe(3, False, False, "|grad u|_inf <= |u|^(1/6) |u|_H3^(5/6)"),
    InequalityId.GN_H1_a: InequalityRecipe(3, False, True, "|u|_H1 <= |u|^(2/3) |u|_H3^(1/3)"),
    InequalityId.GN_H1_b: InequalityRecipe(3, False, True, "|u|_H1 <= |u|^(1/2) |u|_H2^(1/2)"),
    InequalityId.GN_H2: InequalityRecipe(3, False, True, "|u|_H2 <= |u|^(1/3) |u|_H3^(2/3)"),
    InequalityId.SQG_est1: InequalityRecipe(
        2, True, False, "int |th|_H(2+a/2) |grad th|_inf |th|_H2 <= sup|th|_H(a/2)^(a/4) (L2H(2+a/2)^q + L2H2^q), q=(12-a)/4"),
    InequalityId.SQG_est2: InequalityRecipe(
        2, True, False, "int |th|_H(1+a) |grad th|_inf |th|_H1 <= sup|th|_H(a/2)^(1/2) sup|th|^(1/2) (L2H(2+a/2)^2 + L2H2^2)"),
    InequalityId.SQG_est3: InequalityRecipe(
        2, True, False, "int |grad th|_inf^2 |th|_H1^2 <= sup|th| sup|th|_H(a/2)^(a/2) (L2H(2+a/2)^q + L2H2^q), q=(6-a)/2"),
    InequalityId.SQG_est4: InequalityRecipe(
        2, True, False, "int |grad th|_inf^2 |th| |th|_H2 <= sup|th| sup|th|_H(a/2)^(a/2) (L2H(2+a/2)^q + L2H2^q), q=(6-a)/2"),
    InequalityId.SQG_grad_inf: InequalityRecipe(
        2, False, False, "|grad th|_inf <= |th|_H(2+a/2)^(1-a/4) |th|_H(a/2)^(a/4)"),
    InequalityId.SQG_H1: InequalityRecipe(2, False, True, "|th|_H1 <= |th|_H2^(1/2) |th|^(1/2)"),
    InequalityId.SQG_H1alpha: InequalityRecipe(
        2, False, True, "|th|_H(1+a) <= |th|_H(2+a/2)^(1/2+a/4) |th|_H(a/2)^(1/2-a/4)"),
}


@dataclass(frozen=True)
class RatioReport:
    """
    Ensemble statistics of LHS/RHS for one inequality.

    ``ratios`` excludes degenerate members (RHS = 0); ``tight_constant_ok``
    is None for ids without a sharp constant.
    """
    inequality: InequalityId
    ensemble_size: int
    ratios: Tuple[float, ...]
    seeds: Tuple[int, ...]
    degenerate_count: int
    max_ratio: Optional[float]
    mean_ratio: Optional[float]
    tight_constant_ok: Optional[bool]

    def to_dict(self) -> dict:
        return {
            "inequality": self.inequality.value,
            "ensemble_size": self.ensemble_size,
            "degenerate_count": self.degenerate_count,
            "max_ratio": self.max_ratio,
            "mean_ratio": self.mean_ratio,
            "tight_constant_ok": self.tight_constant_ok,
            "seeds": list(self.seeds),
            "ratios": list(self.ratios),
        }


def as_id(ident) -> InequalityId:
    try:
        return InequalityId(ident)
    except ValueError:
        raise ConfigurationError(f"unknown inequality id {ident!r}; known: {[i.value for i in InequalityId]}")


def _check_field(f: SpectralField, recipe: InequalityRecipe, ident: InequalityId) -> None:
    if f.grid.dim != recipe.dim:
        raise ConfigurationError(f"{ident.value} needs a {recipe.dim}D field, got {f.grid.dim}D")
    if recipe.dim == 2 and f.components != 1:
        raise ConfigurationError(f"{ident.value} needs a scalar field")
    if not f.is_mean_zero():
        raise DomainError(f"{ident.value} is checked on mean-zero fields only")


def _sides(f: SpectralField, ident: InequalityId, alpha: float) -> Tuple[float, float]:
    h = lambda s: sobolev_norm(f, s)  # noqa: E731
    a = alpha
    if ident is InequalityId.GN_u_inf:
        return sup_norm(f), h(0) ** 0.5 * h(3) ** 0.5
    if ident is InequalityId.GN_grad_inf:
        return grad_sup_norm(f), h(0) ** (1 / 6) * h(3) ** (5 / 6)
    if ident is InequalityId.GN_H1_a:
        return h(1), h(0) ** (2 / 3) * h(3) ** (1 / 3)
    if ident is InequalityId.GN_H1_b:
        return h(1), h(0) ** 0.5 * h(2) ** 0.5
    if ident is InequalityId.GN_H2:
        return h(2), h(0) ** (1 / 3) * h(3) ** (2 / 3)
    if ident is InequalityId.SQG_grad_inf:
        return grad_sup_norm(f), h(2 + a / 2) ** (1 - a / 4) * h(a / 2) ** (a / 4)
    if ident is InequalityId.SQG_H1:
        return h(1), h(2) ** 0.5 * h(0) ** 0.5
    if ident is InequalityId.SQG_H1alpha:
        return h(1 + a), h(2 + a / 2) ** (0.5 + a / 4) * h(a / 2) ** (0.5 - a / 4)
    raise ConfigurationError(f"{ident.value} is a trajectory inequality")


def pointwise_ratio(f: SpectralField, ident, alpha: float = 0.5) -> Optional[float]:
    """LHS/RHS of a pointwise inequality; None signals a degenerate sample (RHS = 0)."""
    ident = as_id(ident)
    recipe = RECIPES[ident]
    if recipe.trajectory:
        raise ConfigurationError(f"{ident.value} is a trajectory inequality; use trajectory_ratio")
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    _check_field(f, recipe, ident)
    lhs, rhs = _sides(f, ident, alpha)
    if rhs == 0.0:
        return None
    return lhs / rhs


def _ensemble_member(ident: InequalityId, grid: TorusGrid, seed: int, alpha: float) -> Optional[float]:
    # kmax in [2, 8] varies the spectral width across members.
    kmax = min(2 + seed % 7, grid.n // 2 - 1)
    if RECIPES[ident].vector:
        f = leray_project(random_band_field(grid, grid.dim, seed, kmax=kmax))
    else:
        f = random_band_field(grid, 1, seed, kmax=kmax)
    return pointwise_ratio(f, ident, alpha)


def ensemble_report(ident, count: int, seed: int, grid: TorusGrid, alpha: float = 0.5,
                    workers: int = 1) -> RatioReport:
    """
    Evaluate a pointwise inequality on ``count`` seeded mean-zero random fields.

    Member seeds come from ``SeedSequence(seed)``; results are ordered by
    member index whatever the evaluation order.
    """
    ident = as_id(ident)
    recipe = RECIPES[ident]
    if recipe.trajectory:
        raise ConfigurationError(f"{ident.value} is a trajectory inequality")
    if grid.dim != recipe.dim:
        raise ConfigurationError(f"{ident.value} needs a {recipe.dim}D grid, got {grid.dim}D")
    if count < MIN_ENSEMBLE:
        raise DomainError(f"ensemble needs at least {MIN_ENSEMBLE} members, got {count}")
    seeds = [int(s) for s in np.random.SeedSequence(seed).generate_state(count)]

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda s: _ensemble_member(ident, grid, s, alpha), seeds))
    else:
        results = [_ensemble_member(ident, grid, s, alpha) for s in seeds]

    ratios = tuple(r for r in results if r is not None)
    degenerate = len(results) - len(ratios)
    max_ratio = max(ratios) if ratios else None
    mean_ratio = float(np.mean(ratios)) if ratios else None
    tight_ok = None
    if recipe.tight_constant_one:
        tight_ok = max_ratio is None or max_ratio <= 1.0 + TIGHT_TOL
        if not tight_ok:
            logger.warning("%s: ensemble max ratio %.12g exceeds the sharp constant 1", ident.value, max_ratio)
    logger.info("%s on n=%d: %d members, max ratio %s, %d degenerate",
                ident.value, grid.n, count, max_ratio, degenerate)
    return RatioReport(ident, count, ratios, tuple(seeds), degenerate, max_ratio, mean_ratio, tight_ok)


def _l2_in_time(values: np.ndarray, times: np.ndarray) -> float:
    return float(np.sqrt(trapezoid(values ** 2, times)))


def trajectory_ratio(snapshots: Sequence[Tuple[float, SpectralField]], ident, alpha: float = 0.5) -> Optional[float]:
    """
    LHS/RHS of a trajectory inequality along stored (time, field) snapshots.

    Time integrals use the trapezoid rule over the snapshot times and the
    sups run over snapshots. None signals a degenerate trajectory.
    """
    ident = as_id(ident)
    recipe = RECIPES[ident]
    if not recipe.trajectory:
        raise ConfigurationError(f"{ident.value} is a pointwise inequality; use pointwise_ratio")
    if len(snapshots) < 2:
        raise DomainError("trajectory checks need at least two snapshots")
    times = np.array([t for t, _ in snapshots], dtype=float)
    if np.any(np.diff(times) <= 0):
        raise DomainError("snapshot times must increase strictly")
    fields = [f for _, f in snapshots]
    for f in fields:
        _check_field(f, recipe, ident)

    def col(s):
        return np.array([sobolev_norm(f, s) for f in fields])

    grad_inf = np.array([grad_sup_norm(f) for f in fields])
    l2, h1, h2 = col(0), col(1), col(2)
    a = alpha

    if ident in (InequalityId.NS_11_4, InequalityId.NS_9_4, InequalityId.NS_5_2):
        h3 = col(3)
        sup_h2, l2t_h3 = float(np.max(h2)), _l2_in_time(h3, times)
        if ident is InequalityId.NS_11_4:
            integrand, prefactor, q = grad_inf * h2 * h3, np.max(l2) ** 0.25, 11 / 4
        elif ident is InequalityId.NS_9_4:
            integrand, prefactor, q = grad_inf * h1 * h3, np.max(l2) ** 0.75, 9 / 4
        else:
            conv_h1 = np.array([sobolev_norm(convective_term(f), 1) for f in fields])
            integrand, prefactor, q = grad_inf * h1 * conv_h1, np.max(l2) ** 1.5, 5 / 2
        lhs = trapezoid(integrand, times)
        rhs = prefactor * (sup_h2 ** q + l2t_h3 ** q)
    else:
        h_top, h_half = col(2 + a / 2), col(a / 2)
        l2t_top, l2t_h2 = _l2_in_time(h_top, times), _l2_in_time(h2, times)
        sup_half, sup_l2 = float(np.max(h_half)), float(np.max(l2))
        if ident is InequalityId.SQG_est1:
            q = (12 - a) / 4
            lhs = trapezoid(h_top * grad_inf * h2, times)
            rhs = sup_half ** (a / 4) * (l2t_top ** q + l2t_h2 ** q)
        elif ident is InequalityId.SQG_est2:
            lhs = trapezoid(col(1 + a) * grad_inf * h1, times)
            rhs = sup_half ** 0.5 * sup_l2 ** 0.5 * (l2t_top ** 2 + l2t_h2 ** 2)
        else:
            q = (6 - a) / 2
            if ident is InequalityId.SQG_est3:
                lhs = trapezoid(grad_inf ** 2 * h1 ** 2, times)
            else:
                lhs = trapezoid(grad_inf ** 2 * l2 * h2, times)
            rhs = sup_l2 * sup_half ** (a / 2) * (l2t_top ** q + l2t_h2 ** q)

    if rhs == 0.0:
        return None
    ratio = float(lhs / rhs)
    logger.debug("%s over %d snapshots: lhs %.6g, rhs %.6g", ident.value, len(fields), lhs, rhs)
    return ratio


@dataclass(frozen=True)
class MollifierReport:
    """
    Scaling of Gaussian mollification over a decreasing list of scales.

    approximation_ratios: |f - f_eps|_L2 / (eps^s |f|_Hs)
    smoothing_ratios:     eps^m2 |f_eps|_H(m1+m2) / |f|_Hm1
    linf_smoothing_ratios: eps^m2 |grad^(m1+m2) f_eps|_inf / |grad^m1 f|_inf
    fitted_slope is the least-squares slope of log|f - f_eps| against
    log eps; None when some approximation error vanishes.
    """
    epsilons: Tuple[float, ...]
    s: float
    m1: int
    m2: int
    approximation_errors: Tuple[float, ...]
    approximation_ratios: Tuple[Optional[float], ...]
    fitted_slope: Optional[float]
    smoothing_ratios: Tuple[Optional[float], ...]
    linf_smoothing_ratios: Tuple[Optional[float], ...]

    def max_smoothing_ratio(self) -> float:
        return max(r for r in self.smoothing_ratios if r is not None)

    def to_dict(self) -> dict:
        return {k: (list(v) if isinstance(v, tuple) else v) for k, v in self.__dict__.items()}


def _ratio(num: float, den: float) -> Optional[float]:
    if num == 0.0:
        return 0.0
    return None if den == 0.0 else num / den


def mollifier_checks(f: SpectralField, s: float, m1: int, m2: int,
                     eps_list: Sequence[float]) -> Optional[MollifierReport]:
    """
    Approximation and smoothing behaviour of the Gaussian mollifier on f.

    Returns None for the zero field.
    """
    eps = [float(e) for e in eps_list]
    if len(eps) < 3:
        raise DomainError("mollifier checks need at least three scales")
    if any(not 0.0 < e < 1.0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
        raise DomainError(f"scales must decrease strictly inside (0, 1), got {eps}")
    if not 0.0 < s <= 1.0:
        raise DomainError(f"s must lie in (0, 1], got {s}")
    if m1 < 0 or m2 < 1:
        raise DomainError(f"need m1 >= 0 and m2 >= 1, got m1={m1}, m2={m2}")
    if not np.any(f.coefficients):
        return None

    f_hs = sobolev_norm(f, s)
    f_m1 = sobolev_norm(f, m1)
    f_m1_inf = sup_derivative_norm(f, m1)
    errors: List[float] = []
    approx, smooth, smooth_inf = [], [], []
    for e in eps:
        fe = mollify(f, e)
        err = sobolev_norm(f - fe, 0.0)
        errors.append(err)
        approx.append(_ratio(err, e ** s * f_hs))
        smooth.append(_ratio(e ** m2 * sobolev_norm(fe, m1 + m2), f_m1))
        smooth_inf.append(_ratio(e ** m2 * sup_derivative_norm(fe, m1 + m2), f_m1_inf))

    slope = None
    if all(err > 0.0 for err in errors):
        slope = float(linregress(np.log(eps), np.log(errors)).slope)
    return MollifierReport(tuple(eps), s, m1, m2, tuple(errors), tuple(approx), slope,
                           tuple(smooth), tuple(smooth_inf))
