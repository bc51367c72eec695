"""
Tests for the interpolation-inequality lab.
"""

import math

import numpy as np
import pytest
from scipy.integrate import quad

from oscilloflow.errors import ConfigurationError, DomainError
from oscilloflow.inequalities import (
    RECIPES, InequalityId, ensemble_report, mollifier_checks, pointwise_ratio, trajectory_ratio,
)
from oscilloflow.initial_data import random_band_field
from oscilloflow.spectral import SpectralField, TorusGrid, forward_transform, leray_project

from conftest import field_from

TIGHT_IDS = [i for i in InequalityId if RECIPES[i].tight_constant_one]
POINTWISE_IDS = [i for i in InequalityId if not RECIPES[i].trajectory]


def _grid_for(ident, n3=16, n2=32):
    return TorusGrid(3, n3) if RECIPES[ident].dim == 3 else TorusGrid(2, n2)


def _sample_field(ident, seed=3, kmax=4):
    grid = _grid_for(ident)
    if RECIPES[ident].vector:
        return leray_project(random_band_field(grid, 3, seed, kmax=kmax))
    return random_band_field(grid, 1, seed, kmax=kmax)


def test_degenerate_field_gives_none():
    assert pointwise_ratio(SpectralField.zeros(TorusGrid(2, 16)), "SQG_H1") is None
    assert pointwise_ratio(SpectralField.zeros(TorusGrid(3, 16), 3), "GN_H1_b") is None


def test_single_mode_is_extremal(grid2d):
    theta = field_from(lambda x1, x2: np.cos(x1), grid2d)
    assert pointwise_ratio(theta, "SQG_H1") == pytest.approx(1.0, rel=1e-12)
    assert pointwise_ratio(theta, "SQG_H1alpha") == pytest.approx(1.0, rel=1e-12)
    two = field_from(lambda x1, x2: np.cos(x1) + np.cos(3 * x2), grid2d)
    assert pointwise_ratio(two, "SQG_H1") < 1.0


@pytest.mark.parametrize("ident", ["GN_H1_a", "GN_H1_b", "GN_H2"])
def test_single_mode_vector_field_is_extremal(ident):
    grid = TorusGrid(3, 16)
    u = field_from(lambda x1, x2, x3: np.stack([np.sin(2 * x2), np.zeros_like(x1), np.zeros_like(x1)]), grid)
    assert pointwise_ratio(u, ident) == pytest.approx(1.0, rel=1e-12)


def test_pointwise_ratio_preconditions(grid2d, grid3d):
    theta = field_from(lambda x1, x2: np.cos(x1), grid2d)
    with pytest.raises(ConfigurationError):
        pointwise_ratio(theta, "GN_H1_b")
    with pytest.raises(ConfigurationError):
        pointwise_ratio(theta, "SQG_est1")
    with pytest.raises(ConfigurationError):
        pointwise_ratio(theta, "no_such_id")
    with pytest.raises(DomainError):
        pointwise_ratio(field_from(lambda x1, x2: 1.0 + np.cos(x1), grid2d), "SQG_H1")
    with pytest.raises(DomainError):
        pointwise_ratio(theta, "SQG_H1", alpha=1.5)


@pytest.mark.parametrize("ident", TIGHT_IDS)
def test_sharp_constant_holds_on_ensemble(ident):
    report = ensemble_report(ident, 200, 0, _grid_for(ident))
    assert report.tight_constant_ok is True
    assert report.max_ratio <= 1.0 + 1e-10
    assert report.degenerate_count == 0
    assert len(report.ratios) == 200
    assert len(set(report.seeds)) == 200


def test_untight_ids_report_no_verdict():
    report = ensemble_report("SQG_grad_inf", 20, 1, TorusGrid(2, 32))
    assert report.tight_constant_ok is None
    assert 0.0 < report.mean_ratio <= report.max_ratio
    assert report.to_dict()["inequality"] == "SQG_grad_inf"


def test_ensemble_preconditions():
    with pytest.raises(DomainError):
        ensemble_report("SQG_H1", 0, 0, TorusGrid(2, 16))
    with pytest.raises(DomainError):
        ensemble_report("SQG_H1", 5, 0, TorusGrid(2, 16))
    with pytest.raises(ConfigurationError):
        ensemble_report("SQG_H1", 20, 0, TorusGrid(3, 16))
    with pytest.raises(ConfigurationError):
        ensemble_report("NS_9_4", 20, 0, TorusGrid(3, 16))


@pytest.mark.parametrize("ident", POINTWISE_IDS)
def test_ratios_are_scale_invariant(ident):
    f = _sample_field(ident)
    base = pointwise_ratio(f, ident)
    for lam in (0.1, 10.0):
        assert pointwise_ratio(f * lam, ident) == pytest.approx(base, rel=1e-12)


def test_sup_norm_ratio_converges_with_resolution():
    coarse = pointwise_ratio(random_band_field(TorusGrid(2, 64), 1, 3, kmax=3), "SQG_grad_inf")
    fine = pointwise_ratio(random_band_field(TorusGrid(2, 128), 1, 3, kmax=3), "SQG_grad_inf")
    assert coarse == pytest.approx(fine, rel=2e-2)


@pytest.mark.slow
def test_vector_sup_norm_ratio_converges_with_resolution():
    ratios = [pointwise_ratio(leray_project(random_band_field(TorusGrid(3, n), 3, 5, kmax=3)), "GN_u_inf")
              for n in (32, 64)]
    assert ratios[0] == pytest.approx(ratios[1], rel=2e-2)


@pytest.mark.parametrize("ident", [
    "SQG_grad_inf",
    pytest.param("GN_u_inf", marks=pytest.mark.slow),
    pytest.param("GN_grad_inf", marks=pytest.mark.slow),
])
def test_sup_norm_ensemble_is_stable_across_resolutions(ident):
    coarse = ensemble_report(ident, 10, 4, TorusGrid(RECIPES[InequalityId(ident)].dim, 64))
    fine = ensemble_report(ident, 10, 4, TorusGrid(RECIPES[InequalityId(ident)].dim, 128))
    assert coarse.degenerate_count == fine.degenerate_count == 0
    assert 0.5 <= coarse.max_ratio / fine.max_ratio <= 2.0


def test_threaded_ensemble_matches_serial():
    serial = ensemble_report("GN_H1_b", 30, 7, TorusGrid(3, 16))
    threaded = ensemble_report("GN_H1_b", 30, 7, TorusGrid(3, 16), workers=2)
    assert serial.ratios == threaded.ratios
    assert serial.seeds == threaded.seeds


def test_zero_trajectory_is_degenerate():
    grid = TorusGrid(2, 16)
    snaps = [(0.0, SpectralField.zeros(grid)), (0.5, SpectralField.zeros(grid))]
    assert trajectory_ratio(snaps, "SQG_est1") is None


def test_trajectory_ratio_on_decaying_mode():
    # theta = e^{-t} cos x1 solves the dissipative SQG equation exactly for alpha = 1/2
    grid = TorusGrid(2, 32)
    x1, _ = grid.coordinates()
    times = np.linspace(0.0, 1.0, 201)
    snaps = [(float(t), forward_transform(math.exp(-t) * np.cos(x1), grid)) for t in times]
    a = 0.5
    norm0 = math.pi * math.sqrt(2.0)
    lhs, _ = quad(lambda t: norm0 ** 2 * math.exp(-3.0 * t), 0.0, 1.0)
    l2_in_time = math.sqrt(quad(lambda t: norm0 ** 2 * math.exp(-2.0 * t), 0.0, 1.0)[0])
    rhs = norm0 ** (a / 4) * 2.0 * l2_in_time ** ((12 - a) / 4)
    assert trajectory_ratio(snaps, "SQG_est1", a) == pytest.approx(lhs / rhs, rel=1e-3)
    for ident in ("SQG_est2", "SQG_est3", "SQG_est4"):
        ratio = trajectory_ratio(snaps, ident, a)
        assert ratio is not None and math.isfinite(ratio) and ratio > 0


def test_ns_trajectory_ratios_are_finite():
    grid = TorusGrid(3, 16)
    x1, x2, x3 = grid.coordinates()
    tg = np.stack([np.sin(x1) * np.cos(x2) * np.cos(x3), -np.cos(x1) * np.sin(x2) * np.cos(x3), np.zeros(grid.shape)])
    snaps = [(float(t), forward_transform(math.exp(-3.0 * t) * tg, grid)) for t in np.linspace(0.0, 0.5, 11)]
    for ident in ("NS_11_4", "NS_9_4", "NS_5_2"):
        ratio = trajectory_ratio(snaps, ident)
        assert ratio is not None and math.isfinite(ratio) and ratio > 0


def test_trajectory_preconditions():
    grid = TorusGrid(2, 16)
    theta = field_from(lambda x1, x2: np.cos(x1), grid)
    with pytest.raises(DomainError):
        trajectory_ratio([(0.0, theta)], "SQG_est1")
    with pytest.raises(DomainError):
        trajectory_ratio([(0.5, theta), (0.5, theta)], "SQG_est1")
    with pytest.raises(ConfigurationError):
        trajectory_ratio([(0.0, theta), (1.0, theta)], "SQG_H1")


EPS = (0.5, 0.25, 0.125, 0.0625)


def test_mollifier_leaves_constants_alone():
    grid = TorusGrid(2, 32)
    coeffs = np.zeros((1,) + grid.shape, dtype=complex)
    coeffs[0, 0, 0] = 2.0
    report = mollifier_checks(SpectralField(grid, coeffs), 1.0, 0, 1, EPS)
    assert report.approximation_errors == (0.0,) * len(EPS)
    assert report.fitted_slope is None


def test_mollifier_error_is_second_order_on_smooth_mode():
    grid = TorusGrid(2, 32)
    f = field_from(lambda x1, x2: np.cos(x1), grid)
    report = mollifier_checks(f, 1.0, 0, 1, EPS)
    assert report.fitted_slope == pytest.approx(2.0, abs=0.05)


def test_mollifier_scaling_on_random_field():
    grid = TorusGrid(2, 32)
    f = random_band_field(grid, 1, 2, kmax=4)
    report = mollifier_checks(f, 0.5, 0, 1, EPS)
    assert report.fitted_slope >= 0.4
    tight = mollifier_checks(f, 0.5, 0, 1, (0.15, 0.1, 0.05))
    assert all(r <= 2.0 for r in tight.approximation_ratios)
    # every retained mode has eps |k| < 1, where eps |k| exp(-eps^2 |k|^2 / 2) increases with eps
    assert all(b <= a for a, b in zip(tight.smoothing_ratios, tight.smoothing_ratios[1:]))
    assert tight.max_smoothing_ratio() <= 1.0


def test_mollifier_preconditions():
    grid = TorusGrid(2, 16)
    f = field_from(lambda x1, x2: np.cos(x1), grid)
    with pytest.raises(DomainError):
        mollifier_checks(f, 1.0, 0, 1, (0.1, 0.2, 0.3))
    with pytest.raises(DomainError):
        mollifier_checks(f, 1.0, 0, 1, (1.5, 0.5, 0.25))
    with pytest.raises(DomainError):
        mollifier_checks(f, 1.0, 0, 1, (0.5, 0.25))
    with pytest.raises(DomainError):
        mollifier_checks(f, 1.5, 0, 1, EPS)
    with pytest.raises(DomainError):
        mollifier_checks(f, 1.0, 0, 0, EPS)
    assert mollifier_checks(SpectralField.zeros(grid), 1.0, 0, 1, EPS) is None
