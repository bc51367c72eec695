"""
Tests for Sobolev norms, sup-norms and the trace functionals.
"""

import math

import numpy as np
import pytest

from oscilloflow.dynamics import run_simulation
from oscilloflow.errors import DomainError
from oscilloflow.initial_data import random_band_field
from oscilloflow.norms import (
    NormSample, NormTrace, bootstrap_monitor, energy_balance_report, grad_sup_norm, h2_full_norm,
    norm_sample, sobolev_norm, sup_derivative_norm, sup_norm, xt_functional,
)
from oscilloflow.spectral import TorusGrid, fractional_laplacian, inverse_transform, mollify

from conftest import field_from, make_sqg_config

ROOT2PI = math.pi * math.sqrt(2.0)


def test_single_mode_norms(grid2d):
    f = field_from(lambda x1, x2: np.cos(x1), grid2d)
    for s in (0.0, 0.25, 1.0, 2.0, 3.0):
        assert sobolev_norm(f, s) == pytest.approx(ROOT2PI, rel=1e-13)
    g = field_from(lambda x1, x2: np.cos(2 * x2), grid2d)
    assert sobolev_norm(g, 1.0) == pytest.approx(2 * ROOT2PI, rel=1e-13)
    assert h2_full_norm(g) == pytest.approx(ROOT2PI * math.sqrt(17.0), rel=1e-13)


def test_norm_of_vector_field_sums_components(grid3d):
    u = field_from(lambda x1, x2, x3: np.stack([np.sin(x2), np.zeros_like(x1), np.cos(x1)]), grid3d)
    # each component has L2 norm^2 = (2 pi)^3 / 2
    assert sobolev_norm(u, 0.0) == pytest.approx(math.sqrt((2 * math.pi) ** 3), rel=1e-13)


def test_negative_index_rejected(grid2d):
    f = field_from(lambda x1, x2: np.cos(x1), grid2d)
    with pytest.raises(DomainError):
        sobolev_norm(f, -0.5)
    with pytest.raises(DomainError):
        sup_derivative_norm(f, -1)


def test_sup_norms(grid2d):
    f = field_from(lambda x1, x2: np.sin(x1) + 0.5 * np.cos(2 * x2), grid2d)
    assert sup_norm(f) == pytest.approx(1.5, rel=1e-12)
    g = field_from(lambda x1, x2: np.sin(x1), grid2d)
    assert grad_sup_norm(g) == pytest.approx(1.0, rel=1e-12)
    # second derivatives of sin(x1): only d11 = -sin(x1)
    assert sup_derivative_norm(g, 2) == pytest.approx(1.0, rel=1e-12)
    assert sup_derivative_norm(g, 0) == pytest.approx(1.0, rel=1e-12)


def test_norm_sample_orders(grid2d):
    f = field_from(lambda x1, x2: np.cos(2 * x1), grid2d)
    s = norm_sample(f, "SQG", 0.5)
    assert s.h_top == pytest.approx(ROOT2PI * 2 ** 2.25, rel=1e-12)
    assert s.h_alpha2 == pytest.approx(ROOT2PI * 2 ** 0.25, rel=1e-12)
    u = field_from(lambda *x: np.stack([np.sin(x[1]), np.zeros_like(x[0]), np.zeros_like(x[0])]), TorusGrid(3, 16))
    ns = norm_sample(u, "NS")
    assert ns.h_alpha2 is None
    assert ns.h_top == pytest.approx(ns.l2, rel=1e-12)


def _sample(value, h2=1.0, h_top=1.0):
    return NormSample(l2=value, h1=value, h2=h2, h_top=h_top, grad_linf=0.0)


def test_trace_rejects_bad_samples():
    trace = NormTrace("NS")
    trace.append(0.0, _sample(1.0))
    with pytest.raises(DomainError):
        trace.append(0.0, _sample(1.0))
    with pytest.raises(DomainError):
        trace.append(1.0, _sample(-1.0))
    with pytest.raises(DomainError):
        trace.append(1.0, _sample(float("nan")))
    with pytest.raises(DomainError):
        NormTrace("SQG")


def test_xt_functional():
    trace = NormTrace.from_columns("NS", [0.0, 1.0, 2.0], h2=[1.0, 2.0, 1.0], h_top=[1.0, 1.0, 1.0])
    assert xt_functional(trace) == pytest.approx(6.0)
    assert list(trace.xt_running()) == pytest.approx([1.0, 5.0, 6.0])
    with pytest.raises(DomainError):
        xt_functional(NormTrace("NS"))


def test_energy_balance_on_exact_decay():
    # E = e^{-2t}, D = ||u||_H1^2 = e^{-2t}: E(T) - E(0) + 2 int D = 0
    t = np.linspace(0.0, 1.0, 2001)
    decay = np.exp(-t)
    trace = NormTrace.from_columns("NS", t, l2=decay, h1=decay)
    assert energy_balance_report(trace) <= 1e-6
    assert trace.energy_residual_running()[-1] == pytest.approx(energy_balance_report(trace))


def test_energy_balance_preconditions():
    one = NormTrace.from_columns("NS", [0.0], l2=[1.0])
    with pytest.raises(DomainError):
        energy_balance_report(one)
    zero = NormTrace.from_columns("NS", [0.0, 1.0], l2=[0.0, 0.0])
    with pytest.raises(DomainError):
        energy_balance_report(zero)


def test_stored_dissipation_integral_is_used():
    trace = NormTrace("NS")
    trace.append(0.0, _sample(1.0), 0.0)
    trace.append(1.0, _sample(0.5), 0.375)
    assert trace.running_dissipation_integral == 0.375
    assert energy_balance_report(trace) == pytest.approx(abs(0.25 - 1.0 + 0.75))


def test_bootstrap_monitor():
    trace = NormTrace.from_columns("NS", [0.0, 1.0, 2.0], h2=[1.0, 1.0, 3.0], h_top=[0.0, 0.0, 0.0])
    verdict = bootstrap_monitor(trace, 1.0, h2_initial=1.5)
    assert verdict.bound == pytest.approx(4.5)
    assert not verdict.holds
    assert verdict.first_violation == 2.0
    assert bootstrap_monitor(trace, 10.0, h2_initial=1.5).holds
    with pytest.raises(DomainError):
        bootstrap_monitor(trace, 1.0, h2_initial=0.0)


@pytest.mark.parametrize("dim,n", [(2, 64), (3, 32)])
def test_parseval(dim, n):
    grid = TorusGrid(dim, n)
    f = random_band_field(grid, dim, seed=2)
    values = inverse_transform(f)
    physical = grid.measure * float(np.mean(np.sum(values * values, axis=0)))
    assert sobolev_norm(f, 0.0) ** 2 == pytest.approx(physical, rel=1e-12)


def test_sobolev_norm_matches_fractional_laplacian_route(grid2d):
    f = random_band_field(grid2d, 1, seed=8)
    for s in (0.5, 1.0, 2.5, 3.0):
        assert sobolev_norm(f, s) == pytest.approx(sobolev_norm(fractional_laplacian(f, s / 2), 0.0), rel=1e-12)


def test_mollification_error_shrinks_with_scale(grid2d):
    f = random_band_field(grid2d, 1, seed=10)
    errors = [sobolev_norm(f - mollify(f, eps), 0.0) for eps in (0.1, 0.05, 0.025)]
    assert errors[0] > errors[1] > errors[2] > 0.0


def test_xt_functional_single_sample_and_extension():
    assert xt_functional(NormTrace.from_columns("NS", [0.0], h2=[3.0])) == pytest.approx(9.0)
    rng = np.random.default_rng(1)
    trace = NormTrace("SQG", 0.5)
    previous = 0.0
    for i in range(20):
        h2, h_top = rng.uniform(0.0, 2.0, size=2)
        trace.append(0.1 * i, NormSample(l2=1.0, h1=1.0, h2=h2, h_top=h_top, grad_linf=0.0, h_alpha2=1.0))
        current = xt_functional(trace)
        assert current >= previous - 1e-12
        previous = current


def _decay_trace(samples):
    # E = e^{-2t} with D = e^{-2t}: the continuum residual is exactly 0
    t = np.linspace(0.0, 1.0, samples)
    decay = np.exp(-t)
    return NormTrace.from_columns("NS", t, l2=decay, h1=decay)


def test_energy_residual_is_second_order_in_sample_spacing():
    residuals = [energy_balance_report(_decay_trace(m)) for m in (11, 21, 41)]
    for coarse, dense in zip(residuals, residuals[1:]):
        assert coarse > dense
        assert math.log2(coarse / dense) >= 1.8
    assert energy_balance_report(_decay_trace(2)) > residuals[-1]


def test_bootstrap_monitor_on_zero_and_heat_trajectories():
    zero = NormTrace.from_columns("NS", [0.0, 0.5, 1.0])
    verdict = bootstrap_monitor(zero, 1.0, h2_initial=1.0)
    assert verdict.holds
    assert verdict.first_violation is None

    cfg = make_sqg_config(n=16, kind="zero", t_end=1.0, dt_max=0.01, interval=0.1,
                          generator="cosine", target_h2=None, params={"wavevector": [1, 0]})
    result = run_simulation(cfg)
    verdict = bootstrap_monitor(result.trace, 1.0, h2_initial=h2_full_norm(result.initial_field))
    assert verdict.holds
    assert verdict.first_violation is None
