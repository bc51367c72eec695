"""
Tests for the torus grid, spectral fields and Fourier-multiplier operators.
"""

import numpy as np
import pytest

from oscilloflow.errors import ConfigurationError, DomainError
from oscilloflow.initial_data import random_band_field
from oscilloflow.spectral import (
    MollifierKernel, SpectralField, TorusGrid, dealias, derivative, fft_workers, forward_transform,
    fractional_laplacian, inverse_transform, leray_project, max_divergence, mollify, riesz_velocity,
    symmetrize,
)

from conftest import field_from


def _close(a, b, tol=1e-12):
    scale = max(1.0, float(np.max(np.abs(b))))
    return float(np.max(np.abs(a - b))) <= tol * scale


def test_grid_validation():
    with pytest.raises(ConfigurationError):
        TorusGrid(4, 16)
    with pytest.raises(ConfigurationError):
        TorusGrid(2, 15)
    with pytest.raises(ConfigurationError):
        TorusGrid(2, 6)


def test_field_shape_mismatch():
    grid = TorusGrid(2, 16)
    with pytest.raises(ConfigurationError):
        SpectralField(grid, np.zeros((1, 8, 8)))


def test_scalar_field_gains_component_axis():
    grid = TorusGrid(2, 16)
    f = SpectralField(grid, np.zeros(grid.shape))
    assert f.coefficients.shape == (1, 16, 16)
    assert not f.coefficients.flags.writeable


@pytest.mark.parametrize("dim,n", [(2, 64), (3, 32)])
def test_derivative_single_mode(dim, n):
    grid = TorusGrid(dim, n)
    k = (3, -2, 1)[:dim]
    f = field_from(lambda *x: np.cos(sum(kj * xj for kj, xj in zip(k, x))), grid)
    for axis in range(dim):
        expected = -k[axis] * np.sin(sum(kj * xj for kj, xj in zip(k, grid.coordinates())))
        assert _close(inverse_transform(derivative(f, axis))[0], expected)


def test_derivative_axis_out_of_range(grid2d):
    f = SpectralField.zeros(grid2d)
    with pytest.raises(DomainError):
        derivative(f, 2)


@pytest.mark.parametrize("dim,n", [(2, 64), (3, 32)])
def test_fractional_laplacian_eigen_action(dim, n):
    grid = TorusGrid(dim, n)
    k = (2, 1, 1)[:dim]
    kmag2 = sum(kj * kj for kj in k)
    phase = lambda *x: sum(kj * xj for kj, xj in zip(k, x))  # noqa: E731
    f = field_from(lambda *x: np.sin(phase(*x)), grid)
    for beta in (0.25, 0.75, 1.0, -0.5):
        out = inverse_transform(fractional_laplacian(f, beta))[0]
        assert _close(out, kmag2 ** beta * np.sin(phase(*grid.coordinates())))


def test_fractional_laplacian_preconditions(grid2d):
    constant = field_from(lambda x1, x2: 1.0 + np.cos(x1), grid2d)
    assert fractional_laplacian(constant, 0.0) is constant
    with pytest.raises(DomainError):
        fractional_laplacian(constant, -0.5)
    with pytest.raises(DomainError):
        fractional_laplacian(field_from(lambda x1, x2: np.cos(x1), grid2d), -1.5)
    # the mean is annihilated for positive orders
    out = fractional_laplacian(constant, 0.5)
    assert abs(out.mean[0]) == 0.0


def test_riesz_velocity_of_single_mode(grid2d):
    theta = field_from(lambda x1, x2: np.cos(x1), grid2d)
    u = inverse_transform(riesz_velocity(theta))
    x1, _ = grid2d.coordinates()
    assert _close(u[0], np.zeros(grid2d.shape))
    assert _close(u[1], -np.sin(x1))


def test_riesz_velocity_requires_mean_zero(grid2d):
    theta = field_from(lambda x1, x2: 2.0 + np.cos(x2), grid2d)
    with pytest.raises(DomainError):
        riesz_velocity(theta)


def test_riesz_velocity_is_divergence_free(grid2d):
    theta = random_band_field(grid2d, 1, seed=3)
    assert max_divergence(riesz_velocity(theta)) <= 1e-12


@pytest.mark.parametrize("dim,n", [(2, 64), (3, 32)])
def test_leray_projection(dim, n):
    grid = TorusGrid(dim, n)
    # gradient fields are removed
    phi = field_from(lambda *x: np.sin(x[0] + 2 * x[1]), grid)
    grad = SpectralField(grid, np.concatenate([derivative(phi, j).coefficients for j in range(dim)]))
    assert np.max(np.abs(leray_project(grad).coefficients)) <= 1e-12
    # projection is idempotent and divergence-free
    u = random_band_field(grid, dim, seed=7)
    pu = leray_project(u)
    assert max_divergence(pu) <= 1e-12
    assert _close(leray_project(pu).coefficients, pu.coefficients)


def test_dealias_keeps_two_thirds():
    grid = TorusGrid(2, 16)
    x1, x2 = grid.coordinates()
    f = forward_transform(np.cos(5 * x1) + np.cos(6 * x2), grid)
    out = inverse_transform(dealias(f))[0]
    assert _close(out, np.cos(5 * x1))


def test_mollifier_kernel():
    with pytest.raises(DomainError):
        MollifierKernel(0.0)
    assert MollifierKernel.symbol(0.0) == 1.0
    grid = TorusGrid(2, 32)
    x1, _ = grid.coordinates()
    f = forward_transform(3.0 + np.cos(x1), grid)
    eps = 0.3
    out = inverse_transform(mollify(f, eps))[0]
    assert _close(out, 3.0 + np.exp(-0.5 * eps ** 2) * np.cos(x1))


def test_fractional_laplacian_composes(grid2d):
    f = random_band_field(grid2d, 1, seed=4)
    for b1, b2 in ((0.3, 0.45), (-0.5, 1.0), (0.25, -0.75)):
        composed = fractional_laplacian(fractional_laplacian(f, b1), b2)
        assert _close(composed.coefficients, fractional_laplacian(f, b1 + b2).coefficients)


def test_leray_projection_of_shear_pair(grid3d):
    u = field_from(lambda x1, x2, x3: np.stack([np.cos(x1), np.cos(x1), np.zeros_like(x1)]), grid3d)
    expected = field_from(lambda x1, x2, x3: np.stack([np.zeros_like(x1), np.cos(x1), np.zeros_like(x1)]), grid3d)
    assert _close(leray_project(u).coefficients, expected.coefficients)


def test_dealias_does_not_add_energy():
    grid = TorusGrid(2, 16)
    f = random_band_field(grid, 1, seed=9, kmax=7, slope=0.0)
    power = np.sum(np.abs(f.coefficients) ** 2)
    kept = np.sum(np.abs(dealias(f).coefficients) ** 2)
    assert 0.0 < kept < power
    assert _close(dealias(dealias(f)).coefficients, dealias(f).coefficients, tol=0.0)


def test_mollify_is_linear_and_commutes_with_derivative(grid2d):
    f = random_band_field(grid2d, 1, seed=5)
    g = random_band_field(grid2d, 1, seed=6)
    eps = 0.2
    lhs = mollify(2.5 * f + g, eps).coefficients
    rhs = 2.5 * mollify(f, eps).coefficients + mollify(g, eps).coefficients
    assert _close(lhs, rhs)
    for axis in (0, 1):
        assert _close(mollify(derivative(f, axis), eps).coefficients,
                      derivative(mollify(f, eps), axis).coefficients)


def test_transform_round_trip(grid3d):
    u = random_band_field(grid3d, 3, seed=11)
    back = forward_transform(inverse_transform(u), grid3d)
    assert _close(back.coefficients, u.coefficients, tol=1e-14)


def test_symmetrize_enforces_reality(grid2d):
    rng = np.random.default_rng(0)
    raw = rng.standard_normal((1,) + grid2d.shape) + 1j * rng.standard_normal((1,) + grid2d.shape)
    f = symmetrize(SpectralField(grid2d, raw))
    values = np.fft.ifftn(f.coefficients[0], norm="forward")
    assert np.max(np.abs(values.imag)) <= 1e-12
    assert np.all(f.coefficients[:, grid2d.nyquist_mask] == 0)
    assert _close(symmetrize(f).coefficients, f.coefficients, tol=1e-15)


def test_field_arithmetic(grid2d):
    f = random_band_field(grid2d, 1, seed=1)
    g = random_band_field(grid2d, 1, seed=2)
    assert _close((f + g - g).coefficients, f.coefficients)
    assert _close((2.0 * f).coefficients, 2.0 * f.coefficients)
    assert _close((-f).coefficients, -f.coefficients)
    with pytest.raises(ConfigurationError):
        f + random_band_field(TorusGrid(2, 32), 1, seed=1)


def test_fft_workers_env(monkeypatch):
    monkeypatch.delenv("OSCILLOFLOW_THREADS", raising=False)
    assert fft_workers() == 1
    monkeypatch.setenv("OSCILLOFLOW_THREADS", "3")
    assert fft_workers() == 3
    monkeypatch.setenv("OSCILLOFLOW_THREADS", "many")
    with pytest.raises(ConfigurationError):
        fft_workers()
