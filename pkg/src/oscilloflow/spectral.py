"""
Spectral core for the periodic box [0, 2*pi)^d.

This module provides the grid, the Fourier representation of real scalar and
vector fields, and every Fourier-multiplier operator the solvers consume:
derivatives, fractional Laplacian, the SQG velocity, Leray projection,
2/3-rule dealiasing and Gaussian mollification.

Convention: f(x) = sum_k f_hat(k) exp(i k.x). Transforms therefore use
``norm="forward"`` (the 1/n^d factor sits on the forward transform) and all
measure factors (2*pi)^d live in the norms.
"""

import logging
import os
from dataclasses import dataclass
from functools import cached_property
from typing import Tuple

import numpy as np
import scipy.fft as sfft

from .errors import ConfigurationError, DomainError

logger = logging.getLogger(__name__)

# Relative tolerance of the divergence-free invariant.
DIVERGENCE_TOL = 1e-12
# Relative size of the k=0 coefficient below which a field counts as mean-zero.
MEAN_TOL = 1e-13


def fft_workers() -> int:
    """Worker count for scipy.fft, capped by OSCILLOFLOW_THREADS (default 1)."""
    raw = os.environ.get("OSCILLOFLOW_THREADS", "").strip()
    if not raw:
        return 1
    try:
        workers = int(raw)
    except ValueError:
        raise ConfigurationError(f"OSCILLOFLOW_THREADS must be an integer, got {raw!r}")
    return max(1, workers)


@dataclass(frozen=True)
class TorusGrid:
    """
    Uniform grid on the torus [0, 2*pi)^dim with ``n`` points per axis.

    Integer wavenumbers run over [-n/2, n/2) per axis. The Nyquist plane
    (axis wavenumber -n/2) is kept at zero by every operation.
    """
    dim: int
    n: int

    def __post_init__(self):
        if self.dim not in (2, 3):
            raise ConfigurationError(f"grid dimension must be 2 or 3, got {self.dim}")
        if self.n < 8 or self.n % 2:
            raise ConfigurationError(f"points per axis must be even and >= 8, got {self.n}")

    @property
    def period(self) -> float:
        return 2.0 * np.pi

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def size(self) -> int:
        return self.n ** self.dim

    @property
    def dx(self) -> float:
        return 2.0 * np.pi / self.n

    @property
    def axes(self) -> Tuple[int, ...]:
        # Spatial axes of a (components, n, ..., n) coefficient array.
        return tuple(range(1, self.dim + 1))

    @property
    def measure(self) -> float:
        """Volume (2*pi)^dim of the torus."""
        return (2.0 * np.pi) ** self.dim

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        return np.rint(sfft.fftfreq(self.n, d=1.0 / self.n)).astype(np.int64)

    @cached_property
    def k_vectors(self) -> Tuple[np.ndarray, ...]:
        k = self.wavenumbers.astype(float)
        return tuple(np.meshgrid(*([k] * self.dim), indexing="ij"))

    @cached_property
    def k_squared(self) -> np.ndarray:
        return sum(kj * kj for kj in self.k_vectors)

    @cached_property
    def k_magnitude(self) -> np.ndarray:
        return np.sqrt(self.k_squared)

    @cached_property
    def k_max_axis(self) -> np.ndarray:
        """max_j |k_j| per mode."""
        return np.max(np.abs(np.stack(self.k_vectors)), axis=0)

    @cached_property
    def nyquist_mask(self) -> np.ndarray:
        k = self.wavenumbers
        ints = np.meshgrid(*([k] * self.dim), indexing="ij")
        return np.any(np.stack(ints) == -(self.n // 2), axis=0)

    @cached_property
    def dealias_mask(self) -> np.ndarray:
        """True on the modes kept by the 2/3 rule (every |k_j| <= n/3)."""
        return 3.0 * self.k_max_axis <= self.n

    def coordinates(self) -> Tuple[np.ndarray, ...]:
        x = np.arange(self.n) * self.dx
        return tuple(np.meshgrid(*([x] * self.dim), indexing="ij"))


@dataclass(frozen=True, eq=False)
class SpectralField:
    """
    Fourier coefficients of a real scalar (1 component) or vector field.

    ``coefficients`` has shape (components, n, ..., n) in FFT index order and
    is read-only. ``divergence_free`` tags fields produced by the Leray
    projection or the SQG velocity.
    """
    grid: TorusGrid
    coefficients: np.ndarray
    divergence_free: bool = False

    def __post_init__(self):
        coeffs = np.array(self.coefficients, dtype=np.complex128)
        if coeffs.ndim == self.grid.dim:
            coeffs = coeffs[np.newaxis]
        if coeffs.ndim != self.grid.dim + 1 or coeffs.shape[1:] != self.grid.shape:
            raise ConfigurationError(
                f"coefficient shape {coeffs.shape} does not match grid {self.grid.shape}"
            )
        coeffs.setflags(write=False)
        object.__setattr__(self, "coefficients", coeffs)

    @classmethod
    def _adopt(cls, grid: TorusGrid, coeffs: np.ndarray, divergence_free: bool = False):
        # Wrap a freshly computed array without the defensive copy.
        obj = cls.__new__(cls)
        coeffs.setflags(write=False)
        object.__setattr__(obj, "grid", grid)
        object.__setattr__(obj, "coefficients", coeffs)
        object.__setattr__(obj, "divergence_free", divergence_free)
        return obj

    @classmethod
    def zeros(cls, grid: TorusGrid, components: int = 1) -> "SpectralField":
        return cls._adopt(grid, np.zeros((components,) + grid.shape, dtype=np.complex128),
                          divergence_free=components == grid.dim)

    @property
    def components(self) -> int:
        return self.coefficients.shape[0]

    @property
    def is_vector(self) -> bool:
        return self.components > 1

    @property
    def mean(self) -> np.ndarray:
        return self.coefficients[(slice(None),) + (0,) * self.grid.dim]

    def is_mean_zero(self) -> bool:
        scale = max(1.0, float(np.max(np.abs(self.coefficients))))
        return bool(np.all(np.abs(self.mean) <= MEAN_TOL * scale))

    def with_coefficients(self, coeffs: np.ndarray, divergence_free: bool = False) -> "SpectralField":
        return SpectralField(self.grid, coeffs, divergence_free)

    def _combine(self, other, op) -> "SpectralField":
        if not isinstance(other, SpectralField):
            return NotImplemented
        if other.grid != self.grid or other.components != self.components:
            raise ConfigurationError("fields live on different grids or have different ranks")
        return SpectralField._adopt(self.grid, op(self.coefficients, other.coefficients),
                                    self.divergence_free and other.divergence_free)

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        return SpectralField._adopt(self.grid, self.coefficients * float(scalar), self.divergence_free)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0


def _reflect(coeffs: np.ndarray, axes: Tuple[int, ...]) -> np.ndarray:
    """Array g with g[k] = coeffs[-k] in FFT index order."""
    return np.roll(np.flip(coeffs, axis=axes), 1, axis=axes)


def symmetrize(f: SpectralField) -> SpectralField:
    """Enforce f_hat(-k) = conj(f_hat(k)) and zero the Nyquist plane."""
    c = f.coefficients
    sym = 0.5 * (c + np.conj(_reflect(c, f.grid.axes)))
    sym[:, f.grid.nyquist_mask] = 0.0
    return SpectralField._adopt(f.grid, sym, f.divergence_free)


def forward_transform(samples: np.ndarray, grid: TorusGrid) -> SpectralField:
    """
    Fourier coefficients of real grid samples.

    ``samples`` has shape grid.shape (scalar) or (components,) + grid.shape.
    The result satisfies the reality invariant exactly and has a zero
    Nyquist plane.
    """
    data = np.asarray(samples, dtype=float)
    if data.shape == grid.shape:
        data = data[np.newaxis]
    if data.ndim != grid.dim + 1 or data.shape[1:] != grid.shape:
        raise ConfigurationError(f"sample shape {np.shape(samples)} does not match grid {grid.shape}")
    coeffs = sfft.fftn(data, axes=grid.axes, norm="forward", workers=fft_workers())
    return symmetrize(SpectralField._adopt(grid, coeffs))


def inverse_transform(f: SpectralField) -> np.ndarray:
    """Real grid samples of shape (components,) + grid.shape."""
    values = sfft.ifftn(f.coefficients, axes=f.grid.axes, norm="forward", workers=fft_workers())
    return np.ascontiguousarray(values.real)


def derivative(f: SpectralField, axis: int) -> SpectralField:
    """Partial derivative along ``axis`` (0-based)."""
    if not 0 <= axis < f.grid.dim:
        raise DomainError(f"axis {axis} out of range for a {f.grid.dim}D grid")
    coeffs = (1j * f.grid.k_vectors[axis]) * f.coefficients
    return SpectralField._adopt(f.grid, coeffs, f.divergence_free)


def _require_mean_zero(f: SpectralField, what: str) -> None:
    if not f.is_mean_zero():
        raise DomainError(f"{what} is undefined on fields with nonzero mean")


def fractional_laplacian(f: SpectralField, beta: float) -> SpectralField:
    """
    (-Delta)^beta, i.e. multiplication by |k|^(2 beta).

    The k=0 mode maps to 0 for beta != 0. Negative beta requires a mean-zero
    field and beta >= -1.
    """
    if beta < -1.0:
        raise DomainError(f"fractional Laplacian order must be >= -1, got {beta}")
    if beta == 0.0:
        return f
    if beta < 0.0:
        _require_mean_zero(f, "the inverse fractional Laplacian")
    k2 = f.grid.k_squared
    positive = k2 > 0
    multiplier = np.where(positive, np.where(positive, k2, 1.0) ** beta, 0.0)
    return SpectralField._adopt(f.grid, multiplier * f.coefficients, f.divergence_free)


def riesz_velocity(theta: SpectralField) -> SpectralField:
    """
    SQG velocity u = grad_perp (-Delta)^(-1/2) theta with grad_perp = (-d_2, d_1).

    Per mode: u_hat = (-i k_2, i k_1) / |k| * theta_hat.
    """
    grid = theta.grid
    if grid.dim != 2 or theta.components != 1:
        raise ConfigurationError("the SQG velocity needs a scalar field on a 2D grid")
    _require_mean_zero(theta, "the SQG velocity")
    kmag = grid.k_magnitude
    inv = np.where(kmag > 0, 1.0 / np.where(kmag > 0, kmag, 1.0), 0.0)
    k1, k2 = grid.k_vectors
    th = theta.coefficients[0]
    coeffs = np.stack([-1j * k2 * inv * th, 1j * k1 * inv * th])
    return SpectralField._adopt(grid, coeffs, divergence_free=True)


def divergence(u: SpectralField) -> SpectralField:
    if u.components != u.grid.dim:
        raise ConfigurationError("divergence needs a vector field with one component per axis")
    div = sum(1j * kj * uj for kj, uj in zip(u.grid.k_vectors, u.coefficients))
    return SpectralField._adopt(u.grid, div[np.newaxis])


def max_divergence(u: SpectralField) -> float:
    """max_k |k.u_hat(k)| / max_k |u_hat(k)|; 0 for the zero field."""
    scale = float(np.max(np.abs(u.coefficients)))
    if scale == 0.0:
        return 0.0
    kdotu = sum(kj * uj for kj, uj in zip(u.grid.k_vectors, u.coefficients))
    return float(np.max(np.abs(kdotu))) / scale


def leray_project(u: SpectralField) -> SpectralField:
    """Per-mode projection I - k k^T / |k|^2 onto divergence-free fields."""
    grid = u.grid
    if u.components != grid.dim:
        raise ConfigurationError("Leray projection needs a vector field with one component per axis")
    k2 = grid.k_squared
    inv_k2 = np.where(k2 > 0, 1.0 / np.where(k2 > 0, k2, 1.0), 0.0)
    kdotu = sum(kj * uj for kj, uj in zip(grid.k_vectors, u.coefficients))
    coeffs = np.stack([uj - kj * kdotu * inv_k2 for kj, uj in zip(grid.k_vectors, u.coefficients)])
    return SpectralField._adopt(grid, coeffs, divergence_free=True)


def dealias(f: SpectralField) -> SpectralField:
    """2/3 rule: zero every mode with some |k_j| > n/3."""
    coeffs = f.coefficients * f.grid.dealias_mask
    return SpectralField._adopt(f.grid, coeffs, f.divergence_free)


@dataclass(frozen=True)
class MollifierKernel:
    """
    Gaussian mollifier rho_eps with symbol rho_hat(eps k) = exp(-eps^2 |k|^2 / 2).

    rho_hat(0) = 1, |rho_hat| <= 1 and rho_hat decays faster than any power.
    """
    epsilon: float

    def __post_init__(self):
        if not self.epsilon > 0.0:
            raise DomainError(f"mollification scale must be positive, got {self.epsilon}")

    @staticmethod
    def symbol(xi):
        xi = np.asarray(xi, dtype=float)
        return np.exp(-0.5 * xi * xi)

    def multiplier(self, grid: TorusGrid) -> np.ndarray:
        return np.exp(-0.5 * self.epsilon ** 2 * grid.k_squared)


def mollify(f: SpectralField, epsilon: float) -> SpectralField:
    kernel = MollifierKernel(epsilon)
    coeffs = kernel.multiplier(f.grid) * f.coefficients
    return SpectralField._adopt(f.grid, coeffs, f.divergence_free)
