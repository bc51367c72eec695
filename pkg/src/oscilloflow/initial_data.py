"""
Initial-data generators.

Every generator registers under the ``initial_data`` kind and returns an
unscaled field; ``make_initial_data`` then projects (NS) and rescales it to
the requested full H^2 norm.
"""

import logging
from typing import Any, Mapping, Optional

import numpy as np

from .errors import ConfigurationError, DomainError
from .norms import h2_full_norm
from .registry import get_component, list_components, register
from .spectral import SpectralField, TorusGrid, forward_transform, leray_project, symmetrize

logger = logging.getLogger(__name__)

KIND = "initial_data"


def _require(condition: bool, generator: str, needs: str) -> None:
    if not condition:
        raise ConfigurationError(f"initial_data.generator: {generator!r} needs {needs}")


def random_band_field(grid: TorusGrid, components: int, seed: int,
                      kmax: int = 8, slope: float = 2.0) -> SpectralField:
    """
    Seeded mean-zero random field supported on 0 < |k| <= kmax.

    Coefficients are drawn on the lattice box |k_j| <= kmax, independently of
    grid.n, so one seed names one continuous field on every grid.
    """
    if kmax < 1:
        raise ConfigurationError(f"initial_data.params.kmax: must be >= 1, got {kmax}")
    rng = np.random.default_rng(seed)
    box = np.arange(-kmax, kmax + 1)
    shape = (components,) + (box.size,) * grid.dim
    draws = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    kk = np.meshgrid(*([box] * grid.dim), indexing="ij")
    k2 = sum(k * k for k in kk).astype(float)
    weight = (1.0 + k2) ** (-0.5 * slope) * ((k2 > 0) & (k2 <= kmax * kmax))
    draws = draws * weight

    keep = np.nonzero(np.abs(box) < grid.n // 2)[0]
    target = np.mod(box[keep], grid.n)
    comps = np.arange(components)
    coeffs = np.zeros((components,) + grid.shape, dtype=np.complex128)
    coeffs[np.ix_(comps, *([target] * grid.dim))] = draws[np.ix_(comps, *([keep] * grid.dim))]
    return symmetrize(SpectralField(grid, coeffs))


@register(KIND, "cmt")
def cmt(grid: TorusGrid, equation_kind: str, params: Mapping[str, Any], seed: int) -> SpectralField:
    """theta_0 = sin x1 sin x2 + cos x2."""
    _require(equation_kind == "SQG" and grid.dim == 2, "cmt", "a 2D SQG run")
    x1, x2 = grid.coordinates()
    return forward_transform(np.sin(x1) * np.sin(x2) + np.cos(x2), grid)


@register(KIND, "random_band")
def random_band(grid: TorusGrid, equation_kind: str, params: Mapping[str, Any], seed: int) -> SpectralField:
    components = 1 if equation_kind == "SQG" else grid.dim
    return random_band_field(grid, components, seed,
                             kmax=int(params.get("kmax", 8)), slope=float(params.get("slope", 2.0)))


@register(KIND, "taylor_green_3d")
def taylor_green_3d(grid: TorusGrid, equation_kind: str, params: Mapping[str, Any], seed: int) -> SpectralField:
    _require(equation_kind == "NS" and grid.dim == 3, "taylor_green_3d", "a 3D NS run")
    x1, x2, x3 = grid.coordinates()
    u = np.stack([np.sin(x1) * np.cos(x2) * np.cos(x3),
                  -np.cos(x1) * np.sin(x2) * np.cos(x3),
                  np.zeros(grid.shape)])
    return forward_transform(u, grid)


@register(KIND, "taylor_green_2d")
def taylor_green_2d(grid: TorusGrid, equation_kind: str, params: Mapping[str, Any], seed: int) -> SpectralField:
    _require(equation_kind == "NS" and grid.dim == 2, "taylor_green_2d", "a 2D NS run")
    x1, x2 = grid.coordinates()
    return forward_transform(np.stack([np.cos(x1) * np.sin(x2), -np.sin(x1) * np.cos(x2)]), grid)


@register(KIND, "oscillatory_3d")
def oscillatory_3d(grid: TorusGrid, equation_kind: str, params: Mapping[str, Any], seed: int) -> SpectralField:
    """
    Strongly oscillating divergence-free data

        (N_d u_h(x_h) cos(N_d x3), -div_h u_h(x_h) sin(N_d x3)),
        u_h = (sin x1 cos x2, cos x1 sin x2).
    """
    _require(equation_kind == "NS" and grid.dim == 3, "oscillatory_3d", "a 3D NS run")
    freq = int(params.get("frequency", 4))
    if not 1 <= freq < grid.n // 2:
        raise ConfigurationError(f"initial_data.params.frequency: must lie in [1, {grid.n // 2}), got {freq}")
    x1, x2, x3 = grid.coordinates()
    uh1 = np.sin(x1) * np.cos(x2)
    uh2 = np.cos(x1) * np.sin(x2)
    div_h = 2.0 * np.cos(x1) * np.cos(x2)
    u = np.stack([freq * uh1 * np.cos(freq * x3),
                  freq * uh2 * np.cos(freq * x3),
                  -div_h * np.sin(freq * x3)])
    return forward_transform(u, grid)


@register(KIND, "cosine")
def cosine(grid: TorusGrid, equation_kind: str, params: Mapping[str, Any], seed: int) -> SpectralField:
    """amplitude * cos(k.x) for a single integer wavevector (SQG only)."""
    _require(equation_kind == "SQG", "cosine", "a scalar (SQG) run")
    wavevector = [int(v) for v in params.get("wavevector", [1] + [0] * (grid.dim - 1))]
    if len(wavevector) != grid.dim or not any(wavevector):
        raise ConfigurationError(f"initial_data.params.wavevector: need {grid.dim} integers, not all zero")
    phase = sum(k * x for k, x in zip(wavevector, grid.coordinates()))
    return forward_transform(float(params.get("amplitude", 1.0)) * np.cos(phase), grid)


@register(KIND, "zero")
def zero(grid: TorusGrid, equation_kind: str, params: Mapping[str, Any], seed: int) -> SpectralField:
    return SpectralField.zeros(grid, 1 if equation_kind == "SQG" else grid.dim)


def make_initial_data(generator: str, params: Optional[Mapping[str, Any]], grid: TorusGrid,
                      target_h2: Optional[float], seed: int, equation_kind: str) -> SpectralField:
    """
    Build, project and rescale initial data.

    NS data is Leray-projected; the result is rescaled so its full H^2 norm
    equals ``target_h2`` (skipped when target_h2 is None or for ``zero``).
    """
    try:
        build = get_component(KIND, generator)
    except KeyError:
        raise ConfigurationError(
            f"initial_data.generator: unknown generator {generator!r}; known: {list_components(KIND)}"
        )
    if target_h2 is not None and not target_h2 > 0:
        raise DomainError(f"target H^2 norm must be positive, got {target_h2}")
    field = build(grid, equation_kind, dict(params or {}), seed)
    if equation_kind == "NS":
        field = leray_project(field)
    if generator == "zero" or target_h2 is None:
        return field
    norm = h2_full_norm(field)
    if norm == 0.0:
        raise DomainError(f"generator {generator!r} produced the zero field; cannot rescale")
    logger.debug("rescaling %s data from H^2 norm %.6g to %.6g", generator, norm, target_h2)
    return field * (target_h2 / norm)
