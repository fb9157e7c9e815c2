"""Bump mollifiers, grid convolution and the Hoelder bound chain.

The mollifier of radius ``1/n`` in dimension ``d`` is

    rho_n(x) = n^d exp(-1 / (1 - |n x|^2)) / Z_d     for |x| < 1/n,   0 otherwise,

with ``Z_d`` the integral of ``exp(-1/(1-|y|^2))`` over the unit ball.

Grid convolutions sample ``rho_n`` at the integer offsets of the function's
grid, so discrete Hoelder estimates hold exactly on the grid and the
continuous ones hold up to O(spacing).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, signal

from .errors import InvalidExponentError, ResolutionError
from .spaces import GridFunction, grid_lp_norm, holder_conjugate

__all__ = [
    "Mollifier",
    "mollifier_eval",
    "mollifier_gradient",
    "mollifier_second_derivative",
    "mollifier_mass",
    "KernelGrid",
    "kernel_grid",
    "convolve_zero_extended",
    "HolderBounds",
    "holder_bounds",
    "difference_bounds",
    "discretization_slack",
    "frechet_constants",
    "translation_integral",
    "SmoothingEstimate",
    "smoothing_estimate",
]


def _bump(s):
    """exp(-1/(1-s)) for s < 1, zero otherwise (s = |y|^2)."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = s < 1
    out[inside] = np.exp(-1.0 / (1.0 - s[inside]))
    return out


@lru_cache(maxsize=None)
def _unit_mass(dim):
    if dim == 1:
        val, _ = integrate.quad(lambda y: math.exp(-1.0 / (1.0 - y * y)), -1, 1,
                                epsabs=1e-14, epsrel=1e-12, limit=200)
        return val
    if dim == 2:
        val, _ = integrate.quad(lambda r: r * math.exp(-1.0 / (1.0 - r * r)), 0, 1,
                                epsabs=1e-14, epsrel=1e-12, limit=200)
        return 2 * math.pi * val
    raise ValueError("mollifiers are provided for d in {1, 2}")


@dataclass(frozen=True)
class Mollifier:
    """Smooth bump supported in the closed ball of radius ``1/n``."""

    n: int
    dim: int = 1

    def __post_init__(self):
        if int(self.n) < 1:
            raise ValueError("mollifier index n must be a positive integer")
        if self.dim not in (1, 2):
            raise ValueError("mollifiers are provided for d in {1, 2}")
        object.__setattr__(self, "n", int(self.n))

    @property
    def radius(self):
        return 1.0 / self.n

    @property
    def normalization(self):
        return _unit_mass(self.dim)

    def __call__(self, x):
        return mollifier_eval(self, x)


def _as_points(m, x):
    x = np.asarray(x, dtype=float)
    if m.dim == 1 and (x.ndim == 0 or x.shape[-1] != 1):
        x = x[..., None]
    if x.shape[-1] != m.dim:
        raise ValueError(f"points must have trailing dimension {m.dim}")
    return x


def mollifier_eval(m: Mollifier, x):
    """``rho_n(x)``; ``x`` is a scalar/array (d=1) or an array with trailing axis d."""
    pts = _as_points(m, x)
    s = np.sum((m.n * pts) ** 2, axis=-1)
    val = m.n**m.dim * _bump(s) / m.normalization
    return float(val) if val.ndim == 0 else val


def mollifier_gradient(m: Mollifier, x):
    """Gradient of ``rho_n``, trailing axis of length d."""
    pts = _as_points(m, x)
    s = np.sum((m.n * pts) ** 2, axis=-1)
    rho = m.n**m.dim * _bump(s) / m.normalization
    inside = s < 1
    factor = np.zeros_like(s)
    factor[inside] = -2.0 * m.n**2 / (1.0 - s[inside]) ** 2
    return (rho * factor)[..., None] * pts


def mollifier_second_derivative(m: Mollifier, x):
    """Pure second derivatives ``d^2 rho / dx_j^2``, trailing axis of length d."""
    pts = _as_points(m, x)
    s = np.sum((m.n * pts) ** 2, axis=-1)
    c = m.n**m.dim / m.normalization
    g = _bump(s)
    inside = s < 1
    g1 = np.zeros_like(s)
    g2 = np.zeros_like(s)
    q = 1.0 - s[inside]
    g1[inside] = -g[inside] / q**2
    g2[inside] = g[inside] * (1.0 / q**4 - 2.0 / q**3)
    a = 2.0 * m.n**2
    return c * (g2[..., None] * (a * pts) ** 2 + g1[..., None] * a)


def mollifier_mass(m: Mollifier) -> float:
    """Integral of ``rho_n`` by adaptive quadrature over the square containing its support."""
    r = m.radius
    if m.dim == 1:
        val, _ = integrate.quad(lambda t: mollifier_eval(m, t), -r, r,
                                epsabs=1e-13, epsrel=1e-12, limit=200)
        return val
    val, _ = integrate.dblquad(
        lambda y, x: mollifier_eval(m, np.array([x, y])),
        -r, r, lambda x: -math.sqrt(max(r * r - x * x, 0.0)),
        lambda x: math.sqrt(max(r * r - x * x, 0.0)),
        epsabs=1e-12, epsrel=1e-11,
    )
    return val


# ---------------------------------------------------------------------------
# sampled kernels and convolution
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KernelGrid:
    """``rho_n`` sampled at offsets ``k * spacing``, ``|k_j| <= radius_cells[j]``."""

    mollifier: Mollifier
    spacing: tuple
    radius_cells: tuple
    offsets: np.ndarray  # shape kernel_shape + (d,)
    values: np.ndarray

    @property
    def cell_volume(self):
        return math.prod(self.spacing)

    @property
    def mass(self):
        """Discrete mass ``sum rho(k h) h^d``."""
        return float(np.sum(self.values)) * self.cell_volume

    @property
    def support_count(self):
        return int(np.count_nonzero(self.values))

    def lp_norm(self, q, values=None):
        v = np.abs(self.values if values is None else values)
        if math.isinf(q):
            return float(v.max())
        return (float(np.sum(v**q)) * self.cell_volume) ** (1.0 / q)


def kernel_grid(m: Mollifier, spacing) -> KernelGrid:
    spacing = tuple(float(h) for h in np.broadcast_to(np.atleast_1d(spacing), (m.dim,)))
    if any(h > m.radius for h in spacing):
        raise ResolutionError(
            f"spacing {spacing} exceeds the support radius 1/{m.n}; kernel unresolved"
        )
    radius = tuple(int(math.floor(m.radius / h)) for h in spacing)
    axes = [np.arange(-r, r + 1) * h for r, h in zip(radius, spacing)]
    offsets = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1)
    values = mollifier_eval(m, offsets)
    values = np.asarray(values).reshape(offsets.shape[:-1])
    return KernelGrid(m, spacing, radius, offsets, values)


def convolve_zero_extended(f: GridFunction, m: Mollifier) -> GridFunction:
    """Grid convolution ``f * rho_n`` with ``f`` extended by zero.

    The result lives on ``f``'s box enlarged by ``radius_cells`` nodes on
    every side, which covers the support of the true convolution.
    """
    if f.dim != m.dim:
        raise ValueError("mollifier and grid dimensions differ")
    k = kernel_grid(m, f.spacing)
    vals = signal.convolve(f.values, k.values, mode="full", method="direct") * f.cell_volume
    origin = tuple(o - r * h for o, r, h in zip(f.origin, k.radius_cells, f.spacing))
    extent = tuple(e + 2 * r for e, r in zip(f.extent, k.radius_cells))
    return GridFunction(origin, f.spacing, extent, vals)


# ---------------------------------------------------------------------------
# Hoelder bounds
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HolderBounds:
    sup_bound: float
    grad_bound: tuple


def _check_finite_p(p):
    p = float(p)
    if not 1 <= p < math.inf:
        raise InvalidExponentError("this estimate needs 1 <= p < inf")
    return p


def holder_bounds(f: GridFunction, m: Mollifier, p) -> HolderBounds:
    """``||f||_p ||rho_m||_{p'}`` and ``||f||_p ||d_j rho_m||_{p'}`` by grid quadrature."""
    p = _check_finite_p(p)
    q = holder_conjugate(p)
    k = kernel_grid(m, f.spacing)
    fp = grid_lp_norm(f, p)
    grads = mollifier_gradient(m, k.offsets)
    return HolderBounds(
        sup_bound=fp * k.lp_norm(q),
        grad_bound=tuple(fp * k.lp_norm(q, grads[..., j]) for j in range(m.dim)),
    )


def _forward_difference(values, axis, h):
    padded = np.pad(values, [(1, 1)] * values.ndim)
    return (np.roll(padded, -1, axis=axis) - padded) / h


def difference_bounds(f: GridFunction, m: Mollifier, p) -> tuple:
    """Exact grid Lipschitz constants of ``f * rho_m`` per axis.

    ``|h(x + e_j h_j) - h(x)| / h_j <= ||f||_p ||D_j^+ rho_m||_{p'}`` holds
    node by node by the discrete Hoelder inequality, with ``D_j^+`` the
    forward difference of the sampled kernel.
    """
    p = _check_finite_p(p)
    q = holder_conjugate(p)
    k = kernel_grid(m, f.spacing)
    fp = grid_lp_norm(f, p)
    return tuple(
        fp * k.lp_norm(q, _forward_difference(k.values, j, f.spacing[j])) for j in range(m.dim)
    )


def discretization_slack(f: GridFunction, m: Mollifier, p, factor=5.0):
    """Allowances ``factor * h * ||f||_p * (kernel variation)`` for the value and slope bounds.

    Kernel variation is ``sum_j ||d_j rho||_{p'}`` for values and
    ``max_j ||d_j^2 rho||_{p'}`` for slopes.
    """
    p = _check_finite_p(p)
    q = holder_conjugate(p)
    k = kernel_grid(m, f.spacing)
    fp = grid_lp_norm(f, p)
    h = max(f.spacing)
    grads = mollifier_gradient(m, k.offsets)
    second = mollifier_second_derivative(m, k.offsets)
    value_var = sum(k.lp_norm(q, grads[..., j]) for j in range(m.dim))
    slope_var = max(k.lp_norm(q, second[..., j]) for j in range(m.dim))
    return factor * h * fp * value_var, factor * h * fp * slope_var


# ---------------------------------------------------------------------------
# smoothing estimate
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def frechet_constants(p, dim=1):
    """``C1 = ||rho_1||_{p'}^p`` (integral over the unit ball) and ``C2 = vol(B_1)``."""
    p = _check_finite_p(p)
    q = holder_conjugate(p)
    m = Mollifier(1, dim)
    if math.isinf(q):
        c1 = mollifier_eval(m, np.zeros(dim)) ** p
    elif dim == 1:
        val, _ = integrate.quad(lambda t: mollifier_eval(m, t) ** q, -1, 1, epsrel=1e-12)
        c1 = val ** (p / q)
    else:
        val, _ = integrate.quad(lambda r: 2 * math.pi * r * mollifier_eval(m, np.array([r, 0.0])) ** q,
                                0, 1, epsrel=1e-12)
        c1 = val ** (p / q)
    c2 = 2.0 if dim == 1 else math.pi
    return c1, c2


def translation_integral(values, shift_cells, p, cell_volume, restrict=False) -> float:
    """Grid value of ``integral |f(x + k h) - f(x)|^p dx`` with zero extension.

    With ``restrict=True`` the outer integral runs only over the function's
    own box instead of all of R^d.
    """
    values = np.asarray(values, dtype=float)
    k = tuple(int(c) for c in np.broadcast_to(np.atleast_1d(shift_cells), (values.ndim,)))
    pads = [(abs(c), abs(c)) for c in k]
    padded = np.pad(values, pads)
    shifted = np.roll(padded, [-c for c in k], axis=tuple(range(values.ndim)))
    diff = np.abs(shifted - padded)
    if restrict:
        diff = diff[tuple(slice(a, a + e) for (a, _), e in zip(pads, values.shape))]
    if p == 1:
        return float(np.sum(diff)) * cell_volume
    return float(np.sum(diff**p)) * cell_volume


@dataclass(frozen=True)
class SmoothingEstimate:
    """Smoothing error of one function against one mollifier.

    ``observed`` is the grid value of ``integral |g*rho - g|^p``.  ``grid_bound``
    is the discrete chain ``||rho||_{p'}^p * |support| h^d * max_k T(k)`` and
    ``continuous_bound`` is ``C1 C2 max_k T(k)`` over the same sampled shifts
    ``|k h| < 1/n``.  ``mass_defect`` is ``|1 - sum rho(k h) h^d|``.
    """

    observed: float
    grid_bound: float
    continuous_bound: float
    mass_defect: float
    max_translation: float
    p: float = 1.0

    def certified_norm_bound(self, g_norm):
        """Bound on ``||g*rho - g||_p`` (not raised to the p)."""
        return self.grid_bound ** (1.0 / self.p) + self.mass_defect * g_norm


def smoothing_estimate(g: GridFunction, m: Mollifier, p, max_translation=None) -> SmoothingEstimate:
    """Observed smoothing error and the two bounds from the Hoelder/Fubini chain.

    ``max_translation`` may be passed in to share the sup over a family; it
    must then dominate ``T(k)`` for this ``g``.
    """
    p = _check_finite_p(p)
    q = holder_conjugate(p)
    k = kernel_grid(m, g.spacing)
    h = convolve_zero_extended(g, m)
    padded = g.pad(k.radius_cells)
    observed = grid_lp_norm(h - padded, p) ** p
    if max_translation is None:
        support = np.argwhere(k.values > 0) - np.array(k.radius_cells)
        max_translation = max(
            translation_integral(g.values, -off, p, g.cell_volume) for off in support
        )
    grid_bound = k.lp_norm(q) ** p * k.support_count * k.cell_volume * max_translation
    c1, c2 = frechet_constants(p, g.dim)
    return SmoothingEstimate(
        observed=observed,
        grid_bound=grid_bound,
        continuous_bound=c1 * c2 * max_translation,
        mass_defect=abs(1.0 - k.mass),
        max_translation=max_translation,
        p=p,
    )
