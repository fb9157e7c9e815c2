"""Counting-measure function spaces, grid-sampled functions and l^p direct sums.

Three value types live here:

* :class:`FiniteFn` -- a real function on an explicitly enumerated finite set,
  normed with respect to the counting measure.
* :class:`GridFunction` -- a real function sampled at the cell midpoints of a
  uniform box grid in one or two dimensions, zero outside its box.
* :class:`DirectSumVec` -- a finitely supported element of an l^p sum whose
  components are ``FiniteFn`` objects or fixed-length real vectors.

All three are immutable; arithmetic returns new objects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Callable, Hashable, Iterable, Mapping, Sequence

import numpy as np

from .errors import InvalidExponentError, SpaceMismatchError

__all__ = [
    "RTOL",
    "FiniteFn",
    "GridFunction",
    "DirectSumVec",
    "holder_conjugate",
    "counting_lp_norm",
    "grid_lp_norm",
    "grid_sup_norm",
    "direct_sum_norm",
    "vector_norm",
    "leq_rel",
]

#: global relative tolerance for floating comparisons that are not exact by design
RTOL = 1e-9


def leq_rel(a, b, rtol=RTOL):
    """``a <= b`` up to a relative slack of ``rtol`` on ``b``."""
    return a <= b + rtol * abs(b)


def _check_exponent(p):
    p = float(p)
    if math.isnan(p) or p < 1:
        raise InvalidExponentError(f"exponent must lie in [1, inf], got {p!r}")
    return p


def holder_conjugate(p):
    """Return ``p'`` with ``1/p + 1/p' = 1`` (so 1 <-> inf)."""
    p = _check_exponent(p)
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1)


def _frozen(arr, dtype=float):
    out = np.array(arr, dtype=dtype)
    out.flags.writeable = False
    return out


def _pnorm(values, p):
    a = np.abs(np.asarray(values, dtype=float)).ravel()
    if a.size == 0:
        return 0.0
    if math.isinf(p):
        return float(a.max())
    if p == 1:
        return math.fsum(a)
    top = float(a.max())
    if top == 0:
        return 0.0
    # scale by the max so tiny or huge entries neither underflow nor overflow
    return top * float(np.sum((a / top) ** p)) ** (1.0 / p)


# ---------------------------------------------------------------------------
# finite sets with counting measure
# ---------------------------------------------------------------------------


class FiniteFn:
    """Real-valued function on a finite, ordered set of labels.

    Parameters
    ----------
    domain : sequence of hashable
        Distinct labels; order is kept and defines the layout of ``values``.
    values : sequence of float
        One finite value per label.
    """

    __slots__ = ("domain", "values", "_index")

    def __init__(self, domain: Sequence[Hashable], values):
        domain = tuple(domain)
        if not domain:
            raise ValueError("FiniteFn needs a nonempty domain")
        index = {lab: i for i, lab in enumerate(domain)}
        if len(index) != len(domain):
            raise ValueError("FiniteFn labels must be distinct")
        vals = _frozen(values)
        if vals.shape != (len(domain),):
            raise ValueError(f"expected {len(domain)} values, got shape {vals.shape}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("FiniteFn values must be finite")
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "_index", index)

    def __setattr__(self, name, value):
        raise AttributeError("FiniteFn is immutable")

    # constructors
    @classmethod
    def from_pairs(cls, pairs: Iterable[tuple[Hashable, float]]) -> "FiniteFn":
        pairs = list(pairs)
        return cls([k for k, _ in pairs], [v for _, v in pairs])

    @classmethod
    def from_dict(cls, mapping: Mapping[Hashable, float]) -> "FiniteFn":
        return cls(list(mapping), list(mapping.values()))

    @classmethod
    def zeros(cls, domain) -> "FiniteFn":
        domain = tuple(domain)
        return cls(domain, np.zeros(len(domain)))

    @classmethod
    def indicator(cls, domain, label) -> "FiniteFn":
        """The unit mass at ``label``."""
        f = cls.zeros(domain)
        vals = np.zeros(len(f.domain))
        vals[f._index[label]] = 1.0
        return cls(f.domain, vals)

    # access
    def __len__(self):
        return len(self.domain)

    def __getitem__(self, label):
        return float(self.values[self._index[label]])

    def __contains__(self, label):
        return label in self._index

    def pairs(self):
        return [(lab, float(v)) for lab, v in zip(self.domain, self.values)]

    def as_dict(self):
        return dict(self.pairs())

    def is_zero(self):
        return not np.any(self.values)

    def total(self):
        """Integral against counting measure."""
        return math.fsum(self.values)

    def max_abs(self):
        return float(np.max(np.abs(self.values)))

    def norm(self, p=1):
        return counting_lp_norm(self, p)

    # arithmetic
    def _same_domain(self, other):
        if not isinstance(other, FiniteFn) or other.domain != self.domain:
            raise SpaceMismatchError("FiniteFn operands live on different domains")

    def __add__(self, other):
        self._same_domain(other)
        return FiniteFn(self.domain, self.values + other.values)

    def __sub__(self, other):
        self._same_domain(other)
        return FiniteFn(self.domain, self.values - other.values)

    def __mul__(self, scalar):
        return FiniteFn(self.domain, float(scalar) * self.values)

    __rmul__ = __mul__

    def __neg__(self):
        return FiniteFn(self.domain, -self.values)

    def __eq__(self, other):
        return (
            isinstance(other, FiniteFn)
            and self.domain == other.domain
            and np.array_equal(self.values, other.values)
        )

    def __hash__(self):
        return hash((self.domain, self.values.tobytes()))

    def __repr__(self):
        body = ", ".join(f"{k!r}: {v:g}" for k, v in self.pairs())
        return f"FiniteFn({{{body}}})"


def counting_lp_norm(f: FiniteFn, p=1) -> float:
    """L^p norm of ``f`` with respect to counting measure on its domain."""
    return _pnorm(f.values, _check_exponent(p))


def vector_norm(x, p=1) -> float:
    """p-norm of a plain real vector."""
    return _pnorm(x, _check_exponent(p))


# ---------------------------------------------------------------------------
# grid functions
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Function sampled at cell midpoints of a uniform grid on a box.

    The box is ``[origin, origin + extent * spacing]`` per axis; node ``i``
    on an axis sits at ``origin + (i + 1/2) * spacing``.  Outside the box the
    function is zero.  ``values`` has shape ``extent``.
    """

    origin: tuple
    spacing: tuple
    extent: tuple
    values: np.ndarray

    def __post_init__(self):
        origin = tuple(float(o) for o in np.atleast_1d(self.origin))
        spacing = tuple(float(h) for h in np.atleast_1d(self.spacing))
        extent = tuple(int(e) for e in np.atleast_1d(self.extent))
        d = len(extent)
        if d not in (1, 2) or len(origin) != d or len(spacing) != d:
            raise ValueError("grid dimension must be 1 or 2 with matching origin/spacing")
        if any(not h > 0 or not math.isfinite(h) for h in spacing):
            raise ValueError("grid spacing must be positive")
        if any(e < 1 for e in extent):
            raise ValueError("grid extent must be at least one cell per axis")
        vals = np.asarray(self.values, dtype=float)
        if vals.size != math.prod(extent):
            raise ValueError(f"expected {math.prod(extent)} values, got {vals.size}")
        vals = _frozen(vals.reshape(extent))
        if not np.all(np.isfinite(vals)):
            raise ValueError("grid values must be finite")
        object.__setattr__(self, "origin", origin)
        object.__setattr__(self, "spacing", spacing)
        object.__setattr__(self, "extent", extent)
        object.__setattr__(self, "values", vals)

    @property
    def dim(self):
        return len(self.extent)

    @property
    def cell_volume(self):
        return math.prod(self.spacing)

    @property
    def upper(self):
        return tuple(o + e * h for o, e, h in zip(self.origin, self.extent, self.spacing))

    def axis_nodes(self, axis):
        o, h, e = self.origin[axis], self.spacing[axis], self.extent[axis]
        return o + (np.arange(e) + 0.5) * h

    def nodes(self):
        """Node coordinates, shape ``extent + (dim,)``."""
        grids = np.meshgrid(*[self.axis_nodes(a) for a in range(self.dim)], indexing="ij")
        return np.stack(grids, axis=-1)

    def node_points(self):
        """Node coordinates flattened to shape ``(num_nodes, dim)`` (row-major)."""
        return self.nodes().reshape(-1, self.dim)

    @classmethod
    def sample(cls, func: Callable, lower, upper, cells) -> "GridFunction":
        """Sample ``func`` (vectorised over coordinate arrays) on a box.

        ``func`` receives one array per axis, as produced by
        ``np.meshgrid(..., indexing="ij")``.
        """
        lower = np.atleast_1d(np.asarray(lower, dtype=float))
        upper = np.atleast_1d(np.asarray(upper, dtype=float))
        cells = np.atleast_1d(np.asarray(cells, dtype=int))
        spacing = (upper - lower) / cells
        g = cls(tuple(lower), tuple(spacing), tuple(cells), np.zeros(tuple(cells)))
        axes = np.meshgrid(*[g.axis_nodes(a) for a in range(g.dim)], indexing="ij")
        vals = np.broadcast_to(np.asarray(func(*axes), dtype=float), g.extent)
        return g.with_values(vals)

    def with_values(self, values) -> "GridFunction":
        return GridFunction(self.origin, self.spacing, self.extent, values)

    def same_grid(self, other) -> bool:
        return (
            self.origin == other.origin
            and self.spacing == other.spacing
            and self.extent == other.extent
        )

    def pad(self, cells) -> "GridFunction":
        """Zero-extend by ``cells`` (int or per-axis) on every side."""
        cells = tuple(int(c) for c in np.broadcast_to(np.atleast_1d(cells), (self.dim,)))
        vals = np.pad(self.values, [(c, c) for c in cells])
        origin = tuple(o - c * h for o, c, h in zip(self.origin, cells, self.spacing))
        extent = tuple(e + 2 * c for e, c in zip(self.extent, cells))
        return GridFunction(origin, self.spacing, extent, vals)

    def nearest_node(self, point):
        """Multi-index of the node closest to ``point`` (clipped into the grid)."""
        point = np.atleast_1d(np.asarray(point, dtype=float))
        idx = []
        for a in range(self.dim):
            i = int(np.floor((point[a] - self.origin[a]) / self.spacing[a]))
            idx.append(min(max(i, 0), self.extent[a] - 1))
        return tuple(idx)

    def __add__(self, other):
        if not self.same_grid(other):
            raise SpaceMismatchError("grid functions live on different grids")
        return self.with_values(self.values + other.values)

    def __sub__(self, other):
        if not self.same_grid(other):
            raise SpaceMismatchError("grid functions live on different grids")
        return self.with_values(self.values - other.values)

    def __mul__(self, scalar):
        return self.with_values(float(scalar) * self.values)

    __rmul__ = __mul__

    def __eq__(self, other):
        return (
            isinstance(other, GridFunction)
            and self.same_grid(other)
            and np.array_equal(self.values, other.values)
        )

    __hash__ = None

    def __repr__(self):
        return (
            f"GridFunction(dim={self.dim}, origin={self.origin}, "
            f"spacing={self.spacing}, extent={self.extent})"
        )


def grid_lp_norm(g: GridFunction, p=2) -> float:
    """Midpoint-rule approximation of the L^p norm, ``p < inf``.

    Use :func:`grid_sup_norm` for ``p = inf``.
    """
    p = _check_exponent(p)
    if math.isinf(p):
        raise InvalidExponentError("grid_lp_norm takes p < inf; use grid_sup_norm")
    a = np.abs(g.values)
    if p == 1:
        return math.fsum(a.ravel()) * g.cell_volume
    top = float(a.max())
    if top == 0:
        return 0.0
    return top * (float(np.sum((a / top) ** p)) * g.cell_volume) ** (1.0 / p)


def grid_sup_norm(g: GridFunction) -> float:
    return float(np.max(np.abs(g.values)))


# ---------------------------------------------------------------------------
# l^p direct sums
# ---------------------------------------------------------------------------


def _component_norm(c, inner_p):
    if isinstance(c, FiniteFn):
        return counting_lp_norm(c, inner_p)
    return vector_norm(c, inner_p)


def _is_zero_component(c):
    return c.is_zero() if isinstance(c, FiniteFn) else not np.any(c)


def _as_component(c):
    if isinstance(c, FiniteFn):
        return c
    return _frozen(np.atleast_1d(c))


class DirectSumVec:
    """Finitely supported element of an l^p sum of component spaces.

    Parameters
    ----------
    components : mapping int -> FiniteFn or real vector
        Components at positive indices; unlisted indices are zero.
    p : float
        Exponent of the outer l^p sum (default 1).
    inner_p : float
        Exponent used for the component norms (default 1, i.e. L^1 with
        counting measure; use ``inf`` for sup-normed tuples).
    """

    __slots__ = ("components", "p", "inner_p")

    def __init__(self, components: Mapping[int, object] | None = None, p=1, inner_p=1):
        comps = {}
        for n, c in sorted((components or {}).items()):
            n = int(n)
            if n < 1:
                raise ValueError("direct-sum indices start at 1")
            comps[n] = _as_component(c)
        object.__setattr__(self, "components", MappingProxyType(comps))
        object.__setattr__(self, "p", _check_exponent(p))
        object.__setattr__(self, "inner_p", _check_exponent(inner_p))

    def __setattr__(self, name, value):
        raise AttributeError("DirectSumVec is immutable")

    @classmethod
    def single(cls, n, component, p=1, inner_p=1) -> "DirectSumVec":
        return cls({n: component}, p=p, inner_p=inner_p)

    @property
    def support(self):
        return tuple(self.components)

    def component(self, n):
        return self.components.get(n)

    def norm(self):
        return direct_sum_norm(self)

    def with_norm(self, p=None, inner_p=None) -> "DirectSumVec":
        return DirectSumVec(
            self.components,
            p=self.p if p is None else p,
            inner_p=self.inner_p if inner_p is None else inner_p,
        )

    def _combine(self, other, sign):
        if not isinstance(other, DirectSumVec):
            return NotImplemented
        out = dict(self.components)
        for n, c in other.components.items():
            if n in out:
                a = out[n]
                if isinstance(a, FiniteFn) != isinstance(c, FiniteFn):
                    raise SpaceMismatchError(f"component {n} mixes function and tuple types")
                if not isinstance(a, FiniteFn) and a.shape != c.shape:
                    raise SpaceMismatchError(f"component {n} has mismatched lengths")
                out[n] = a + c if sign > 0 else a - c
            else:
                out[n] = c if sign > 0 else -c
        return DirectSumVec(out, p=self.p, inner_p=self.inner_p)

    def __add__(self, other):
        return self._combine(other, +1)

    def __sub__(self, other):
        return self._combine(other, -1)

    def __mul__(self, scalar):
        s = float(scalar)
        return DirectSumVec(
            {n: s * c for n, c in self.components.items()}, p=self.p, inner_p=self.inner_p
        )

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def __eq__(self, other):
        # exact comparison; a stored zero component equals an absent one
        if not isinstance(other, DirectSumVec):
            return False
        for n in set(self.support) | set(other.support):
            a, b = self.components.get(n), other.components.get(n)
            if a is None or b is None:
                if not _is_zero_component(b if a is None else a):
                    return False
            elif isinstance(a, FiniteFn) or isinstance(b, FiniteFn):
                if a != b:
                    return False
            elif not np.array_equal(a, b):
                return False
        return True

    __hash__ = None

    def __repr__(self):
        return f"DirectSumVec(support={list(self.support)}, p={self.p:g}, inner_p={self.inner_p:g})"


def direct_sum_norm(v: DirectSumVec, p=None, inner_p=None) -> float:
    """Outer l^p norm of the component norms over the finite support.

    ``p`` and ``inner_p`` override the exponents stored on ``v``.
    """
    p = v.p if p is None else _check_exponent(p)
    inner_p = v.inner_p if inner_p is None else _check_exponent(inner_p)
    norms = [_component_norm(c, inner_p) for c in v.components.values()]
    return _pnorm(norms, p)
