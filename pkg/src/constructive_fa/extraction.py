"""Constructive subsequence extraction in C(K) and L^p.

* :func:`bw_subsequence` -- bisection Bolzano-Weierstrass on a finite list.
* :func:`covering_index` -- minimal prefix of a dense list that eps-covers K.
* :func:`aa_extract` -- nested bisection over dense points, then a diagonal,
  certified in sup norm by the covering/equicontinuity argument.
* :func:`fk_extract` -- mollify, extract in sup norm per mollifier with
  nesting, take the diagonal, certify in L^p by an eps/3 split.

Sequences are finite prefixes; indices are 0-based positions into the input
family.  Cauchy claims are certified on the prefix for explicit epsilons.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import (
    CertificateError,
    InsufficientDensityError,
    InvalidExponentError,
    SpaceMismatchError,
)
from .mollify import (
    Mollifier,
    convolve_zero_extended,
    difference_bounds,
    frechet_constants,
    kernel_grid,
    smoothing_estimate,
    translation_integral,
)
from .spaces import GridFunction, grid_lp_norm, grid_sup_norm

__all__ = [
    "Box",
    "ExtractionResult",
    "TranslationEntry",
    "translation_modulus",
    "dyadic_dense_points",
    "dense_nodes",
    "covering_index",
    "bw_subsequence",
    "sampled_modulus",
    "aa_extract",
    "fk_extract",
    "verify_nesting",
]


@dataclass(frozen=True)
class Box:
    """Axis-aligned box ``[lower, upper]``; sampled on a lattice when used as K."""

    lower: tuple
    upper: tuple
    resolution: int | None = None

    def samples(self):
        d = len(self.lower)
        res = self.resolution or (2**10 + 1 if d == 1 else 2**6 + 1)
        axes = [np.linspace(lo, hi, res) for lo, hi in zip(self.lower, self.upper)]
        return np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, d)


@dataclass(frozen=True)
class ExtractionResult:
    """Extracted subsequence with its staging and Cauchy table.

    ``modulus[eps]`` is the position in ``subsequence`` from which every pair
    is certified to be closer than ``eps``.
    """

    subsequence: tuple
    stages: tuple
    cauchy: tuple
    epsilons: tuple
    modulus: dict
    norm: str
    info: dict = field(default_factory=dict)

    def modulus_index(self, eps):
        """Certified position for an arbitrary ``eps`` (None if below the schedule)."""
        ok = [pos for e, pos in self.modulus.items() if e <= eps]
        return min(ok) if ok else None


# ---------------------------------------------------------------------------
# translation modulus
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TranslationEntry:
    shift: tuple
    cells: tuple
    snap_error: float
    value: float


def translation_modulus(family: Sequence[GridFunction], p, shifts, restrict=False):
    """``sup_f integral |f(x+h) - f(x)|^p dx`` for each requested shift ``h``.

    Shifts are snapped to the nearest grid offset and the snap distance is
    recorded.  Functions are zero outside their box; the outer integral runs
    over all of R^d unless ``restrict`` limits it to the box.
    """
    p = float(p)
    if not 1 <= p < math.inf:
        raise InvalidExponentError("translation modulus needs 1 <= p < inf")
    family = list(family)
    if not family:
        raise ValueError("empty family")
    ref = family[0]
    for f in family[1:]:
        if not f.same_grid(ref):
            raise SpaceMismatchError("family members must share one grid")
    h = np.array(ref.spacing)
    out = []
    for s in shifts:
        s = np.broadcast_to(np.atleast_1d(np.asarray(s, dtype=float)), (ref.dim,))
        cells = tuple(int(c) for c in np.rint(s / h))
        snap = float(np.linalg.norm(s - np.array(cells) * h))
        value = max(translation_integral(f.values, cells, p, f.cell_volume, restrict) for f in family)
        out.append(TranslationEntry(tuple(float(c) for c in s), cells, snap, value))
    return out


# ---------------------------------------------------------------------------
# dense points and covering
# ---------------------------------------------------------------------------


def _dyadic_unit(dim, levels):
    seen = set()
    for level in range(levels + 1):
        den = 2**level
        ticks = range(den + 1)
        for idx in itertools.product(ticks, repeat=dim):
            pt = tuple(i / den for i in idx)
            if pt not in seen:
                seen.add(pt)
                yield pt


def dyadic_dense_points(lower, upper, levels: int) -> np.ndarray:
    """Dyadic lattice points of a box enumerated level by level.

    Level 0 is the corners; level ``L`` adds the new points with
    denominator ``2^L`` in lexicographic order.  In one dimension on [0, 1]
    this is 0, 1, 1/2, 1/4, 3/4, 1/8, ...
    """
    lower = np.atleast_1d(np.asarray(lower, dtype=float))
    upper = np.atleast_1d(np.asarray(upper, dtype=float))
    unit = np.array(list(_dyadic_unit(lower.size, levels)), dtype=float)
    return lower + unit * (upper - lower)


def dense_nodes(g: GridFunction) -> list:
    """Grid nodes in dyadic enumeration order, deduplicated, until every node appears."""
    total = math.prod(g.extent)
    levels = max(int(math.ceil(math.log2(2 * e))) for e in g.extent) + 1
    order, seen = [], set()
    for pt in _dyadic_unit(g.dim, levels):
        coord = [lo + t * (hi - lo) for lo, hi, t in zip(g.origin, g.upper, pt)]
        node = g.nearest_node(coord)
        if node not in seen:
            seen.add(node)
            order.append(node)
            if len(order) == total:
                break
    return order


def covering_index(dense_points, eps: float, K) -> int:
    """Minimal ``k`` with ``sup_{s in K} min_{j <= k} |d_j - s| <= eps``.

    ``K`` is a :class:`Box` (sampled on a lattice) or an array of points.
    """
    if not eps >= 0:
        raise ValueError("eps must be nonnegative")
    dense = np.asarray(dense_points, dtype=float)
    if dense.ndim == 1:
        dense = dense[:, None]
    samples = K.samples() if isinstance(K, Box) else np.asarray(K, dtype=float)
    if samples.ndim == 1:
        samples = samples[:, None]
    nearest = np.full(len(samples), np.inf)
    for j, pt in enumerate(dense):
        np.minimum(nearest, np.sqrt(np.sum((samples - pt) ** 2, axis=1)), out=nearest)
        if nearest.max() <= eps:
            return j + 1
    raise InsufficientDensityError(
        f"{len(dense)} dense points leave a gap of {nearest.max():.6g} > eps = {eps:g}"
    )


# ---------------------------------------------------------------------------
# Bolzano-Weierstrass
# ---------------------------------------------------------------------------


def bw_subsequence(values, tol: float) -> list:
    """Bisection extraction: positions whose values fit in an interval of width < tol.

    The enclosing interval ``[min, max]`` is halved repeatedly, keeping the
    half with more surviving positions (ties keep the lower half ``[lo, mid]``;
    the upper half is ``(mid, hi]``).
    """
    vals = np.asarray(values, dtype=float).ravel()
    if vals.size == 0:
        raise ValueError("bw_subsequence needs at least one value")
    if not tol > 0:
        raise ValueError("tol must be positive")
    if not np.all(np.isfinite(vals)):
        raise ValueError("values must be finite")
    survivors = list(range(vals.size))
    lo, hi = float(vals.min()), float(vals.max())
    while hi - lo >= tol:
        mid = lo + (hi - lo) / 2
        if mid <= lo or mid >= hi:
            break
        lower = [i for i in survivors if vals[i] <= mid]
        upper = [i for i in survivors if vals[i] > mid]
        if len(lower) >= len(upper):
            survivors, hi = lower, mid
        else:
            survivors, lo = upper, mid
    return survivors


# ---------------------------------------------------------------------------
# Arzela-Ascoli
# ---------------------------------------------------------------------------


def sampled_modulus(family: Sequence[GridFunction]) -> Callable:
    """Heuristic equicontinuity modulus from node samples.

    Returns ``omega(delta) = max_f max |f(x) - f(y)|`` over node pairs with
    ``|x - y| <= delta``.  Exact for the node-sampled functions, but only an
    estimate of the modulus of whatever the samples came from.
    """
    ref = family[0]
    stack = np.stack([f.values for f in family])
    h = np.array(ref.spacing)
    ranges = [range(0, e) if a == 0 else range(-e + 1, e) for a, e in enumerate(ref.extent)]
    radii, jumps = [0.0], [0.0]
    for off in itertools.product(*ranges):
        if all(o == 0 for o in off) or (ref.dim == 2 and off[0] == 0 and off[1] < 0):
            continue
        a = stack[(slice(None),) + tuple(slice(max(o, 0), e + min(o, 0)) for o, e in zip(off, ref.extent))]
        b = stack[(slice(None),) + tuple(slice(max(-o, 0), e + min(-o, 0)) for o, e in zip(off, ref.extent))]
        radii.append(float(np.linalg.norm(np.array(off) * h)))
        jumps.append(float(np.max(np.abs(a - b))) if a.size else 0.0)
    order = np.argsort(radii, kind="stable")
    radii = np.asarray(radii)[order]
    envelope = np.maximum.accumulate(np.asarray(jumps)[order])

    def omega(delta):
        i = np.searchsorted(radii, delta * (1 + 1e-12), side="right") - 1
        return float(envelope[max(i, 0)])

    omega.radii = radii
    return omega


def _largest_delta(omega, target, h_min, limit):
    # largest multiple of h_min (up to limit) with omega <= target
    best = 0.0
    if omega(0.0) > target:
        return None
    for j in range(1, limit + 1):
        if omega(j * h_min) > target:
            break
        best = j * h_min
    return best


def _diagonal(stages):
    """``stage_s[s]`` for each stage while available, then the tail of the last stage."""
    diag = []
    complete = True
    for s, stage in enumerate(stages):
        if len(stage) <= s:
            complete = False
            break
        diag.append(stage[s])
    if complete and stages:
        diag.extend(i for i in stages[-1] if i > (diag[-1] if diag else -1))
    return diag


def _check_schedule(eps_schedule):
    eps = [float(e) for e in eps_schedule]
    if not eps or any(not e > 0 for e in eps) or any(b >= a for a, b in zip(eps, eps[1:])):
        raise ValueError("epsilon schedule must be positive and strictly decreasing")
    return eps


def _same_grid(family):
    ref = family[0]
    for f in family[1:]:
        if not f.same_grid(ref):
            raise SpaceMismatchError("family members must share one grid")
    return ref


def _pair_table(subseq, dist):
    return tuple(
        (int(a), int(b), float(dist(a, b))) for a, b in itertools.combinations(subseq, 2)
    )


def _certify(subseq, table, modulus):
    pos = {idx: k for k, idx in enumerate(subseq)}
    for eps, start in modulus.items():
        for a, b, d in table:
            if pos[a] >= start and pos[b] >= start and not d < eps:
                raise CertificateError(
                    f"pair ({a}, {b}) at distance {d:.6g} violates eps = {eps:g}",
                    detail=(a, b, d, eps),
                )


def aa_extract(family: Sequence[GridFunction], dense_points=None, eps_schedule=(1.0,),
               modulus: Callable | None = None, indices: Sequence[int] | None = None,
               certify: bool = True) -> ExtractionResult:
    """Sup-norm Cauchy subsequence of grid functions sharing one grid.

    For each ``eps`` in the (strictly decreasing) schedule, a radius
    ``delta`` with ``omega(delta) <= eps/3`` is found, the dense points up to
    the covering index ``k(delta)`` are processed by :func:`bw_subsequence` at
    tolerance ``eps/3``, and the survivors form the next stage.  The result
    is the diagonal of the stages followed by the tail of the last one.

    Parameters
    ----------
    family : sequence of GridFunction
        Members of ``C(K)`` sampled on the nodes of a common grid; ``K`` is
        the node set.
    dense_points : array, optional
        Points of the box, snapped to nodes.  Defaults to :func:`dense_nodes`.
    modulus : callable, optional
        Equicontinuity modulus valid for every member.  When omitted, the
        heuristic :func:`sampled_modulus` is used.
    indices : sequence of int, optional
        Restrict extraction to these family positions (kept in order).
    """
    family = list(family)
    if not family:
        raise ValueError("empty family")
    ref = _same_grid(family)
    eps_list = _check_schedule(eps_schedule)
    if dense_points is None:
        nodes = dense_nodes(ref)
    else:
        pts = np.asarray(dense_points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        nodes = list(dict.fromkeys(ref.nearest_node(p) for p in pts))
    coords = ref.nodes()
    dense_coords = np.array([coords[n] for n in nodes])
    K = ref.node_points()
    modulus_source = "supplied"
    if modulus is None:
        modulus = sampled_modulus(family)
        modulus_source = "estimated"
    h_min = min(ref.spacing)
    limit = int(math.ceil(np.linalg.norm(np.array(ref.extent) * np.array(ref.spacing)) / h_min))

    current = list(range(len(family))) if indices is None else [int(i) for i in indices]
    stages, rounds, deltas, covers = [], [], [], []
    for eps in eps_list:
        delta = _largest_delta(modulus, eps / 3, h_min, limit)
        if delta is None:
            raise CertificateError(f"modulus is positive at zero; cannot reach eps = {eps:g}")
        k = covering_index(dense_coords, delta, K)
        for j in range(k):
            vals = [family[i].values[nodes[j]] for i in current]
            keep = bw_subsequence(vals, eps / 3)
            current = [current[t] for t in keep]
            rounds.append((eps, j, tuple(current)))
        stages.append(tuple(current))
        deltas.append(delta)
        covers.append(k)

    subseq = _diagonal(stages)
    mod = {}
    for s, eps in enumerate(eps_list):
        mod[eps] = min(s, len(subseq))
    table = _pair_table(subseq, lambda a, b: grid_sup_norm(family[a] - family[b]))
    if certify:
        _certify(subseq, table, mod)
    return ExtractionResult(
        subsequence=tuple(subseq),
        stages=tuple(stages),
        cauchy=table,
        epsilons=tuple(eps_list),
        modulus=mod,
        norm="sup",
        info={
            "deltas": deltas,
            "covering_indices": covers,
            "modulus_source": modulus_source,
            "rounds": rounds,
            "dense_nodes": nodes,
        },
    )


def verify_nesting(result: ExtractionResult, initial=None) -> bool:
    """Every stage is a subsequence of the previous one and the diagonal respects the stages."""
    prev = None if initial is None else list(initial)
    for stage in result.stages:
        if list(stage) != sorted(set(stage)):
            return False
        if prev is not None and not set(stage) <= set(prev):
            return False
        prev = stage
    sub = list(result.subsequence)
    if sub != sorted(set(sub)):
        return False
    for pos, idx in enumerate(sub):
        stage = result.stages[min(pos, len(result.stages) - 1)]
        if idx not in stage:
            return False
    return True


# ---------------------------------------------------------------------------
# Frechet-Kolmogorov
# ---------------------------------------------------------------------------


def _lp_dist(p):
    def dist(f, g):
        return grid_lp_norm(f - g, p)

    return dist


def fk_extract(family: Sequence[GridFunction], p, mollifier_schedule, eps: float,
               certify: bool = True) -> ExtractionResult:
    """L^p Cauchy subsequence of a bounded, equi-translation-continuous family.

    For each scheduled mollifier ``rho_m`` (increasing ``m``) the smoothed
    family ``h_{k,m} = f_k * rho_m`` is extracted in sup norm with a
    certified Lipschitz modulus, restricted to the previous stage's
    survivors.  Stages stop at the first ``J`` whose smoothing bound
    ``||g * rho_J - g||_p <= eps/3`` holds for every ``g`` in the family.  The
    diagonal of the stages is L^p-Cauchy: beyond position ``J`` every pair is
    within ``eps/3 + eps/3 + eps/3``.
    """
    p = float(p)
    if not 1 <= p < math.inf:
        raise InvalidExponentError("fk_extract needs 1 <= p < inf")
    if not eps > 0:
        raise ValueError("eps must be positive")
    family = list(family)
    if not family:
        raise ValueError("empty family")
    ref = _same_grid(family)
    schedule = sorted({int(m) for m in mollifier_schedule})
    if not schedule:
        raise ValueError("empty mollifier schedule")
    norms = [grid_lp_norm(f, p) for f in family]
    c1, c2 = frechet_constants(p, ref.dim)

    translations = {}

    def family_translation(off):
        key = tuple(int(c) for c in off)
        if key not in translations:
            translations[key] = max(
                translation_integral(f.values, [-c for c in key], p, f.cell_volume) for f in family
            )
        return translations[key]

    current = list(range(len(family)))
    stages, smoothing, sup_targets = [], [], []
    J = None
    for m in schedule:
        moll = Mollifier(m, ref.dim)
        kern = kernel_grid(moll, ref.spacing)
        support = np.argwhere(kern.values > 0) - np.array(kern.radius_cells)
        t_max = max(family_translation(off) for off in support)
        bound = max(
            smoothing_estimate(f, moll, p, max_translation=t_max).certified_norm_bound(nf)
            for f, nf in zip(family, norms)
        )
        smoothing.append(bound)

        if len(current) > 1:
            smoothed = {i: convolve_zero_extended(family[i], moll) for i in current}
            sample = next(iter(smoothed.values()))
            box_volume = math.prod(e * h for e, h in zip(sample.extent, sample.spacing))
            target = (eps / 3) / box_volume ** (1.0 / p)
            lips = [
                max(difference_bounds(family[i], moll, p)[j] for i in current)
                for j in range(ref.dim)
            ]
            lip_sum = sum(lips)

            def omega(delta, _l=lip_sum):
                return delta * _l

            pos = list(smoothed)
            sub = aa_extract([smoothed[i] for i in pos], eps_schedule=[target],
                             modulus=omega, certify=certify)
            current = [pos[t] for t in sub.stages[-1]]
            sup_targets.append(target)
        else:
            sup_targets.append(None)
        stages.append(tuple(current))
        if bound <= eps / 3:
            J = m
            break
        if len(current) <= 1:  # a single survivor is trivially Cauchy
            break

    subseq = _diagonal(stages)
    j_pos = len(stages) - 1
    table = _pair_table(subseq, lambda a, b: grid_lp_norm(family[a] - family[b], p))
    if J is None and len(subseq) > 1:
        raise CertificateError(
            f"no scheduled mollifier reaches smoothing error eps/3 = {eps / 3:.6g}; "
            f"achieved {min(smoothing):.6g}",
            detail={"smoothing_bounds": dict(zip(schedule, smoothing))},
        )
    mod = {float(eps): min(j_pos, len(subseq))}
    if certify:
        _certify(subseq, table, mod)
    return ExtractionResult(
        subsequence=tuple(subseq),
        stages=tuple(stages),
        cauchy=table,
        epsilons=(float(eps),),
        modulus=mod,
        norm=f"L^{p:g}",
        info={
            "mollifiers": schedule[: len(stages)],
            "J": J,
            "smoothing_bounds": smoothing,
            "sup_targets": sup_targets,
            "C1": c1,
            "C2": c2,
        },
    )
