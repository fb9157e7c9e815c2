"""Gliding-hump construction of a divergence point for an unbounded family.

Given operators ``T_n`` with certified bounds ``b_n >= 4^n`` and inputs
``x_n`` of norm at most one with ``||T_n x_n|| > (2/3) b_n``, the iteration

    y_1 = x_1,    y_{n+1} = y_n +/- 3^{-(n+1)} x_{n+1}

(plus sign whenever it already keeps ``||T_{n+1} y_{n+1}||`` above
``3^{-(n+1)} (2/3) b_{n+1}``) is Cauchy with ``||y_n - y|| <= 3^{-n}/2``, and
the limit satisfies ``||T_n y|| >= (1/6) 3^{-n} b_n >= (1/6) (4/3)^n``.

Everything here works on the truncation ``y_N`` and reports the tail bound
explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import CertificateError, EmptySelectionError, PreconditionError
from .operators import LowerBound, OperatorFamily, _rule, norm_lower_bound
from .spaces import RTOL, DirectSumVec, FiniteFn, leq_rel

__all__ = [
    "HumpInput",
    "HumpTrace",
    "CertificateRow",
    "hump_step",
    "hump_sequence",
    "hump_limit",
    "divergence_certificate",
    "verify_trace",
    "average_near_maximizer",
    "first_exceeding",
    "weak_ubp_input",
]

TWO_THIRDS = 2.0 / 3.0


class HumpInput:
    """Operators, horizon and near-maximising inputs for the hump iteration.

    Parameters
    ----------
    family : OperatorFamily
    horizon : int
        Number ``N`` of humps.
    near_maximizers : callable or sequence
        ``n -> x_n`` (1-based when a sequence).
    operator_indices : callable or sequence, optional
        ``n -> alpha_n``, the member of ``family`` that ``x_n`` nearly
        maximises.  Defaults to ``alpha_n = n``.
    bound_probes : callable or sequence, optional
        ``n -> probe`` passed to :func:`norm_lower_bound` for ``T_{alpha_n}``.
    validate : bool
        Check the input invariants on construction (default True).
    """

    def __init__(self, family: OperatorFamily, horizon: int, near_maximizers,
                 operator_indices=None, bound_probes=None, validate=True):
        if int(horizon) < 1:
            raise ValueError("horizon must be at least 1")
        self.family = family
        self.horizon = int(horizon)
        self._x = _rule(near_maximizers)
        self._alpha = _rule(operator_indices) if operator_indices is not None else (lambda n: n)
        probe_rule = _rule(bound_probes) if bound_probes is not None else None
        self.maximizers = tuple(self._x(n) for n in range(1, self.horizon + 1))
        self.operator_indices = tuple(int(self._alpha(n)) for n in range(1, self.horizon + 1))
        self.lower_bounds: tuple[LowerBound, ...] = tuple(
            norm_lower_bound(family, a, None if probe_rule is None else probe_rule(n))
            for n, a in zip(range(1, self.horizon + 1), self.operator_indices)
        )
        if validate:
            self.validate()

    def x(self, n) -> DirectSumVec:
        return self.maximizers[n - 1]

    def alpha(self, n) -> int:
        return self.operator_indices[n - 1]

    def bound(self, n) -> float:
        return self.lower_bounds[n - 1].bound

    def image_norm(self, n, v) -> float:
        """``||T_{alpha_n}(v)||``."""
        return self.family.image_norm(self.alpha(n), v)

    def validate(self):
        """Raise :class:`CertificateError` naming the first ``n`` that breaks an invariant."""
        for n in range(1, self.horizon + 1):
            b = self.bound(n)
            if not b >= 4.0**n:
                raise CertificateError(
                    f"n={n}: operator bound {b} is below 4^{n} = {4.0**n}", n=n
                )
            x = self.x(n)
            xn = self.family.x_norm(x)
            if not leq_rel(xn, 1.0):
                raise CertificateError(f"n={n}: near-maximiser has norm {xn} > 1", n=n)
            tx = self.image_norm(n, x)
            if not tx > TWO_THIRDS * b:
                raise CertificateError(
                    f"n={n}: ||T_n(x_n)|| = {tx} is not above (2/3) * {b}", n=n
                )


@dataclass(frozen=True)
class HumpTrace:
    """Iterates ``y_1..y_N`` and the data certifying them.

    ``signs[k]`` is the sign chosen for hump ``k + 2``; ``lower_bounds[n-1]``
    is ``3^{-n} (2/3) b_n`` and ``observed[n-1]`` is ``||T_n(y_n)||``.
    """

    iterates: tuple
    signs: tuple
    lower_bounds: tuple
    observed: tuple
    truncation_error: float

    @property
    def horizon(self):
        return len(self.iterates)

    def y(self, n) -> DirectSumVec:
        return self.iterates[n - 1]


class CertificateRow(NamedTuple):
    n: int
    observed: float
    required: float
    passed: bool


def _step_threshold(n, b):
    return 3.0 ** (-n) * TWO_THIRDS * b


def hump_step(n: int, x: DirectSumVec, inp: HumpInput):
    """One application of the hump map: returns ``(point, sign)``.

    Adds ``3^{-(n+1)} x_{n+1}`` when the plus candidate strictly clears the
    threshold ``3^{-(n+1)} (2/3) b_{n+1}``; otherwise subtracts it.  Ties go
    to the minus branch.
    """
    m = n + 1
    if not (1 <= n and m <= inp.horizon):
        raise ValueError(f"hump step {n} -> {m} outside horizon {inp.horizon}")
    c = 3.0 ** (-m)
    hump = c * inp.x(m)
    threshold = _step_threshold(m, inp.bound(m))
    plus = x + hump
    if inp.image_norm(m, plus) > threshold:
        point, sign = plus, 1
    else:
        point, sign = x - hump, -1
    achieved = inp.image_norm(m, point)
    if achieved < threshold * (1 - RTOL):
        raise CertificateError(
            f"n={m}: ||T_n(y_n)|| = {achieved} fell below 3^-n (2/3) b_n = {threshold}", n=m
        )
    return point, sign


def hump_sequence(inp: HumpInput) -> HumpTrace:
    """Run the hump iteration up to the horizon."""
    y = inp.x(1)
    first = inp.image_norm(1, y)
    thr = _step_threshold(1, inp.bound(1))
    if first < thr * (1 - RTOL):
        raise CertificateError(f"n=1: ||T_1(x_1)|| = {first} below {thr}", n=1)
    iterates, signs = [y], []
    lower, observed = [thr], [first]
    for n in range(1, inp.horizon):
        y, s = hump_step(n, y, inp)
        iterates.append(y)
        signs.append(s)
        lower.append(_step_threshold(n + 1, inp.bound(n + 1)))
        observed.append(inp.image_norm(n + 1, y))
    return HumpTrace(
        iterates=tuple(iterates),
        signs=tuple(signs),
        lower_bounds=tuple(lower),
        observed=tuple(observed),
        truncation_error=3.0 ** (-inp.horizon) / 2,
    )


def hump_limit(trace: HumpTrace):
    """``(y_N, 3^{-N}/2)``: the truncated limit and its distance bound to the true limit."""
    return trace.iterates[-1], trace.truncation_error


def verify_trace(trace: HumpTrace, inp: HumpInput):
    """Check the recursion and the pairwise Cauchy bound on every pair of iterates."""
    norm = inp.family.x_norm
    if trace.iterates[0] != inp.x(1):
        raise CertificateError("y_1 differs from x_1", n=1)
    for n in range(1, trace.horizon):
        s = trace.signs[n - 1]
        expected = trace.y(n) + (s * 3.0 ** (-(n + 1))) * inp.x(n + 1)
        if norm(expected - trace.y(n + 1)) > 0:
            raise CertificateError(f"y_{n + 1} does not follow the recursion", n=n + 1)
    for n in range(1, trace.horizon + 1):
        for m in range(n + 1, trace.horizon + 1):
            d = norm(trace.y(n) - trace.y(m))
            if not leq_rel(d, 3.0 ** (-n) / 2):
                raise CertificateError(
                    f"||y_{n} - y_{m}|| = {d} exceeds 3^-{n}/2", n=n, detail=(n, m, d)
                )


def divergence_certificate(trace: HumpTrace, inp: HumpInput, raise_on_fail=True):
    """Table of ``(n, ||T_n(y_N)||, (1/6) 3^{-n} b_n, pass)`` for ``n = 1..N``.

    When ``b_n >= 4^n`` the required value is at least ``(1/6)(4/3)^n``.
    A failing row raises :class:`CertificateError` (rows in ``detail``)
    unless ``raise_on_fail`` is False.
    """
    y, _ = hump_limit(trace)
    rows = []
    for n in range(1, trace.horizon + 1):
        observed = inp.image_norm(n, y)
        required = 3.0 ** (-n) * inp.bound(n) / 6.0
        rows.append(CertificateRow(n, observed, required, observed >= required * (1 - RTOL)))
    failed = [r for r in rows if not r.passed]
    if failed and raise_on_fail:
        r = failed[0]
        raise CertificateError(
            f"n={r.n}: ||T_n(y)|| = {r.observed!r} < (1/6) 3^-n b_n = {r.required!r}",
            n=r.n,
            detail=rows,
        )
    return rows


# ---------------------------------------------------------------------------
# scalar-valued families
# ---------------------------------------------------------------------------


def _exact_mean(vectors: Sequence[DirectSumVec]) -> DirectSumVec:
    # correctly rounded coordinatewise mean; a mean of copies returns the copy
    k = len(vectors)
    first = vectors[0]
    support = sorted({n for v in vectors for n in v.support})
    comps = {}
    for n in support:
        present = [v.component(n) for v in vectors if v.component(n) is not None]
        template = present[0]
        width = len(template) if isinstance(template, FiniteFn) else np.size(template)
        acc = [Fraction(0)] * width
        for c in present:
            vals = c.values if isinstance(c, FiniteFn) else np.ravel(c)
            acc = [a + Fraction(float(v)) for a, v in zip(acc, vals)]
        mean = [float(a / k) for a in acc]
        comps[n] = FiniteFn(template.domain, mean) if isinstance(template, FiniteFn) else mean
    return DirectSumVec(comps, p=first.p, inner_p=first.inner_p)


def average_near_maximizer(points: Sequence[DirectSumVec], n: int, fam: OperatorFamily,
                           bound=None) -> DirectSumVec:
    """Mean of a finite set of near-maximisers of a scalar functional ``T_n``.

    Each point must satisfy ``||x|| <= 1`` and ``T_n(x) > (2/3) bound``; by
    convexity and linearity so does the mean, which is re-checked.
    """
    points = list(points)
    if not points:
        raise EmptySelectionError("cannot average an empty set of near-maximisers")
    if not fam.scalar_output:
        raise PreconditionError("averaging needs a family of real-valued functionals")
    if bound is None:
        bound = norm_lower_bound(fam, n).bound
    level = TWO_THIRDS * bound
    for i, x in enumerate(points):
        if not leq_rel(fam.x_norm(x), 1.0):
            raise PreconditionError(f"point {i} has norm {fam.x_norm(x)} > 1")
        t = float(fam.apply(n, x))
        if not t > level:
            raise PreconditionError(f"point {i}: T_{n}(x) = {t} is not above (2/3) * {bound}")
    mean = _exact_mean(points)
    if not leq_rel(fam.x_norm(mean), 1.0) or not float(fam.apply(n, mean)) > level:
        raise CertificateError(f"mean of near-maximisers for n={n} left the set B_n", n=n)
    return mean


def first_exceeding(fam: OperatorFamily, n: int, search_limit: int = 10_000) -> int:
    """Smallest ``k`` whose certified bound reaches ``4^n``."""
    target = 4.0**n
    for k in range(1, search_limit + 1):
        if norm_lower_bound(fam, k).bound >= target:
            return k
    raise EmptySelectionError(f"no operator among the first {search_limit} has bound >= 4^{n}")


def weak_ubp_input(fam: OperatorFamily, horizon: int, candidates: Callable,
                   search_limit: int = 10_000) -> HumpInput:
    """Hump input for a sequence of real functionals, built without countable choice.

    ``alpha_n`` is the first operator whose bound reaches ``4^n``;
    ``candidates(n, alpha_n)`` returns a finite set of near-maximisers, which
    are averaged into ``x_n``.
    """
    alphas = [first_exceeding(fam, n, search_limit) for n in range(1, horizon + 1)]
    xs = [
        average_near_maximizer(candidates(n, a), a, fam)
        for n, a in zip(range(1, horizon + 1), alphas)
    ]
    return HumpInput(fam, horizon, xs, operator_indices=alphas)
