"""Selectors turning nonzero analytic witnesses into finite subsets.

* :func:`dyadic_select` -- the labels whose values fall in the highest
  occupied dyadic shell ``[-2^{n+1}, -2^n) u (2^n, 2^{n+1}]``.
* :func:`argmax_level_set` -- labels attaining ``max |f|``; if
  ``sum |f| <= C max |f|`` there are at most ``C`` of them.
* :func:`proper_subset_from_class` -- the non-minimal coordinates of a
  nonzero class in ``U_S / constants``, a nonempty proper subset of ``S``.

The ``*_demo`` functions run these selectors over a horizon of sets and
report which indices qualified.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Hashable, Mapping, Sequence

import numpy as np

from .errors import (
    CertificateError,
    DegenerateClassError,
    EmptySelectionError,
    OracleViolationError,
    SpaceMismatchError,
)
from .operators import QuotientClass
from .spaces import RTOL, DirectSumVec, FiniteFn

__all__ = [
    "SelectionReport",
    "dyadic_shell",
    "dyadic_select",
    "argmax_level_set",
    "CardinalityVerdict",
    "check_cardinality_bound",
    "proper_subset_from_class",
    "partial_cmc_demo",
    "asymptotic_choice_demo",
    "descent_path",
    "refine_to_singleton",
    "label_sort_key",
]


def label_sort_key(label):
    """Total order on mixed int/str labels: numbers first, then by text."""
    if isinstance(label, (int, float)) and not isinstance(label, bool):
        return (0, label, "")
    return (1, 0, str(label))


@dataclass(frozen=True)
class SelectionReport:
    """Outcome of a selection demo.

    ``indices`` are the qualifying ``n``; ``subsets[n]`` is ``M_n``.  For the
    asymptotic demo ``C`` and ``lam`` record the constant and the scale table
    with ``#M_n <= C * lam[n]``.
    """

    indices: tuple
    subsets: Mapping[int, frozenset]
    C: float | None = None
    lam: Mapping[int, float] | None = None
    kind: str = "finite"
    skipped: tuple = field(default=())

    def sorted_subset(self, n):
        return sorted(self.subsets[n], key=label_sort_key)


# ---------------------------------------------------------------------------
# dyadic shells
# ---------------------------------------------------------------------------


def dyadic_shell(value: float) -> int:
    """Index ``n`` with ``|value|`` in ``(2^n, 2^{n+1}]``.

    The negative shell ``[-2^{n+1}, -2^n)`` is the mirror image, so one
    index covers both signs.  Computed exactly from the binary exponent.
    """
    if value == 0 or not math.isfinite(value):
        raise ValueError("dyadic shells partition the finite nonzero reals")
    mant, exp = math.frexp(abs(value))  # |value| = mant * 2^exp, mant in [1/2, 1)
    if mant == 0.5:  # exact power of two 2^(exp-1) closes the shell below it
        return exp - 2
    return exp - 1


def dyadic_select(f: FiniteFn) -> frozenset:
    """Preimage of the highest dyadic shell met by the values of ``f``.

    Only a nonzero value is needed (a nonzero integral implies one).
    """
    shells = {}
    for lab, v in f.pairs():
        if v != 0:
            shells.setdefault(dyadic_shell(v), []).append(lab)
    if not shells:
        raise EmptySelectionError("dyadic_select needs a nonzero value")
    return frozenset(shells[max(shells)])


# ---------------------------------------------------------------------------
# argmax and the cardinality lemma
# ---------------------------------------------------------------------------


def argmax_level_set(f: FiniteFn) -> frozenset:
    """Labels where ``|f|`` equals its maximum (exact float equality)."""
    a = np.abs(f.values)
    top = a.max()
    if top == 0:
        raise EmptySelectionError("argmax level set of the zero function is not a selection")
    return frozenset(lab for lab, v in zip(f.domain, a) if v == top)


@dataclass(frozen=True)
class CardinalityVerdict:
    applies: bool
    card_ok: bool
    cardinality: int


def check_cardinality_bound(f: FiniteFn, C: float) -> CardinalityVerdict:
    """Evaluate the hypothesis ``sum|f| <= C max|f|`` and the conclusion ``#argmax <= C``.

    Both comparisons are done in exact rational arithmetic on the stored
    floats, so the implication can be tested with zero tolerance.
    """
    if not C > 0:
        raise ValueError("C must be positive")
    level = argmax_level_set(f)
    a = [Fraction(abs(float(v))) for v in f.values]
    top = max(a)
    c = Fraction(float(C))
    applies = sum(a) <= c * top
    return CardinalityVerdict(applies, len(level) <= c, len(level))


# ---------------------------------------------------------------------------
# quotient classes
# ---------------------------------------------------------------------------


def proper_subset_from_class(w: QuotientClass) -> frozenset:
    """``{sigma : x_sigma != min x}`` for any representative ``x`` of ``w``."""
    if w.is_zero():
        raise DegenerateClassError("the zero class exposes no proper subset")
    x = w.representative
    lo = x.min()
    return frozenset(lab for lab, v in zip(w.base, x) if v != lo)


def descent_path(labels: Sequence[Hashable], oracle: Callable, bound: int | None = None):
    """Chain ``S = T_0 > T_1 > ... > {sigma}`` produced by repeated class selection.

    ``oracle(T)`` must return a nonzero :class:`QuotientClass` over ``T`` for
    every presented ``T`` with at least two elements.
    """
    current = tuple(labels)
    if not current:
        raise EmptySelectionError("cannot refine an empty set")
    if bound is not None and len(current) > bound:
        raise ValueError(f"set of size {len(current)} exceeds the cardinality bound {bound}")
    path = [current]
    while len(current) > 1:
        w = oracle(current)
        if not isinstance(w, QuotientClass) or w.base != current:
            raise OracleViolationError(f"oracle returned a class over the wrong set for {current}")
        if w.is_zero():
            raise OracleViolationError(f"oracle returned the zero class on {current}")
        keep = proper_subset_from_class(w)
        nxt = tuple(lab for lab in current if lab in keep)
        if not 0 < len(nxt) < len(current):
            raise OracleViolationError("selection failed to descend strictly")
        current = nxt
        path.append(current)
    return path


def refine_to_singleton(sets: Sequence[Sequence[Hashable]], oracle: Callable,
                        bound: int | None = None) -> list:
    """One label per set, reached by at most ``#S - 1`` strict descents."""
    return [descent_path(s, oracle, bound)[-1][0] for s in sets]


# ---------------------------------------------------------------------------
# horizon demos
# ---------------------------------------------------------------------------


def _labels_of(sets, n):
    if isinstance(sets, Mapping):
        return tuple(sets[n])
    if callable(sets):
        return tuple(sets(n))
    return tuple(sets[n - 1])


def _horizon(sets, witness):
    if isinstance(sets, Sequence):
        return len(sets)
    return max(witness.support, default=0)


def _check_subset(n, fn: FiniteFn, labels):
    if set(fn.domain) != set(labels):
        raise SpaceMismatchError(f"witness component {n} is not a function on S_{n}")


def partial_cmc_demo(sets, witness: DirectSumVec) -> SelectionReport:
    """Finite nonempty ``M_n`` for every ``n`` where the witness has nonzero integral."""
    indices, subsets, skipped = [], {}, []
    for n in range(1, _horizon(sets, witness) + 1):
        comp = witness.component(n)
        if comp is None or comp.total() == 0:
            skipped.append(n)
            continue
        _check_subset(n, comp, _labels_of(sets, n))
        indices.append(n)
        subsets[n] = dyadic_select(comp)
    if not indices:
        raise EmptySelectionError("witness has zero integral on every component")
    return SelectionReport(tuple(indices), subsets, kind="finite", skipped=tuple(skipped))


def asymptotic_choice_demo(sets, lam, witness: DirectSumVec) -> SelectionReport:
    """Argmax level sets ``M_n`` with ``#M_n <= C lambda_n`` on the qualifying indices.

    ``C`` is the sup of the witness component L^1 norms; ``n`` qualifies when
    ``lambda_n max|w_n| >= 1`` (relative tolerance ``RTOL``).
    """
    lam_rule = lam if callable(lam) else (lambda n: lam[n] if isinstance(lam, Mapping) else lam[n - 1])
    horizon = _horizon(sets, witness)
    C = max((c.norm(1) for c in witness.components.values()), default=0.0)
    indices, subsets, skipped, table = [], {}, [], {}
    for n in range(1, horizon + 1):
        lam_n = float(lam_rule(n))
        if not lam_n > 0:
            raise ValueError(f"lambda_{n} must be positive")
        table[n] = lam_n
        comp = witness.component(n)
        if comp is None or comp.is_zero() or lam_n * comp.max_abs() < 1 - RTOL:
            skipped.append(n)
            continue
        _check_subset(n, comp, _labels_of(sets, n))
        level = argmax_level_set(comp)
        if len(level) > C * lam_n * (1 + RTOL):
            raise CertificateError(
                f"#M_{n} = {len(level)} exceeds C * lambda_n = {C * lam_n}", n=n
            )
        indices.append(n)
        subsets[n] = level
    if not indices:
        raise EmptySelectionError("no index satisfies lambda_n * max|w_n| >= 1")
    return SelectionReport(tuple(indices), subsets, C=C, lam=table, kind="asymptotic",
                           skipped=tuple(skipped))
