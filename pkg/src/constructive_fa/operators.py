"""Unbounded operator families on l^p sums and their certified norm lower bounds.

Three concrete families act componentwise on a direct sum ``X = (+)^p X_n``:

integration
    ``T_n(x) = 4^n * sum_sigma x_n(sigma)`` with ``X_n = L^1(S_n)`` and scalar output.
scaling
    ``T_n(x) = lambda_n * x_n`` viewed in ``Y_n = L^inf(S_n)``.
quotient
    ``T_k(x) = 4^k * [x_k]`` in ``W_S = U_S / (constants)``, with sup norm on
    ``U_S`` and the induced quotient norm ``(max - min) / 2`` on ``W_S``.

A ``custom`` variant carries its own apply rule and probes so other code can be
exercised against hand-built families.
"""

from __future__ import annotations

import math
from fractions import Fraction
from typing import Hashable, NamedTuple, Sequence

import numpy as np

from .errors import CertificateError, DegenerateClassError, SpaceMismatchError
from .spaces import RTOL, DirectSumVec, FiniteFn, direct_sum_norm, vector_norm

__all__ = [
    "QuotientClass",
    "OperatorFamily",
    "LowerBound",
    "apply_integration_family",
    "apply_scaling_family",
    "apply_quotient_family",
    "norm_lower_bound",
    "integration_family",
    "scaling_family",
    "quotient_family",
    "diagonal_family",
    "custom_family",
    "dipole_probe",
]


class QuotientClass:
    """Element of ``W_S``: a real tuple over ``S`` modulo constant tuples."""

    __slots__ = ("base", "representative")

    def __init__(self, base: Sequence[Hashable], representative):
        base = tuple(base)
        rep = np.array(representative, dtype=float).reshape(-1)
        if len(base) != rep.size:
            raise SpaceMismatchError(
                f"representative has {rep.size} entries for a base set of size {len(base)}"
            )
        if not base:
            raise ValueError("quotient base set must be nonempty")
        rep.flags.writeable = False
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "representative", rep)

    def __setattr__(self, name, value):
        raise AttributeError("QuotientClass is immutable")

    @classmethod
    def zero(cls, base):
        return cls(base, np.zeros(len(tuple(base))))

    def canonical(self):
        """Representative shifted so that its minimum entry is 0."""
        return self.representative - self.representative.min()

    def is_zero(self):
        r = self.representative
        return bool(r.max() == r.min())

    def norm(self):
        """Quotient norm induced by the sup norm: ``inf_t max|x - t| = (max - min)/2``."""
        r = self.representative
        return float(r.max() - r.min()) / 2.0

    def __mul__(self, scalar):
        return QuotientClass(self.base, float(scalar) * self.representative)

    __rmul__ = __mul__

    def __add__(self, other):
        if not isinstance(other, QuotientClass) or other.base != self.base:
            raise SpaceMismatchError("quotient classes over different base sets")
        return QuotientClass(self.base, self.representative + other.representative)

    def __eq__(self, other):
        # exact: representatives must differ by a constant tuple
        if not isinstance(other, QuotientClass) or other.base != self.base:
            return False
        diffs = {
            Fraction(float(a)) - Fraction(float(b))
            for a, b in zip(self.representative, other.representative)
        }
        return len(diffs) == 1

    __hash__ = None

    def __repr__(self):
        return f"QuotientClass({dict(zip(self.base, self.canonical().tolist()))})"


class LowerBound(NamedTuple):
    bound: float
    probe: DirectSumVec
    degenerate: bool = False


def _pow4(n):
    return 4.0**n


def _check_domain(n, comp, spaces):
    if spaces is None or comp is None:
        return
    expected = tuple(spaces(n))
    if isinstance(comp, FiniteFn):
        if comp.domain != expected:
            raise SpaceMismatchError(f"component {n} has domain {comp.domain}, expected {expected}")
    elif len(comp) != len(expected):
        raise SpaceMismatchError(
            f"component {n} has {len(comp)} entries, expected {len(expected)}"
        )


def _rule(spaces):
    """Normalise a per-index rule: callable, mapping, or 1-based sequence."""
    if spaces is None or callable(spaces):
        return spaces
    if isinstance(spaces, dict):
        return lambda n: spaces[n]
    seq = list(spaces)

    def lookup(n):
        if not 1 <= n <= len(seq):
            raise IndexError(f"no entry for index {n} (have 1..{len(seq)})")
        return seq[n - 1]

    return lookup


def apply_integration_family(n: int, v: DirectSumVec, spaces=None) -> float:
    """``4^n * sum_sigma v_n(sigma)``; zero when component ``n`` is absent."""
    comp = v.component(n)
    _check_domain(n, comp, _rule(spaces))
    if comp is None:
        return 0.0
    if isinstance(comp, FiniteFn):
        return _pow4(n) * comp.total()
    return _pow4(n) * math.fsum(comp)


def apply_scaling_family(n: int, lam, v: DirectSumVec, spaces=None) -> FiniteFn:
    """``lambda_n * v_n`` as an element of ``L^inf(S_n)``."""
    lam_n = float(_rule(lam)(n)) if not isinstance(lam, (int, float)) else float(lam)
    if not lam_n > 0:
        raise ValueError(f"scale lambda_{n} must be positive, got {lam_n}")
    rule = _rule(spaces)
    comp = v.component(n)
    _check_domain(n, comp, rule)
    if comp is None:
        if rule is None:
            raise SpaceMismatchError(f"component {n} absent and no space given for S_{n}")
        return FiniteFn.zeros(rule(n))
    if not isinstance(comp, FiniteFn):
        if rule is None:
            raise SpaceMismatchError("tuple components need the label sets")
        comp = FiniteFn(rule(n), comp)
    return lam_n * comp


def apply_quotient_family(k: int, v: DirectSumVec, spaces=None) -> QuotientClass:
    """Class of ``4^k * x_k`` in ``W_{S_k}``."""
    rule = _rule(spaces)
    comp = v.component(k)
    _check_domain(k, comp, rule)
    if comp is None:
        if rule is None:
            raise SpaceMismatchError(f"component {k} absent and no space given for S_{k}")
        return QuotientClass.zero(rule(k))
    if isinstance(comp, FiniteFn):
        return QuotientClass(comp.domain, _pow4(k) * comp.values)
    if rule is None:
        raise SpaceMismatchError("tuple components need the label sets")
    return QuotientClass(rule(k), _pow4(k) * np.asarray(comp))


class OperatorFamily:
    """Indexed family ``(T_n)`` of linear maps on an l^p sum.

    Build instances with :func:`integration_family`, :func:`scaling_family`,
    :func:`quotient_family`, :func:`diagonal_family` or :func:`custom_family`.

    Attributes
    ----------
    variant : str
    spaces : callable n -> labels, or None
    scale : callable n -> float
    p, inner_p : float
        Outer and component exponents of the domain ``X``.
    scalar_output : bool
        True when every ``T_n`` maps into the reals.
    """

    VARIANTS = ("integration", "scaling", "quotient", "custom")

    def __init__(
        self,
        variant,
        spaces=None,
        scale=None,
        p=1,
        inner_p=1,
        apply_rule=None,
        output_norm_rule=None,
        probe_rule=None,
        bound_rule=None,
        scalar_output=False,
        descriptor=None,
    ):
        if variant not in self.VARIANTS:
            raise ValueError(f"unknown variant {variant!r}")
        self.variant = variant
        self.spaces = _rule(spaces)
        self.scale = _rule(scale) if scale is not None else _pow4
        self.p = p
        self.inner_p = inner_p
        self._apply_rule = apply_rule
        self._output_norm_rule = output_norm_rule
        self._probe_rule = probe_rule
        self._bound_rule = bound_rule
        self.scalar_output = scalar_output
        self.descriptor = descriptor or {"variant": variant}

    def __repr__(self):
        return f"OperatorFamily({self.variant!r}, p={self.p:g}, inner_p={self.inner_p:g})"

    def x_norm(self, v: DirectSumVec) -> float:
        """Norm of ``v`` in this family's domain ``X``."""
        return direct_sum_norm(v, p=self.p, inner_p=self.inner_p)

    def apply(self, n, v):
        if self.variant == "integration":
            return apply_integration_family(n, v, self.spaces)
        if self.variant == "scaling":
            return apply_scaling_family(n, self.scale, v, self.spaces)
        if self.variant == "quotient":
            return apply_quotient_family(n, v, self.spaces)
        return self._apply_rule(n, v)

    def output_norm(self, n, out) -> float:
        if self._output_norm_rule is not None:
            return float(self._output_norm_rule(n, out))
        if isinstance(out, QuotientClass):
            return out.norm()
        if isinstance(out, FiniteFn):
            return out.max_abs()
        if np.ndim(out) == 0:
            return abs(float(out))
        return vector_norm(out, 1)

    def image_norm(self, n, v) -> float:
        """``||T_n(v)||_Y``."""
        return self.output_norm(n, self.apply(n, v))

    def default_probe(self, n):
        """The unit probe concentrated on one label of ``S_n``: returns (probe, bound, degenerate)."""
        if self.variant == "custom":
            probe = self._probe_rule(n)
            bound = None if self._bound_rule is None else float(self._bound_rule(n))
            return probe, bound, False
        labels = tuple(self.spaces(n))
        if self.variant == "quotient":
            e = np.zeros(len(labels))
            e[0] = 1.0
            probe = DirectSumVec.single(n, e, p=self.p, inner_p=self.inner_p)
            if len(labels) == 1:
                return probe, 0.0, True
            return probe, _pow4(n) * 0.5, False
        probe = DirectSumVec.single(
            n, FiniteFn.indicator(labels, labels[0]), p=self.p, inner_p=self.inner_p
        )
        return probe, float(self.scale(n)), False


def dipole_probe(fam: OperatorFamily, n: int) -> DirectSumVec:
    """``1_{a} - 1_{b}`` on the first two labels: sup norm 1, quotient norm 1."""
    labels = tuple(fam.spaces(n))
    if len(labels) < 2:
        raise DegenerateClassError(f"S_{n} has a single element; W_S is trivial")
    e = np.zeros(len(labels))
    e[0], e[1] = 1.0, -1.0
    return DirectSumVec.single(n, e, p=fam.p, inner_p=fam.inner_p)


def norm_lower_bound(fam: OperatorFamily, n: int, probe=None) -> LowerBound:
    """Certified lower bound on ``||T_n||_op`` together with its witness.

    With ``probe=None`` the family's default unit probe is used.  An explicit
    probe (or the string ``"dipole"`` for quotient families) yields the bound
    ``||T_n(u)|| / ||u||``.  Either way the inequality is re-evaluated, never
    assumed.
    """
    if n < 1:
        raise ValueError("operator indices start at 1")
    degenerate = False
    if probe is None:
        probe, bound, degenerate = fam.default_probe(n)
    else:
        if isinstance(probe, str):
            if probe != "dipole":
                raise ValueError(f"unknown probe recipe {probe!r}")
            probe = dipole_probe(fam, n)
        bound = None
    u_norm = fam.x_norm(probe)
    image = fam.image_norm(n, probe)
    if bound is None:
        if u_norm == 0:
            raise CertificateError("probe vector is zero", n=n)
        bound = image / u_norm
    if u_norm > 1 + RTOL:
        raise CertificateError(f"probe for n={n} has norm {u_norm} > 1", n=n)
    if image < bound * (1 - RTOL):
        raise CertificateError(
            f"probe for n={n} gives ||T_n(u)|| = {image} below claimed bound {bound}", n=n
        )
    return LowerBound(float(bound), probe, degenerate)


# ---------------------------------------------------------------------------
# constructors
# ---------------------------------------------------------------------------


def integration_family(spaces, p=1) -> OperatorFamily:
    """``T_n(x) = 4^n * integral of x_n`` on ``(+)^p L^1(S_n)``."""
    return OperatorFamily(
        "integration",
        spaces=spaces,
        p=p,
        inner_p=1,
        scalar_output=True,
        descriptor={"variant": "integration", "scale": "4^n", "p": p},
    )


def scaling_family(spaces, lam, p=math.inf) -> OperatorFamily:
    """``T_n(x) = lambda_n * x_n`` from ``(+)^inf L^1(S_n)`` into ``L^inf(S_n)``."""
    return OperatorFamily(
        "scaling",
        spaces=spaces,
        scale=lam,
        p=p,
        inner_p=1,
        descriptor={"variant": "scaling", "scale": "lambda", "p": p},
    )


def quotient_family(spaces, p=1) -> OperatorFamily:
    """``T_k(x) = 4^k [x_k]`` from ``(+)^p U_{S_k}`` (sup norm) to ``W_{S_k}``."""
    return OperatorFamily(
        "quotient",
        spaces=spaces,
        p=p,
        inner_p=math.inf,
        descriptor={"variant": "quotient", "scale": "4^n", "p": p},
    )


def custom_family(apply_rule, probe_rule, bound_rule=None, output_norm_rule=None,
                  p=1, inner_p=1, scalar_output=False, spaces=None, descriptor=None):
    """Family defined by explicit rules.

    ``apply_rule(n, v)`` returns ``T_n(v)``; ``probe_rule(n)`` returns a
    ``DirectSumVec`` of norm at most one.  ``bound_rule(n)``, if given, is the
    claimed lower bound and gets verified against the probe.
    """
    return OperatorFamily(
        "custom",
        spaces=spaces,
        p=p,
        inner_p=inner_p,
        apply_rule=apply_rule,
        output_norm_rule=output_norm_rule,
        probe_rule=probe_rule,
        bound_rule=bound_rule,
        scalar_output=scalar_output,
        descriptor=descriptor or {"variant": "custom"},
    )


def diagonal_family(weights=None, p=1) -> OperatorFamily:
    """``T_n(v) = w_n * v_n`` on the l^p sum of real lines (default ``w_n = 4^n``)."""
    w = _rule(weights) if weights is not None else _pow4

    def apply_rule(n, v):
        c = v.component(n)
        return 0.0 if c is None else float(w(n)) * float(np.asarray(c).reshape(-1)[0])

    def probe_rule(n):
        return DirectSumVec.single(n, [1.0], p=p)

    return custom_family(
        apply_rule,
        probe_rule,
        bound_rule=lambda n: abs(float(w(n))),
        p=p,
        scalar_output=True,
        descriptor={"variant": "diagonal", "scale": "4^n" if weights is None else "weights", "p": p},
    )
