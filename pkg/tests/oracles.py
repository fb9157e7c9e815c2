"""Independent reference implementations used as test oracles."""

import math
from fractions import Fraction


def shell_by_scan(v, lo=-1080, hi=1023):
    """Shell index of ``v`` by scanning ``n`` downward against exact powers of two."""
    for n in range(hi, lo - 1, -1):
        a = math.ldexp(1.0, n)
        b = math.ldexp(1.0, n + 1) if n < 1023 else math.inf
        if (a < v <= b) or (-b <= v < -a):
            return n
    raise ValueError(v)


def dyadic_select_oracle(pairs):
    shells = {}
    for lab, v in pairs:
        if v != 0:
            shells.setdefault(shell_by_scan(v), set()).add(lab)
    return frozenset(shells[max(shells)])


def argmax_oracle(pairs):
    top = max(abs(Fraction(v)) for _, v in pairs)
    return frozenset(lab for lab, v in pairs if abs(Fraction(v)) == top)


def sup_min_distance(prefix, samples):
    return max(min(abs(s - d) for d in prefix) for s in samples)


def bump(s):
    import numpy as np

    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = s < 1
    out[inside] = np.exp(-1.0 / (1.0 - s[inside]))
    return out


def trapezoid_unit_mass(dim, points=400_001):
    """Mass of the unnormalized bump on the unit ball by the trapezoid rule.

    All derivatives vanish at the boundary, so the rule converges faster than
    any power of the spacing.
    """
    import numpy as np

    t = np.linspace(-1.0, 1.0, points) if dim == 1 else np.linspace(0.0, 1.0, points)
    h = t[1] - t[0]
    y = bump(t * t) if dim == 1 else 2 * math.pi * t * bump(t * t)
    return h * (y.sum() - 0.5 * (y[0] + y[-1]))


def trapezoid_rho_power(q, points=400_001):
    """``integral rho_1(y)^q dy`` over [-1, 1] in one dimension."""
    import numpy as np

    z = trapezoid_unit_mass(1)
    t = np.linspace(-1.0, 1.0, points)
    y = (bump(t * t) / z) ** q
    h = t[1] - t[0]
    return h * (y.sum() - 0.5 * (y[0] + y[-1]))
