import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from constructive_fa.errors import CertificateError, EmptySelectionError, PreconditionError
from constructive_fa.hump import (
    HumpInput,
    average_near_maximizer,
    divergence_certificate,
    first_exceeding,
    hump_limit,
    hump_sequence,
    hump_step,
    verify_trace,
    weak_ubp_input,
)
from constructive_fa.operators import (
    custom_family,
    diagonal_family,
    dipole_probe,
    integration_family,
    quotient_family,
    scaling_family,
)
from constructive_fa.spaces import DirectSumVec, FiniteFn


def e(n, scale=1.0):
    return DirectSumVec.single(n, [scale])


def diag_input(horizon, xs=None):
    fam = diagonal_family()
    xs = xs or [e(n) for n in range(1, horizon + 1)]
    return HumpInput(fam, horizon, xs)


def coupled_family(weights, coupling):
    """Scalar T_n(v) = w_n v_n + c_n v_1: diagonal plus a leak from the first coordinate."""

    def coord(v, k):
        c = v.component(k)
        return 0.0 if c is None else float(np.asarray(c)[0])

    def apply(n, v):
        return weights[n] * coord(v, n) + (coupling.get(n, 0.0) * coord(v, 1) if n > 1 else 0.0)

    return custom_family(apply, lambda n: e(n), bound_rule=lambda n: weights[n], scalar_output=True)


# --- hump_step --------------------------------------------------------------


def test_step_diagonal_example():
    inp = diag_input(2)
    point, sign = hump_step(1, e(1), inp)
    assert sign == 1
    assert point == e(1) + e(2, 1 / 9)
    assert inp.image_norm(2, point) == pytest.approx(16 / 9)
    assert 16 / 9 > 32 / 27


def test_step_tie_takes_minus_branch():
    # threshold 3^-2 (2/3) 432 = 32 and ||T_2(e1 + e2/9)|| = 48 - 16 = 32 exactly
    fam = coupled_family({1: 4.0, 2: 432.0}, {2: -16.0})
    inp = HumpInput(fam, 2, [e(1), e(2)])
    plus = e(1) + e(2, 3.0**-2)
    assert inp.image_norm(2, plus) == 3.0**-2 * (2 / 3) * 432.0 == 32.0
    point, sign = hump_step(1, e(1), inp)
    assert sign == -1
    assert point == e(1) - e(2, 3.0**-2)


def test_step_negated_hump_on_diagonal_keeps_plus():
    # both candidates clear the threshold, so the plus branch is taken either way
    inp = diag_input(2, [e(1), e(2, -1.0)])
    point, sign = hump_step(1, e(1), inp)
    assert sign == 1
    assert point == e(1) - e(2, 1 / 9)
    assert inp.image_norm(2, point) >= 3.0**-2 * (2 / 3) * 16


def test_step_sign_flip_equivariance():
    # only one candidate qualifies, so negating x_2 must flip the sign
    fam = coupled_family({1: 4.0, 2: 16.0}, {2: -1.0})
    a = HumpInput(fam, 2, [e(1), e(2)])
    b = HumpInput(fam, 2, [e(1), e(2, -1.0)])
    pa, sa = hump_step(1, e(1), a)
    pb, sb = hump_step(1, e(1), b)
    assert (sa, sb) == (-1, 1)
    assert pa == pb
    assert a.image_norm(2, pa) == b.image_norm(2, pb)


def test_step_outside_horizon():
    inp = diag_input(2)
    with pytest.raises(ValueError):
        hump_step(2, e(1), inp)


# --- hump_sequence / limit ------------------------------------------------


def test_sequence_diagonal_closed_form():
    tr = hump_sequence(diag_input(3))
    assert tr.signs == (1, 1)
    assert tr.y(3) == e(1) + e(2, 3.0**-2) + e(3, 3.0**-3)
    assert tr.lower_bounds[1] == pytest.approx(9.0**-1 * (2 / 3) * 16)


def test_sequence_single_step():
    tr = hump_sequence(diag_input(1))
    assert tr.iterates == (e(1),) and tr.signs == ()
    y, err = hump_limit(tr)
    assert y == e(1) and err == pytest.approx(1 / 6)


def test_cauchy_tail_diagonal():
    inp = diag_input(10)
    tr = hump_sequence(inp)
    d = inp.family.x_norm(tr.y(4) - tr.y(9))
    assert d == pytest.approx(math.fsum(3.0**-j for j in range(5, 10)), rel=1e-12)
    assert d <= 3.0**-4 / 2
    assert hump_limit(tr)[1] == pytest.approx(8.4675e-6, rel=1e-4)
    verify_trace(tr, inp)


def test_extension_reproduces_prefix_and_moves_little():
    short = hump_sequence(diag_input(6))
    long = hump_sequence(diag_input(9))
    for n in range(1, 7):
        assert short.y(n) == long.y(n)
    assert diagonal_family().x_norm(long.y(7) - short.y(6)) <= 3.0**-7 * (1 + 1e-12)


# --- certificate ------------------------------------------------------------


def test_certificate_diagonal_rows():
    inp = diag_input(8)
    rows = divergence_certificate(hump_sequence(inp), inp)
    assert rows[0].required == pytest.approx(2 / 9)
    r5 = rows[4]
    assert r5.observed == pytest.approx((4 / 3) ** 5, rel=1e-3)
    assert r5.required == pytest.approx((4 / 3) ** 5 / 6)
    assert all(r.passed for r in rows)


def test_certificate_integration_family():
    sp = lambda n: (1, 2, 3)  # noqa: E731
    fam = integration_family(sp)
    xs = [DirectSumVec.single(n, FiniteFn.indicator((1, 2, 3), 1)) for n in range(1, 9)]
    inp = HumpInput(fam, 8, xs)
    tr = hump_sequence(inp)
    rows = divergence_certificate(tr, inp)
    for r in rows:
        # coordinates never interact: T_n(y) = 4^n 3^-n, except y_1 = x_1 is unscaled
        expected = 4.0 if r.n == 1 else (4 / 3) ** r.n
        assert r.observed == pytest.approx(expected, rel=1e-12)
        assert r.passed


def test_certificate_failure_is_reported():
    inp = diag_input(3)
    tr = hump_sequence(inp)
    # corrupt the limit: drop the last hump
    bad = type(tr)(tr.iterates[:-1] + (tr.iterates[0],), tr.signs, tr.lower_bounds,
                   tr.observed, tr.truncation_error)
    with pytest.raises(CertificateError) as exc:
        divergence_certificate(bad, inp)
    assert exc.value.n == 2
    rows = divergence_certificate(bad, inp, raise_on_fail=False)
    assert [r.passed for r in rows] == [True, False, False]


# --- input validation -------------------------------------------------------


def test_input_rejects_small_bound():
    fam = diagonal_family(weights=lambda n: 2.0**n)
    with pytest.raises(CertificateError) as exc:
        HumpInput(fam, 3, [e(n) for n in range(1, 4)])
    assert exc.value.n == 1


def test_input_rejects_long_maximizer():
    with pytest.raises(CertificateError):
        HumpInput(diagonal_family(), 2, [e(1), e(2, 1.5)])


def test_input_rejects_weak_maximizer():
    with pytest.raises(CertificateError):
        HumpInput(diagonal_family(), 2, [e(1), e(2, 0.5)])


# --- randomized property ----------------------------------------------------


def _random_input(kind, horizon, seed):
    rng = np.random.default_rng(seed)
    if kind == "integration":
        sizes = rng.integers(1, 5, horizon)
        spaces = [tuple(range(int(k))) for k in sizes]
        fam = integration_family(spaces, p=float(rng.choice([1, 2, math.inf])))
        xs = []
        for n in range(1, horizon + 1):
            labels = spaces[n - 1]
            xs.append(DirectSumVec.single(n, FiniteFn.indicator(labels, labels[int(rng.integers(len(labels)))]),
                                          p=fam.p))
        return HumpInput(fam, horizon, xs)
    if kind == "scaling":
        spaces = [tuple(range(int(k))) for k in rng.integers(1, 5, horizon)]
        lam = [4.0**n * float(rng.uniform(1, 3)) for n in range(1, horizon + 1)]
        fam = scaling_family(spaces, lam)
        xs = [DirectSumVec.single(n, FiniteFn.indicator(spaces[n - 1], spaces[n - 1][-1]), p=fam.p)
              for n in range(1, horizon + 1)]
        return HumpInput(fam, horizon, xs)
    if kind == "quotient":
        spaces = [tuple(range(int(k))) for k in rng.integers(2, 6, horizon)]
        fam = quotient_family(spaces)
        xs = [dipole_probe(fam, n) for n in range(1, horizon + 1)]
        return HumpInput(fam, horizon, xs, bound_probes=xs)
    w = [4.0**n * float(rng.uniform(1, 2)) for n in range(1, horizon + 1)]
    fam = diagonal_family(w)
    xs = [e(n, float(rng.choice([-1, 1]) * rng.uniform(0.8, 1.0))) for n in range(1, horizon + 1)]
    return HumpInput(fam, horizon, xs)


@given(
    st.sampled_from(["integration", "scaling", "quotient", "diagonal"]),
    st.integers(1, 12),
    st.integers(0, 2**32 - 1),
)
def test_random_inputs_certify(kind, horizon, seed):
    inp = _random_input(kind, horizon, seed)
    tr = hump_sequence(inp)
    verify_trace(tr, inp)
    rows = divergence_certificate(tr, inp)
    assert all(r.passed for r in rows)
    for n in range(1, horizon + 1):
        assert tr.observed[n - 1] >= tr.lower_bounds[n - 1] * (1 - 1e-9)


# --- averaged near-maximisers ---------------------------------------------


def test_average_examples():
    fam = diagonal_family(weights=lambda n: 1.0)
    x = e(1, 0.9)
    assert average_near_maximizer([x], 1, fam) == x
    mean = average_near_maximizer([e(1, 0.9), e(1, 0.8)], 1, fam)
    assert float(mean.component(1)[0]) == pytest.approx(0.85, abs=1e-15)
    assert 0.85 > 2 / 3
    assert average_near_maximizer([x] * 7, 1, fam) == x


def test_average_errors():
    fam = diagonal_family(weights=lambda n: 1.0)
    with pytest.raises(EmptySelectionError):
        average_near_maximizer([], 1, fam)
    with pytest.raises(PreconditionError):
        average_near_maximizer([e(1, 0.9), e(1, -0.9)], 1, fam)
    with pytest.raises(PreconditionError):
        average_near_maximizer([e(1)], 1, quotient_family(lambda k: (0, 1)))


def test_weak_ubp_picks_first_large_operator():
    fam = diagonal_family(weights=lambda n: 2.0**n)
    assert first_exceeding(fam, 3) == 6
    inp = weak_ubp_input(fam, 5, lambda n, a: [e(a), e(a, 0.75)])
    assert inp.operator_indices == (2, 4, 6, 8, 10)
    tr = hump_sequence(inp)
    assert all(r.passed for r in divergence_certificate(tr, inp))
