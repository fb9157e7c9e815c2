import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from constructive_fa.errors import (
    DegenerateClassError,
    EmptySelectionError,
    OracleViolationError,
)
from constructive_fa.operators import QuotientClass
from constructive_fa.selection import (
    argmax_level_set,
    asymptotic_choice_demo,
    check_cardinality_bound,
    descent_path,
    dyadic_select,
    dyadic_shell,
    partial_cmc_demo,
    proper_subset_from_class,
    refine_to_singleton,
)
from constructive_fa.spaces import DirectSumVec, FiniteFn

from oracles import argmax_oracle, dyadic_select_oracle, shell_by_scan

# --- dyadic shells ------------------------------------------------------------


@pytest.mark.parametrize(
    "v, n",
    [(1.0, -1), (1.5, 0), (2.0, 0), (2.0000000000000004, 1), (3.0, 1), (-3.0, 1), (-2.0, 0),
     (-4.0, 1), (0.5, -2), (1024.0, 9), (5e-324, -1075)],
)
def test_shell_boundaries(v, n):
    assert dyadic_shell(v) == n
    assert shell_by_scan(v) == n


def test_dyadic_select_examples():
    assert dyadic_select(FiniteFn.from_dict({"a": 1})) == {"a"}
    assert dyadic_select(FiniteFn.from_dict({"a": 3, "b": -3, "c": 0.5})) == {"a", "b"}
    assert dyadic_select(FiniteFn.from_dict({"a": 1, "b": 1.5, "c": 0})) == {"b"}
    with pytest.raises(EmptySelectionError):
        dyadic_select(FiniteFn.zeros(["a", "b"]))


values = st.one_of(
    st.floats(min_value=-1024, max_value=1024, allow_nan=False),
    st.integers(-10, 10).map(lambda k: math.copysign(math.ldexp(1.0, k), k or 1)),
)


@given(st.lists(values, min_size=1, max_size=20))
def test_dyadic_select_matches_scan(vals):
    f = FiniteFn(range(len(vals)), vals)
    if f.is_zero():
        return
    assert dyadic_select(f) == dyadic_select_oracle(f.pairs())


@given(st.lists(values, min_size=1, max_size=20), st.integers(-20, 20))
def test_dyadic_select_scale_covariance(vals, k):
    f = FiniteFn(range(len(vals)), vals)
    if f.is_zero() or any(v != 0 and abs(v) < 1e-290 for v in vals):
        return
    assert dyadic_select(f * math.ldexp(1.0, k)) == dyadic_select(f)


# --- argmax and cardinality ---------------------------------------------------


def test_argmax_examples():
    assert argmax_level_set(FiniteFn.from_dict({"a": 2, "b": -2, "c": 1})) == {"a", "b"}
    assert argmax_level_set(FiniteFn.indicator("xyz", "y")) == {"y"}
    assert argmax_level_set(FiniteFn.from_dict({"a": 1 - 1e-12, "b": 1})) == {"b"}
    with pytest.raises(EmptySelectionError):
        argmax_level_set(FiniteFn.zeros("ab"))


@given(st.lists(values, min_size=1, max_size=20))
def test_argmax_matches_exact_oracle(vals):
    f = FiniteFn(range(len(vals)), vals)
    if not f.is_zero():
        assert argmax_level_set(f) == argmax_oracle(f.pairs())


def test_cardinality_examples():
    v = check_cardinality_bound(FiniteFn.from_dict({"a": 2, "b": 2, "c": 1}), 2.5)
    assert v.applies and v.card_ok and v.cardinality == 2
    v = check_cardinality_bound(FiniteFn.indicator("abcd", "c"), 1)
    assert v.applies and v.card_ok
    v = check_cardinality_bound(FiniteFn.from_dict({"a": 1, "b": 1, "c": 1}), 2)
    assert not v.applies


@given(st.lists(st.integers(-4, 4), min_size=1, max_size=12), st.floats(0.5, 12))
def test_cardinality_lemma(vals, C):
    f = FiniteFn(range(len(vals)), [float(v) for v in vals])
    if f.is_zero():
        return
    v = check_cardinality_bound(f, C)
    if v.applies:
        assert v.card_ok


# --- quotient classes ---------------------------------------------------------


def test_proper_subset_examples():
    S = ("a", "b", "c")
    assert proper_subset_from_class(QuotientClass(S, [1, 1, 2])) == {"c"}
    assert proper_subset_from_class(QuotientClass(S, [6, 6, 7])) == {"c"}
    assert proper_subset_from_class(QuotientClass(S, [0, 3, 3])) == {"b", "c"}
    with pytest.raises(DegenerateClassError):
        proper_subset_from_class(QuotientClass(S, [2, 2, 2]))


@given(st.lists(st.integers(-50, 50), min_size=2, max_size=8), st.integers(-1000, 1000))
def test_proper_subset_invariance(xs, t):
    S = tuple(range(len(xs)))
    w = QuotientClass(S, [float(x) for x in xs])
    if w.is_zero():
        return
    sub = proper_subset_from_class(w)
    assert sub == proper_subset_from_class(QuotientClass(S, [float(x + t) for x in xs]))
    assert 0 < len(sub) < len(S)


def last_is_high(T):
    return QuotientClass(T, [0.0] * (len(T) - 1) + [1.0])


def test_refine_examples():
    assert refine_to_singleton([["a"], ["b"]], last_is_high) == ["a", "b"]
    path = descent_path(("a", "b", "c"), last_is_high)
    assert path == [("a", "b", "c"), ("c",)]


def test_refine_random_oracles_bounded_descent(rng):
    for _ in range(300):
        k = int(rng.integers(1, 5))
        S = tuple(f"s{i}" for i in range(k))

        def oracle(T):
            while True:
                x = rng.integers(0, 3, len(T)).astype(float)
                if x.max() != x.min():
                    return QuotientClass(T, x)

        path = descent_path(S, oracle, bound=4)
        assert len(path) - 1 <= k - 1
        assert all(len(b) < len(a) for a, b in zip(path, path[1:]))


def test_refine_oracle_violations():
    with pytest.raises(OracleViolationError):
        descent_path(("a", "b"), lambda T: QuotientClass(T, [1.0, 1.0]))
    with pytest.raises(OracleViolationError):
        descent_path(("a", "b"), lambda T: QuotientClass(("x", "y"), [0.0, 1.0]))


# --- demos ----------------------------------------------------------------------


def test_partial_cmc_examples():
    sets = [(n, n + 1, n + 2) for n in range(1, 7)]
    w = DirectSumVec({n: FiniteFn.indicator(sets[n - 1], n) * 3.0**-n for n in range(1, 7)})
    rep = partial_cmc_demo(sets, w)
    assert rep.indices == tuple(range(1, 7))
    assert all(rep.subsets[n] == {n} for n in rep.indices)

    zero = DirectSumVec({n: FiniteFn.zeros(sets[n - 1]) for n in range(1, 7)})
    with pytest.raises(EmptySelectionError):
        partial_cmc_demo(sets, zero)

    even = DirectSumVec({n: FiniteFn.indicator(sets[n - 1], n + 1) if n % 2 == 0
                         else FiniteFn.zeros(sets[n - 1]) for n in range(1, 7)})
    rep = partial_cmc_demo(sets, even)
    assert rep.indices == (2, 4, 6) and rep.skipped == (1, 3, 5)


def test_asymptotic_examples():
    N = 12
    sets = [tuple(range(1, 2 * n + 1)) for n in range(1, N + 1)]
    w = DirectSumVec({n: FiniteFn(sets[n - 1], [1 / n] * n + [0.0] * n) for n in range(1, N + 1)})
    rep = asymptotic_choice_demo(sets, lambda n: n, w)
    assert rep.C == pytest.approx(1.0)
    assert rep.indices == tuple(range(1, N + 1))
    assert all(rep.subsets[n] == set(range(1, n + 1)) for n in rep.indices)

    ind = DirectSumVec({n: FiniteFn.indicator(sets[n - 1], n) for n in range(1, N + 1)})
    rep = asymptotic_choice_demo(sets, lambda n: n, ind)
    assert all(len(rep.subsets[n]) == 1 for n in rep.indices)

    half = DirectSumVec({n: FiniteFn.indicator(sets[n - 1], 1) * 0.5 for n in range(1, N + 1)})
    with pytest.raises(EmptySelectionError):
        asymptotic_choice_demo(sets, lambda n: 1.0, half)


def test_asymptotic_bound_holds_on_random_witnesses(rng):
    # qualification gives C lambda >= #M max|w| lambda >= #M, so no report may violate it
    for _ in range(200):
        N = int(rng.integers(1, 8))
        sets = [tuple(range(int(rng.integers(1, 7)))) for _ in range(N)]
        w = DirectSumVec({n: FiniteFn(sets[n - 1], rng.integers(-3, 4, len(sets[n - 1])) / 2.0)
                          for n in range(1, N + 1)})
        lam = [float(rng.choice([0.5, 1, 2, 4])) for _ in range(N)]
        try:
            rep = asymptotic_choice_demo(sets, lambda n: lam[n - 1], w)
        except EmptySelectionError:
            continue
        for n in rep.indices:
            assert len(rep.subsets[n]) <= rep.C * rep.lam[n]


def test_reports_stay_inside_sets():
    sets = [("p", "q"), ("r", "s", "t")]
    w = DirectSumVec({1: FiniteFn(sets[0], [0.1, -0.3]), 2: FiniteFn(sets[1], [5.0, 4.5, -6.0])})
    rep = partial_cmc_demo(sets, w)
    for n in rep.indices:
        assert rep.subsets[n] and rep.subsets[n] <= set(sets[n - 1])
