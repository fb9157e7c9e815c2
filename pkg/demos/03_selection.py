"""
Choosing finite subsets without countable choice
================================================

Each selector reads a finite subset off the data of a single vector, so no
choice is made: the dyadic shell of the largest values, the exact argmax,
or the non-minimal coordinates of a quotient class.
"""

from constructive_fa import (
    DirectSumVec,
    FiniteFn,
    QuotientClass,
    argmax_level_set,
    asymptotic_choice_demo,
    check_cardinality_bound,
    dyadic_select,
    partial_cmc_demo,
    proper_subset_from_class,
    refine_to_singleton,
)

f = FiniteFn.from_dict({"a": 3.0, "b": -3.5, "c": 0.5, "d": 2.2})
# shells are (2^n, 2^(n+1)]: 3, -3.5 share the top shell, 2.2 does too
print("dyadic shell of the top:", sorted(dyadic_select(f)))
print("exact argmax of |f|:    ", sorted(argmax_level_set(f)))

# if sum |f| <= C max |f| the argmax has at most C elements
print(check_cardinality_bound(FiniteFn.from_dict({"x": 1, "y": 1, "z": 0.2}), 2.5))

# a nonzero class modulo constants exposes a proper subset, unchanged by shifts
w = QuotientClass(("p", "q", "r"), [5.0, 1.0, 1.0])
print(sorted(proper_subset_from_class(w)), sorted(proper_subset_from_class(w + QuotientClass(w.base, [7, 7, 7]))))

# repeated descent reaches one element per set
print(refine_to_singleton([("a", "b", "c"), ("d", "e")],
                          lambda T: QuotientClass(T, [0.0] * (len(T) - 1) + [1.0])))

# horizon demos driven by one witness vector in the direct sum
sets = [(n, n + 1, n + 2) for n in range(1, 6)]
wit = DirectSumVec({n: FiniteFn.indicator(sets[n - 1], n + 2) * 2.0**-n for n in range(1, 6)})
rep = partial_cmc_demo(sets, wit)
print({n: sorted(rep.subsets[n]) for n in rep.indices})

sets = [tuple(range(1, 2 * n + 1)) for n in range(1, 9)]
wit = DirectSumVec({n: FiniteFn(sets[n - 1], [1 / n] * n + [0.0] * n) for n in range(1, 9)})
rep = asymptotic_choice_demo(sets, lambda n: n, wit)
print("C =", rep.C, " sizes:", [len(rep.subsets[n]) for n in rep.indices])
