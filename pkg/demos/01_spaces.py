"""
Finite function spaces and their direct sums
============================================

Counting-measure L^p norms on finite label sets, grid functions on boxes,
and l^p direct sums whose components are either.
"""

import math

import numpy as np

from constructive_fa import DirectSumVec, FiniteFn, GridFunction, grid_lp_norm, holder_conjugate

# a function on {a, b, c}; with counting measure the L^1 norm is the sum of |f|
f = FiniteFn.from_dict({"a": 3.0, "b": -1.0, "c": 0.5})
print("||f||_1 =", f.norm(1), " ||f||_2 =", f.norm(2), " ||f||_inf =", f.norm(math.inf))

# arithmetic needs matching domains
g = FiniteFn.indicator(("a", "b", "c"), "b")
print("f + 2g =", f + g * 2.0)

# Hoelder conjugates, including the endpoints
for p in (1, 1.5, 2, math.inf):
    print(f"p = {p}: p' = {holder_conjugate(p)}")

# grid functions carry their own spacing; norms use the midpoint rule
s = GridFunction.sample(np.sin, [0], [math.pi], [1000])
print("integral of |sin| on [0, pi] ~", grid_lp_norm(s, 1))

# l^1 sum of components: components may be finite functions or plain vectors
v = DirectSumVec({1: f, 3: [0.0, 2.0]}, p=1)
w = DirectSumVec.single(2, [4.0], p=1)
print("||v|| =", v.norm(), " ||v + w|| =", (v + w).norm())
print("the same vector in the l^inf sum:", v.with_norm(p=math.inf).norm())
