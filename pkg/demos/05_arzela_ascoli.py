"""
Arzela-Ascoli: a certified Cauchy subsequence
=============================================

An equicontinuous, bounded family on a compact box has a subsequence that is
Cauchy in the sup norm.  Each tolerance picks a finite set of nodes from the
modulus of continuity, and bisection on the values there refines the
previous stage.  The diagonal comes with a table eps -> starting position.
"""

import math

import numpy as np

from constructive_fa import aa_extract, verify_nesting
from constructive_fa import GridFunction

# sin(x), sin(x + pi), sin(x), ...
fam = [GridFunction.sample(lambda x, c=(0.0, math.pi)[k % 2]: np.sin(x + c), [0], [2 * math.pi], [512])
       for k in range(20)]
res = aa_extract(fam, eps_schedule=[1.0, 0.5, 0.1], modulus=lambda d: d)
print("subsequence:", res.subsequence)
print("dense nodes per stage:", res.info["covering_indices"])
print("modulus:", res.modulus)
print("max pairwise sup distance:", max(d for *_, d in res.cauchy))
print("stages nest:", verify_nesting(res, initial=range(len(fam))))

# x / k converges to 0; without a supplied modulus one is estimated from the samples
fam = [GridFunction.sample(lambda x, k=k: x / k, [0], [1], [128]) for k in range(1, 13)]
res = aa_extract(fam, eps_schedule=[0.5, 0.25])
print("x/k:", res.subsequence, res.info["modulus_source"])
