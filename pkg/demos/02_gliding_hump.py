"""
Gliding hump: a point where a family of operators blows up
==========================================================

From near-maximising inputs x_n of operators with ||T_n|| >= 4^n the hump
iteration builds y_N = x_1 +- x_2/9 +- ... with signs chosen so every T_n
stays large at the limit.  The certificate compares ||T_n(y_N)|| with
(1/6) 3^-n ||T_n||.
"""

from constructive_fa import (
    DirectSumVec,
    FiniteFn,
    HumpInput,
    diagonal_family,
    divergence_certificate,
    dipole_probe,
    hump_sequence,
    integration_family,
    quotient_family,
    verify_trace,
    weak_ubp_input,
)

# T_n(x) = 4^n * sum of x_n over S_n = {1, 2, 3}
S = (1, 2, 3)
fam = integration_family(lambda n: S)
N = 12
xs = [DirectSumVec.single(n, FiniteFn.indicator(S, 1)) for n in range(1, N + 1)]
inp = HumpInput(fam, N, xs)
trace = hump_sequence(inp)
verify_trace(trace, inp)  # recursion and ||y_n - y_m|| <= 3^-n / 2

print(" n   ||T_n(y_N)||     required   pass")
for row in divergence_certificate(trace, inp):
    print(f"{row.n:2d}  {row.observed:12.6g} {row.required:12.6g}   {row.passed}")

# quotient family: the dipole probe gives a bound of 4^k instead of 4^k / 2
qf = quotient_family(lambda n: tuple(range(n + 1)))
probes = [dipole_probe(qf, n) for n in range(1, 7)]
qinp = HumpInput(qf, 6, probes, bound_probes=probes)
rows = divergence_certificate(hump_sequence(qinp), qinp)
print("quotient family certified:", all(r.passed for r in rows))

# real functionals: pick the first operator past 4^n, average its near-maximisers
diag = diagonal_family(weights=lambda n: 2.0**n)
winp = weak_ubp_input(diag, 4, lambda n, a: [DirectSumVec.single(a, [1.0])])
print("operators used:", winp.operator_indices)
