import math

import numpy as np
import pytest

from constructive_fa.errors import InvalidExponentError, ResolutionError
from constructive_fa.mollify import (
    Mollifier,
    convolve_zero_extended,
    difference_bounds,
    discretization_slack,
    frechet_constants,
    holder_bounds,
    kernel_grid,
    mollifier_eval,
    mollifier_gradient,
    mollifier_mass,
    smoothing_estimate,
    translation_integral,
)
from constructive_fa.extraction import translation_modulus
from constructive_fa.spaces import GridFunction, grid_lp_norm

from oracles import trapezoid_rho_power, trapezoid_unit_mass

# integral of exp(-1/(1-|y|^2)) over the unit ball, 30-digit reference values
Z1 = 0.4439938161680794378
Z2 = 0.4665123931783300689


def test_normalization_oracles():
    assert trapezoid_unit_mass(1) == pytest.approx(Z1, rel=1e-10)
    assert trapezoid_unit_mass(2) == pytest.approx(Z2, rel=1e-10)
    assert Mollifier(1).normalization == pytest.approx(Z1, rel=1e-11)
    assert Mollifier(1, 2).normalization == pytest.approx(Z2, rel=1e-11)


def test_value_at_origin():
    assert mollifier_eval(Mollifier(1), 0.0) == pytest.approx(math.exp(-1) / Z1, rel=1e-10)
    assert mollifier_eval(Mollifier(1), 0.0) == pytest.approx(0.8286, abs=5e-5)
    assert mollifier_eval(Mollifier(3), 0.0) == pytest.approx(3 * math.exp(-1) / Z1, rel=1e-10)


@pytest.mark.parametrize("n", [1, 2, 4])
@pytest.mark.parametrize("d", [1, 2])
def test_support_and_mass(n, d):
    m = Mollifier(n, d)
    r = 1 / n
    if d == 1:
        edge = np.array([-r, r, -1.0001 * r, 1.0001 * r, 5.0])
    else:
        ang = np.linspace(0, 2 * np.pi, 17)
        edge = np.concatenate([np.stack([r * np.cos(ang), r * np.sin(ang)], -1),
                               np.stack([1.01 * r * np.cos(ang), 1.01 * r * np.sin(ang)], -1)])
    assert np.all(mollifier_eval(m, edge) == 0)
    assert abs(mollifier_mass(m) - 1) <= 1e-6
    inside = np.linspace(-0.99 * r, 0.99 * r, 51)
    pts = inside if d == 1 else np.stack([inside, 0 * inside], -1)
    assert np.all(mollifier_eval(m, pts) > 0)


def test_smooth_at_boundary():
    # forward differences across the support boundary shrink with the spacing
    m = Mollifier(1)
    jumps = []
    for h in (1e-1, 1e-2, 1e-3):
        x = np.array([1 - h, 1.0])
        jumps.append(abs(np.diff(mollifier_eval(m, x))[0]) / h)
    assert jumps[0] > jumps[1] > jumps[2]
    assert jumps[2] < 1e-100


def test_gradient_matches_finite_difference():
    m = Mollifier(2)
    x = np.linspace(-0.45, 0.45, 19)
    eps = 1e-7
    fd = (mollifier_eval(m, x + eps) - mollifier_eval(m, x - eps)) / (2 * eps)
    assert np.allclose(mollifier_gradient(m, x)[..., 0], fd, rtol=1e-5, atol=1e-6)


def test_resolution_error():
    with pytest.raises(ResolutionError):
        kernel_grid(Mollifier(4), 0.3)


def test_convolution_examples():
    m = Mollifier(4)
    zero = GridFunction.sample(lambda x: 0 * x, [0], [2], [200])
    assert np.all(convolve_zero_extended(zero, m).values == 0)

    c = 2.5
    const = GridFunction.sample(lambda x: c + 0 * x, [0], [4], [512])
    h = convolve_zero_extended(const, m)
    pts = h.node_points()[:, 0]
    interior = (pts > 0.5) & (pts < 3.5)
    assert np.all(np.abs(h.values[interior] - c) <= 1e-3)
    assert h.origin[0] < 0 and h.upper[0] > 4


def test_convolution_constant_2d():
    m = Mollifier(4, 2)
    const = GridFunction.sample(lambda x, y: 1 + 0 * x, [0, 0], [2, 2], [64, 64])
    h = convolve_zero_extended(const, m)
    pts = h.node_points()
    mask = np.all((pts > 0.4) & (pts < 1.6), axis=1)
    assert np.all(np.abs(h.values.ravel()[mask] - 1) <= 1e-3)


def test_holder_example_indicator():
    # f = 1_[0,1], p = 2, n = 2: sup bound is ||rho_2||_2 = sqrt(2 integral rho_1^2)
    f = GridFunction.sample(lambda x: ((x >= 0) & (x <= 1)).astype(float), [-0.5], [1.5], [800])
    m = Mollifier(2)
    hb = holder_bounds(f, m, 2)
    oracle = math.sqrt(2 * trapezoid_rho_power(2)) * grid_lp_norm(f, 2)
    assert hb.sup_bound == pytest.approx(oracle, rel=1e-3)
    h = convolve_zero_extended(f, m)
    assert np.max(np.abs(h.values)) <= hb.sup_bound
    assert holder_bounds(GridFunction.sample(lambda x: 0 * x, [0], [1], [50]), m, 2).sup_bound == 0


def test_holder_slope_bound():
    f = GridFunction.sample(lambda x: np.sign(np.sin(5 * x)), [0], [3], [600])
    for p in (1, 2, 3):
        m = Mollifier(3)
        h = convolve_zero_extended(f, m)
        slope = np.max(np.abs(np.diff(h.values))) / f.spacing[0]
        hb = holder_bounds(f, m, p)
        _, slope_slack = discretization_slack(f, m, p)
        assert slope <= hb.grad_bound[0] + slope_slack
        assert slope <= difference_bounds(f, m, p)[0] * (1 + 1e-12)


def test_holder_rejects_infinite_p():
    f = GridFunction.sample(lambda x: x, [0], [1], [50])
    with pytest.raises(InvalidExponentError):
        holder_bounds(f, Mollifier(2), math.inf)


def test_frechet_constants():
    c1, c2 = frechet_constants(1, 1)
    assert c1 == pytest.approx(math.exp(-1) / Z1, rel=1e-10) and c2 == 2
    c1, c2 = frechet_constants(2, 1)
    assert c1 == pytest.approx(trapezoid_rho_power(2), rel=1e-8)
    c1, c2 = frechet_constants(3, 1)
    assert c1 == pytest.approx(trapezoid_rho_power(1.5) ** 2, rel=1e-8)
    assert frechet_constants(2, 2)[1] == pytest.approx(math.pi)


# --- translation modulus ------------------------------------------------------


def test_translation_modulus_examples():
    h = 1 / 512
    f = GridFunction.sample(lambda x: (x <= 1).astype(float), [0], [2], [1024])
    (entry,) = translation_modulus([f], 1, [0.25])
    assert abs(entry.value - 0.5) <= 2 * h
    assert entry.snap_error == 0

    const = GridFunction.sample(lambda x: 1 + 0 * x, [0], [2], [1024])
    for s in (0.01, 0.1, 0.3):
        (e,) = translation_modulus([const], 1, [s], restrict=True)
        # only the boundary strip of width |s| contributes
        assert e.value <= abs(s) + 2 * h


def test_translation_modulus_snaps():
    f = GridFunction.sample(lambda x: x, [0], [1], [10])
    (e,) = translation_modulus([f], 2, [0.123])
    assert e.cells == (1,)
    assert e.snap_error == pytest.approx(0.023)


def test_translation_modulus_monotone_for_smooth_family():
    fam = [GridFunction.sample(lambda x, c=c: np.exp(-((x - c) / 0.2) ** 2), [0], [3], [600])
           for c in (1.0, 1.3, 1.6)]
    shifts = [0.5, 0.25, 0.1, 0.05, 0.01, 0.0]
    vals = [e.value for e in translation_modulus(fam, 2, shifts)]
    assert all(b <= a for a, b in zip(vals, vals[1:]))
    assert vals[-1] == 0


def test_translation_integral_2d():
    vals = np.zeros((4, 4))
    vals[1, 1] = 1.0
    assert translation_integral(vals, (1, 0), 1, 0.25) == pytest.approx(0.5)
    assert translation_integral(vals, (0, 0), 1, 0.25) == 0


# --- smoothing estimate -------------------------------------------------------


@pytest.mark.parametrize("p", [1, 2])
def test_smoothing_estimate_chain(p):
    g = GridFunction.sample(lambda x: ((x > 0.3) & (x < 1.1)).astype(float), [0], [2], [512])
    for n in (2, 4, 8, 16):
        est = smoothing_estimate(g, Mollifier(n), p)
        assert est.observed <= est.grid_bound * (1 + 1e-12)
        k = kernel_grid(Mollifier(n), g.spacing)
        assert est.mass_defect == pytest.approx(abs(1 - k.mass), abs=1e-15)
        assert est.mass_defect < 1e-4
        # the continuous constants need a small discretization allowance
        assert est.observed <= est.continuous_bound * 1.05 + 1e-9
        err = grid_lp_norm(convolve_zero_extended(g, Mollifier(n)) - g.pad(k.radius_cells), p)
        assert err <= est.certified_norm_bound(grid_lp_norm(g, p))
