from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fe_stab.bounds import Constant, PowerSum, combined_bound
from fe_stab.diffop import residual_at, sup_residual
from fe_stab.errors import Diverged, InadmissibleControl, NotAnchored, NotASolution, Stalled
from fe_stab.funcmodel import dyadic_grid, make_perturbed, make_polynomial, make_tabulated, parity_parts
from fe_stab.hyers import (
    ConvergenceCriteria,
    cubic_approximant,
    extract_component,
    quartic_approximant,
    recover_coefficients,
    stabilize,
)

X3 = make_polynomial([0, 0, 0, 1])
X4 = make_polynomial([0, 0, 0, 0, 1])
X4_X3 = make_polynomial([0, 0, 0, 1, 1])
GRID = dyadic_grid(-1, 1, 5)

nonzero = st.fractions(min_value=-100, max_value=100, max_denominator=100).filter(lambda v: v != 0)


def test_approximant_examples():
    assert quartic_approximant(X4, 1, 5, 1) == 1
    assert quartic_approximant(X3, 1, 3, 1) == 8
    assert cubic_approximant(X3, 2, 7, 1) == 8
    assert cubic_approximant(X3, 1, 4, -1) == 1


def test_mixed_approximant_follows_brute_force_sequence():
    for n in range(12):
        brute = Fraction(16) ** -n * X4_X3(Fraction(2) ** n)
        assert quartic_approximant(X4_X3, 1, n, -1) == brute == 1 + Fraction(1, 2**n)
        assert quartic_approximant(X4_X3, 1, n, 1) == 1 + 2**n


def test_float_approximants_are_exact_powers_of_two():
    assert quartic_approximant(X4, 0.75, 9, 1) == 0.75**4
    assert isinstance(cubic_approximant(X3, 0.5, 3, -1), float)


@given(nonzero, st.integers(min_value=0, max_value=20), st.sampled_from([1, -1]))
def test_homogeneous_fixed_points(a, n, s):
    assert quartic_approximant(make_polynomial([0, 0, 0, 0, a]), 1, n, s) == a
    assert cubic_approximant(make_polynomial([0, 0, 0, a]), Fraction(3, 2), n, s) == a * Fraction(27, 8)


def test_extract_on_solutions():
    r = extract_component(X4, 4, GRID, 1)
    assert r.coefficient == 1 and r.converged and r.iterations == 0
    r = extract_component(parity_parts(X4_X3)[1], 3, GRID, -1)
    assert r.coefficient == 1 and r.converged


def test_extract_perturbed_quartic_within_bound():
    delta = 1e-3
    f = parity_parts(make_perturbed(X4, delta, 21))[0]
    r = extract_component(f, 4, GRID, -1)
    assert r.converged
    assert abs(r.coefficient - 1) <= float(combined_bound(Constant(287 * delta), 1.0, -1).total)


def test_divergence_in_the_wrong_direction():
    with pytest.raises(Diverged) as info:
        extract_component(X3, 4, GRID, 1, ConvergenceCriteria(max_iterations=20))
    assert info.value.diagnostics.iterations < 20
    diffs = info.value.diagnostics.differences
    assert all(b >= 1.5 * a for a, b in zip(diffs, diffs[1:]))


def test_noise_floor_reports_stalled():
    f = parity_parts(make_perturbed(X4, 1e-3, 3))[0]
    with pytest.raises((Stalled, Diverged)):
        extract_component(f, 4, GRID, 1, ConvergenceCriteria(max_iterations=60, tol=1e-30))


def test_iteration_budget_is_reported():
    f = make_polynomial([0, 0, 1, 0, 1])
    r = extract_component(f, 4, GRID, -1, ConvergenceCriteria(max_iterations=3, tol=1e-15))
    assert not r.converged and r.status == "max_iterations" and len(r.differences) == 3


def test_criteria_validation():
    with pytest.raises(ValueError):
        ConvergenceCriteria(max_iterations=0)
    with pytest.raises(ValueError):
        ConvergenceCriteria(tol=0)
    with pytest.raises(ValueError):
        extract_component(X4, 2, GRID)


def test_odd_perturbation_telescopes():
    delta = 1e-3
    f = parity_parts(make_perturbed(X3, delta, 8))[1]
    prev = cubic_approximant(f, 1.0, 0, -1)
    for n in range(15):
        cur = cubic_approximant(f, 1.0, n + 1, -1)
        assert abs(cur - prev) <= 9 * delta * 8.0 ** (-n - 1) + 1e-15
        prev = cur


@settings(max_examples=30)
@given(st.fractions(min_value=-1, max_value=1, max_denominator=64), st.fractions(min_value=-2, max_value=2, max_denominator=8))
def test_cauchy_telescoping_against_series_terms(c, x):
    # f = x^4 + c x^6 is even with D_f(0, y) = -48 c y^6, so phi(0, y) = 48|c| |y|^6
    f = make_polynomial([0, 0, 0, 0, 1, 0, c])
    theta = 48 * abs(c)
    for y in (Fraction(1, 3), Fraction(-2)):
        assert abs(residual_at(f, 0, y)) == theta * abs(y) ** 6
    for n in range(20):
        step = quartic_approximant(f, x, n + 1, 1) - quartic_approximant(f, x, n, 1)
        term = Fraction(16) ** (n + 1) / 16 * theta * abs(x / 2 ** (n + 1)) ** 6
        assert abs(step) <= term


@settings(max_examples=25)
@given(nonzero, nonzero)
def test_scaling_equivariance(alpha, b):
    f = make_polynomial([0, 0, b, 0, 1])
    base = extract_component(parity_parts(f)[0], 4, GRID, -1)
    scaled = extract_component(parity_parts(make_polynomial([0, 0, alpha * b, 0, alpha]))[0], 4, GRID, -1)
    assert abs(scaled.coefficient - alpha * base.coefficient) <= 1e-11 * max(1, abs(alpha))
    exact = extract_component(make_polynomial([0, 0, 0, 0, alpha]), 4, GRID, -1)
    assert exact.coefficient == alpha


def test_uniqueness_surrogate():
    f = parity_parts(make_perturbed(X4_X3, 1e-4, 13))[0]
    loose = extract_component(f, 4, GRID, -1, ConvergenceCriteria(tol=1e-8))
    tight = extract_component(f, 4, GRID, -1, ConvergenceCriteria(tol=1e-13))
    assert loose.converged and tight.converged
    assert abs(loose.coefficient - tight.coefficient) < 1e-8


def test_stabilize_exact_solution():
    rep = stabilize(X4_X3, Constant(Fraction(1)), dyadic_grid(-2, 2, 4))
    assert rep.a_quartic == 1 and rep.b_cubic == 1 and rep.grid_error == 0
    assert rep.passed and rep.bound == Fraction(22, 105)
    rep = stabilize(make_polynomial([0, 0, 0, -3, 2]), PowerSum(Fraction(1), 5), GRID)
    assert (rep.a_quartic, rep.b_cubic) == (2, -3) and rep.direction == 1 and rep.passed


def test_stabilize_perturbed_solution():
    delta = 1e-3
    f = make_perturbed(X4_X3, delta, 17)
    rep = stabilize(f, Constant(287 * delta), dyadic_grid(-2, 2, 8), -1)
    assert rep.passed and rep.phi_violations == 0
    assert rep.grid_error <= 22 / 105 * 287 * delta


def test_stabilize_superquartic_control():
    f = make_polynomial([0, 0, 0, 1, 1, 0, Fraction(1, 100)])
    grid = dyadic_grid(-1, 1, 5)
    ratio = sup_residual(f, grid).sup / 2  # worst case sits at |x| = |y| = 1
    rep = stabilize(f, PowerSum(Fraction(ratio) * 2, 6), grid, 1, ConvergenceCriteria(max_iterations=80))
    assert rep.direction == 1 and rep.passed
    assert abs(rep.a_quartic - 1) < 1e-9 and abs(rep.b_cubic - 1) < 1e-9


def test_stabilize_non_solution_fails():
    rep = stabilize(make_polynomial([0, 0, 1]), Constant(Fraction(1)), dyadic_grid(-2, 2, 4))
    assert not rep.passed and rep.margin < 0 and rep.phi_violations > 0 and rep.warnings


def test_stabilize_guards():
    with pytest.raises(NotAnchored):
        stabilize(make_polynomial([1, 0, 0, 0, 1]), Constant(1), GRID)
    with pytest.raises(InadmissibleControl):
        stabilize(X4, PowerSum(1, Fraction(7, 2)), GRID)
    with pytest.raises(InadmissibleControl):
        stabilize(X4_X3, Constant(1), GRID, 1)
    with pytest.raises(Diverged):
        stabilize(make_polynomial([0, 0, 1]), PowerSum(1, 5), GRID, 1)


def test_stabilize_is_reproducible():
    f = make_perturbed(X4_X3, 1e-3, 4)
    a = stabilize(f, Constant(0.287), dyadic_grid(-2, 2, 7), -1, seed=3).to_json()
    b = stabilize(f, Constant(0.287), dyadic_grid(-2, 2, 7), -1, seed=3).to_json()
    assert a == b


def test_recover_coefficients():
    assert recover_coefficients(X4_X3) == (1, 1)
    assert recover_coefficients(make_polynomial([0, 0, 0, 0, 5])) == (5, 0)
    assert recover_coefficients(make_polynomial([0, 0, 0, Fraction(-1, 2)])) == (0, Fraction(-1, 2))
    with pytest.raises(NotASolution):
        recover_coefficients(make_polynomial([0, 0, 1]))
    table = make_tabulated({x: 2 * x**4 - 3 * x**3 for x in dyadic_grid(-2, 2, 1).points})
    assert recover_coefficients(table) == (2, -3)
    bad = make_tabulated({x: x**2 for x in dyadic_grid(-2, 2, 1).points})
    with pytest.raises(NotASolution):
        recover_coefficients(bad)


def test_grid_limits_match_coefficient():
    r = extract_component(parity_parts(make_perturbed(X4, 1e-6, 1))[0], 4, GRID, -1)
    assert np.allclose(r.grid_limits, float(r.coefficient) * GRID.array**4, atol=1e-5)
