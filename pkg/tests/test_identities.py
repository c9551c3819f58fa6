from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from fe_stab.diffop import CUBIC_TERMS, QUARTIC_TERMS, cubic_residual_at, quartic_residual_at
from fe_stab.funcmodel import dyadic_grid, make_perturbed, make_polynomial, parity_parts, tabulate
from fe_stab.identities import (
    CUBIC_EQUATION,
    EVEN_CONCLUSION,
    ODD_CONCLUSION,
    QUARTIC_EQUATION,
    FunctionalIdentity,
    canonical_terms,
    check_chain,
    check_numeric,
    check_symbolic,
    lookup,
    registry,
    terms_match,
)

from oracles import brute_force_residual

nonzero = st.fractions(min_value=-1000, max_value=1000, max_denominator=1000).filter(lambda v: v != 0)

X = make_polynomial([0, 1])
X2 = make_polynomial([0, 0, 1])
X3 = make_polynomial([0, 0, 0, 1])
X4 = make_polynomial([0, 0, 0, 0, 1])


def test_registry_is_complete():
    labels = [i.label for i in registry()]
    assert labels == [f"2.{k}" for k in range(1, 41)]
    assert [i.parity for i in registry()] == ["even"] * 11 + ["odd"] * 29


def test_registry_entries_are_canonical():
    for ident in registry():
        args = [(a, b) for _, a, b in ident.terms]
        assert len(args) == len(set(args))
        assert all(c != 0 for c, _, _ in ident.terms)


def test_known_entries():
    assert lookup("2.1").terms == ((1, 0, 2), (-16, 0, 1))
    assert lookup("2.12").terms == ((1, 0, 2), (-8, 0, 1))
    assert terms_match(lookup("2.6").terms,
                       [(4, 2, 1), (4, 2, -1), (1, 1, 2), (1, 1, -2), (-20, 1, 1), (-20, 1, -1), (-90, 1, 0)])
    with pytest.raises(KeyError):
        lookup("2.41")


def test_every_identity_holds_on_its_monomial():
    for ident in registry():
        f = X4 if ident.parity == "even" else X3
        report = check_symbolic(ident, f)
        assert report.passed, (ident.label, str(report.residual))


def test_identities_agree_with_brute_force_expansion():
    for ident in registry():
        coeffs = [0, 0, 0, 0, 1] if ident.parity == "even" else [0, 0, 0, 1]
        assert brute_force_residual(coeffs, ident.terms) == {}


@settings(max_examples=20)
@given(nonzero)
def test_soundness_on_scaled_solutions(a):
    for ident in registry():
        f = make_polynomial([0, 0, 0, 0, a]) if ident.parity == "even" else make_polynomial([0, 0, 0, a])
        assert check_symbolic(ident, f).passed


def test_discrimination():
    r = check_symbolic(lookup("2.6"), X2)
    assert r.status == "ExactFail" and not r.residual.is_zero
    r = check_symbolic(lookup("2.26"), X)
    assert r.status == "ExactFail" and not r.residual.is_zero


def test_chain_endpoints_match_classical_equations():
    assert check_symbolic(EVEN_CONCLUSION, X4).passed
    assert check_symbolic(ODD_CONCLUSION, X3).passed
    assert terms_match(EVEN_CONCLUSION.terms, QUARTIC_TERMS)
    assert terms_match(ODD_CONCLUSION.terms, CUBIC_TERMS, scale=-4)
    for x, y in [(1, 2), (Fraction(1, 3), -5), (2, 7)]:
        assert quartic_residual_at(X3, x, y) == sum(c * X3(a * x + b * y) for c, a, b in EVEN_CONCLUSION.terms)
        assert cubic_residual_at(X4, x, y) * -4 == sum(c * X4(a * x + b * y) for c, a, b in ODD_CONCLUSION.terms)
    assert check_symbolic(QUARTIC_EQUATION, X4).passed
    assert check_symbolic(CUBIC_EQUATION, X3).passed


def test_canonicalisation_folds_by_parity():
    assert canonical_terms([(1, -1, 0), (2, 1, 0)], "even") == ((3, 1, 0),)
    assert canonical_terms([(1, -1, 0), (2, 1, 0)], "odd") == ((1, 1, 0),)
    assert canonical_terms([(1, 1, 0), (-1, 1, 0), (2, 0, 1)], "any") == ((2, 0, 1),)
    with pytest.raises(ValueError):
        FunctionalIdentity("empty", "even", [(1, 1, 0), (-1, 1, 0)])


def test_numeric_examples():
    grid = dyadic_grid(-1, 1, 4)
    assert check_numeric(lookup("2.40"), X3, grid, 0).passed
    even, _ = parity_parts(make_polynomial([0, 0, 0, 1, 1]))
    assert check_numeric(lookup("2.2"), even, grid, 1e-9).passed
    delta = 1e-3
    noisy = make_perturbed(X4, delta, 5)
    ident = lookup("2.2")
    r = check_numeric(ident, noisy, grid, delta * float(ident.abs_coefficient_sum))
    assert r.status == "NumericPass" and 0 < r.max_abs
    assert check_numeric(ident, noisy, grid).tol == pytest.approx(88e-3)


def test_numeric_failure_reports_location():
    r = check_numeric(lookup("2.6"), X2, dyadic_grid(-1, 1, 3), 1e-9)
    assert r.status == "NumericFail" and r.max_abs > 1 and r.argmax is not None


def test_numeric_checks_on_tables():
    grid = dyadic_grid(-1, 1, 2)
    table = tabulate(make_polynomial([0, 0, 0, 1, 1]), grid, pad=8)
    assert check_numeric(lookup("2.1"), parity_parts(table)[0], grid, 1e-12).passed


def test_chain_on_solution_and_non_solution():
    reports = check_chain(make_polynomial([0, 0, 0, "-3/4", "5/2"]))
    assert len(reports) == 40 and all(r.passed for r in reports)
    assert [r.label for r in check_chain(X3, "odd")] == [f"2.{k}" for k in range(12, 41)]
    failed = [r.label for r in check_chain(X2, "even") if not r.passed]
    assert "2.6" in failed
    noisy = make_perturbed(make_polynomial([0, 0, 0, 1, 1]), 1e-4, 2)
    reports = check_chain(noisy, grid=dyadic_grid(-1, 1, 3))
    assert all(r.passed for r in reports)
    with pytest.raises(ValueError):
        check_chain(noisy)
