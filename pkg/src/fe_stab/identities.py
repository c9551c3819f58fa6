"""The derivation chain that splits a solution into quartic and cubic parts.

Each step is stored as ``lhs = rhs`` in the variables
(x, y), and normalised to ``sum c * f(alpha*x + beta*y) = 0``. The even
steps are statements about the even part of a solution, the odd steps
about the odd part; they are verified, not re-derived.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .diffop import CUBIC_TERMS, QUARTIC_TERMS, abs_coefficient_sum, combination_on_grid, expand_combination
from .funcmodel import FunctionModel, Polynomial, SampleGrid, parity_parts
from .polynomial import BivariatePolynomial
from .scalar import scalar_to_json

EVEN, ODD, ANY = "even", "odd", "any"

EXACT_PASS = "ExactPass"
EXACT_FAIL = "ExactFail"
NUMERIC_PASS = "NumericPass"
NUMERIC_FAIL = "NumericFail"


@dataclass(frozen=True)
class FunctionalIdentity:
    label: str
    parity: str
    terms: tuple  # ((coeff, alpha, beta), ...)

    def __post_init__(self):
        if self.parity not in (EVEN, ODD, ANY):
            raise ValueError(f"bad parity {self.parity!r}")
        terms = canonical_terms(self.terms, self.parity)
        if not terms:
            raise ValueError(f"identity {self.label} has no terms")
        object.__setattr__(self, "terms", terms)

    @property
    def abs_coefficient_sum(self) -> Fraction:
        return abs_coefficient_sum(self.terms)

    def to_json(self):
        return {"label": self.label, "parity": self.parity, "terms": [[str(c), a, b] for c, a, b in self.terms]}


def canonical_terms(terms, parity) -> tuple:
    """Merge terms with equal arguments and drop zero coefficients.

    For a declared parity, f(-u) is folded onto f(u) (sign flip for odd) so
    the first nonzero of (alpha, beta) is positive; order of first
    appearance is kept.
    """
    merged: dict[tuple[int, int], Fraction] = {}
    for c, a, b in terms:
        c = Fraction(c)
        if parity != ANY and (a < 0 or (a == 0 and b < 0)):
            a, b = -a, -b
            if parity == ODD:
                c = -c
        merged[(a, b)] = merged.get((a, b), Fraction(0)) + c
    return tuple((c, a, b) for (a, b), c in merged.items() if c != 0)


def _identity(label, parity, lhs, rhs) -> FunctionalIdentity:
    terms = [(c, a, b) for c, a, b in lhs] + [(-c, a, b) for c, a, b in rhs]
    return FunctionalIdentity(label, parity, tuple(terms))


# (coeff, alpha, beta) stands for coeff * f(alpha*x + beta*y)
_EVEN_CHAIN = [
    ("2.1", [(1, 0, 2)], [(16, 0, 1)]),
    ("2.2", [(1, 3, 1), (1, 3, -1), (3, 1, 1), (3, 1, -1)],
            [(3, 2, 1), (3, 2, -1), (72, 1, 0), (2, 0, 1)]),
    ("2.3", [(1, 3, 2), (1, 3, -2), (3, 1, 2), (3, 1, -2)],
            [(48, 1, 1), (48, 1, -1), (72, 1, 0), (32, 0, 1)]),
    ("2.4", [(16, 2, 1), (16, 1, -1), (48, 1, 1), (48, 0, 1)],
            [(3, 3, 2), (3, 1, -2), (2, 1, 2), (72, 1, 0)]),
    ("2.5", [(16, 2, -1), (16, 1, 1), (48, 1, -1), (48, 0, 1)],
            [(3, 3, -2), (3, 1, 2), (2, 1, -2), (72, 1, 0)]),
    ("2.6", [(4, 2, 1), (4, 2, -1), (1, 1, 2), (1, 1, -2)],
            [(20, 1, 1), (20, 1, -1), (90, 1, 0)]),
    ("2.7", [(1, 2, 3), (1, 2, -3), (3, 2, 1), (3, 2, -1)],
            [(48, 1, 1), (48, 1, -1), (32, 1, 0), (72, 0, 1)]),
    ("2.8", [(1, 2, 3), (1, 3, 2), (1, 2, -3), (1, 3, -2), (3, 2, 1), (3, 1, 2), (3, 2, -1), (3, 1, -2)],
            [(96, 1, 1), (96, 1, -1), (104, 1, 0), (104, 0, 1)]),
    ("2.9", [(3, 2, 3), (3, 2, -3)],
            [(-25, 2, 1), (-25, 2, -1), (-4, 1, -2), (-4, 1, 2), (224, 1, 1), (224, 1, -1), (456, 1, 0), (216, 0, 1)]),
    ("2.10", [(3, 3, 2), (3, 3, -2)],
             [(-25, 1, 2), (-25, 1, -2), (-4, 2, -1), (-4, 2, 1), (224, 1, 1), (224, 1, -1), (456, 0, 1), (216, 1, 0)]),
    ("2.11", [(4, 2, -1), (4, 2, 1)],
             [(-16, 1, 2), (-16, 1, -2), (80, 1, 1), (80, 1, -1), (360, 0, 1)]),
]

_ODD_CHAIN = [
    ("2.12", [(1, 0, 2)], [(8, 0, 1)]),
    ("2.13", [(1, 3, 1), (1, 3, -1), (3, 1, 1), (3, 1, -1)],
             [(3, 2, 1), (3, 2, -1), (12, 1, 0)]),
    ("2.14", [(8, 2, 1), (8, 1, 2), (24, 1, 0), (24, 0, 1)],
             [(3, 3, 1), (3, 1, 3), (12, 1, 1)]),
    ("2.15", [(1, 1, 3), (-1, 1, -3), (3, 1, 1), (-3, 1, -1)],
             [(3, 1, 2), (-3, 1, -2), (12, 0, 1)]),
    ("2.16", [(1, 3, -1), (1, 3, 1), (3, 1, -1), (3, 1, 1)],
             [(3, 2, -1), (3, 2, 1), (12, 1, 0)]),
    ("2.17", [(8, 2, 1), (8, 1, -1), (24, 1, 1), (-24, 0, 1)],
             [(3, 3, 2), (3, 1, -2), (12, 1, 0)]),
    ("2.18", [(8, 2, -1), (8, 1, 1), (24, 1, -1), (24, 0, 1)],
             [(3, 3, -2), (3, 1, 2), (12, 1, 0)]),
    ("2.19", [(3, 3, -2), (3, 3, 2)],
             [(8, 2, 1), (8, 2, -1), (-3, 1, 2), (-3, 1, -2), (32, 1, -1), (32, 1, 1), (-24, 1, 0)]),
    ("2.20", [(3, 2, 3), (-3, 2, -3)],
             [(8, 1, 2), (-8, 1, -2), (-3, 2, 1), (3, 2, -1), (32, 1, 1), (-32, 1, -1), (-24, 0, 1)]),
    ("2.21", [(1, 4, 1), (1, 2, -1), (3, 2, 1), (-3, 0, 1)],
             [(3, 3, 1), (3, 1, -1), (12, 1, 0)]),
    ("2.22", [(1, 4, -1), (1, 2, 1), (3, 2, -1), (3, 0, 1)],
             [(3, 3, -1), (3, 1, 1), (12, 1, 0)]),
    ("2.23", [(1, 4, 1), (1, 4, -1)],
             [(3, 3, 1), (3, 3, -1), (-4, 2, -1), (-4, 2, 1), (3, 1, -1), (3, 1, 1), (24, 1, 0)]),
    ("2.24", [(1, 4, 1), (1, 4, -1)],
             [(5, 2, 1), (5, 2, -1), (-6, 1, 1), (-6, 1, -1), (60, 1, 0)]),
    ("2.25", [(1, 3, 2), (1, 3, -2)],
             [(24, 1, 1), (24, 1, -1), (-3, 1, 2), (-3, 1, -2), (12, 1, 0)]),
    ("2.26", [(3, 1, 2), (3, 1, -2)],
             [(20, 1, 1), (20, 1, -1), (-4, 2, 1), (-4, 2, -1), (30, 1, 0)]),
    ("2.27", [(1, 2, 3), (-1, 2, -3)],
             [(24, 1, 1), (-24, 1, -1), (-3, 2, 1), (3, 2, -1), (12, 0, 1)]),
    ("2.28", [(4, 1, 2), (-4, 1, -2)],
             [(3, 2, -1), (-3, 2, 1), (20, 1, 1), (-20, 1, -1), (30, 0, 1)]),
    ("2.29", [(4, 1, 3), (-4, 1, -3)],
             [(9, 2, -1), (-9, 2, 1), (48, 1, 1), (-48, 1, -1), (138, 0, 1)]),
    ("2.30", [(64, 1, 1), (8, 1, 4), (24, 1, 0), (192, 0, 1)],
             [(3, 3, 2), (3, 1, 6), (12, 1, 2)]),
    ("2.31", [(64, 1, -1), (8, 1, -4), (24, 1, 0), (-192, 0, 1)],
             [(3, 3, -2), (3, 1, -6), (12, 1, -2)]),
    ("2.32", [(8, 1, 4), (-8, 1, -4)],
             [(3, 3, 2), (-3, 3, -2), (3, 1, 6), (-3, 1, -6), (12, 1, 2), (-12, 1, -2),
              (64, 1, -1), (-64, 1, 1), (-384, 0, 1)]),
    ("2.33", [(1, 1, 4), (-1, 1, -4)],
             [(5, 1, 2), (-5, 1, -2), (6, 1, -1), (-6, 1, 1), (60, 0, 1)]),
    ("2.34", [(3, 3, 2), (-3, 3, -2)],
             [(28, 1, 2), (-28, 1, -2), (3, 1, -6), (-3, 1, 6), (16, 1, 1), (-16, 1, -1), (864, 0, 1)]),
    ("2.35", [(3, 3, 2), (-3, 3, -2)],
             [(3, 1, 2), (-3, 1, -2), (8, 2, 1), (-8, 2, -1), (16, 1, 1), (-16, 1, -1), (-48, 0, 1)]),
    ("2.36", [(3, 1, 6), (-3, 1, -6)],
             [(25, 1, 2), (-25, 1, -2), (8, 2, -1), (-8, 2, 1), (912, 0, 1)]),
    ("2.37", [(4, 1, 6), (-4, 1, -6)],
             [(48, 1, 2), (-48, 1, -2), (72, 1, -1), (-72, 1, 1), (1104, 0, 1)]),
    ("2.38", [(44, 1, 2), (-44, 1, -2)],
             [(32, 2, -1), (-32, 2, 1), (216, 1, 1), (-216, 1, -1), (336, 0, 1)]),
    ("2.39", [(1, 2, 1), (-1, 2, -1)],
             [(4, 1, 1), (-4, 1, -1), (-6, 0, 1)]),
    ("2.40", [(1, 1, 2), (1, 1, -2)],
             [(4, 1, 1), (4, 1, -1), (-6, 1, 0)]),
]

_REGISTRY = tuple(
    [_identity(label, EVEN, lhs, rhs) for label, lhs, rhs in _EVEN_CHAIN]
    + [_identity(label, ODD, lhs, rhs) for label, lhs, rhs in _ODD_CHAIN]
)

# Where each chain lands: the even part is quartic, the odd part cubic.
EVEN_CONCLUSION = _identity(
    "even-final", EVEN,
    [(1, 1, 2), (1, 1, -2), (6, 1, 0)],
    [(4, 1, 1), (4, 1, -1), (24, 0, 1)],
)
ODD_CONCLUSION = _identity(
    "odd-final", ODD,
    [(8, 1, 1), (8, 1, -1), (48, 1, 0)],
    [(4, 2, 1), (4, 2, -1)],
)
QUARTIC_EQUATION = FunctionalIdentity("quartic", ANY, QUARTIC_TERMS)
CUBIC_EQUATION = FunctionalIdentity("cubic", ANY, CUBIC_TERMS)


def registry() -> list[FunctionalIdentity]:
    """The even chain followed by the odd chain, 40 identities in order."""
    return list(_REGISTRY)


def lookup(label: str) -> FunctionalIdentity:
    for ident in _REGISTRY + (EVEN_CONCLUSION, ODD_CONCLUSION):
        if ident.label == label:
            return ident
    raise KeyError(label)


@dataclass(frozen=True)
class IdentityCheckReport:
    label: str
    parity: str
    status: str
    residual: BivariatePolynomial | None = None
    max_abs: object = None
    argmax: tuple | None = None
    tol: object = None

    @property
    def passed(self) -> bool:
        return self.status in (EXACT_PASS, NUMERIC_PASS)

    def to_json(self):
        out = {"label": self.label, "parity": self.parity, "status": self.status}
        if self.residual is not None:
            out["residual"] = str(self.residual)
        if self.max_abs is not None:
            out["max_abs"] = scalar_to_json(self.max_abs)
        if self.argmax is not None:
            out["argmax"] = [str(v) for v in self.argmax]
        if self.tol is not None:
            out["tol"] = scalar_to_json(self.tol)
        return out


def expand_identity(ident: FunctionalIdentity, f: Polynomial) -> BivariatePolynomial:
    return expand_combination(ident.terms, f)


def check_symbolic(ident: FunctionalIdentity, f: Polynomial) -> IdentityCheckReport:
    residual = expand_identity(ident, f)
    if residual.is_zero:
        return IdentityCheckReport(ident.label, ident.parity, EXACT_PASS, residual=residual)
    return IdentityCheckReport(ident.label, ident.parity, EXACT_FAIL, residual=residual)


def default_tolerance(ident: FunctionalIdentity, f: FunctionModel) -> float:
    """Triangle-inequality tolerance: |coefficients| summed times noise level."""
    return float(ident.abs_coefficient_sum) * f.noise_amplitude


def check_numeric(
    ident: FunctionalIdentity,
    f: FunctionModel,
    grid: SampleGrid,
    tol: float | None = None,
    max_pairs: int = 20_000,
    seed: int = 0,
) -> IdentityCheckReport:
    if tol is None:
        tol = default_tolerance(ident, f)
    ix, iy, values = combination_on_grid(ident.terms, f, grid, max_pairs, seed)
    mags = np.abs(values)
    k = int(np.argmax(mags))
    worst = float(mags[k])
    status = NUMERIC_PASS if worst <= tol else NUMERIC_FAIL
    return IdentityCheckReport(
        ident.label, ident.parity, status,
        max_abs=worst, argmax=(grid.points[ix[k]], grid.points[iy[k]]), tol=tol,
    )


def check_chain(
    f: FunctionModel,
    parity: str = "all",
    grid: SampleGrid | None = None,
    tol: float | None = None,
) -> list[IdentityCheckReport]:
    """Check every registry identity on the matching parity part of ``f``.

    Even identities are applied to f_e and odd ones to f_o. Polynomials are
    checked symbolically; other models numerically on ``grid``.
    """
    if parity not in ("all", EVEN, ODD):
        raise ValueError(f"parity filter must be 'all', 'even' or 'odd', got {parity!r}")
    even, odd = parity_parts(f)
    reports = []
    for ident in registry():
        if parity != "all" and ident.parity != parity:
            continue
        part = even if ident.parity == EVEN else odd
        if isinstance(part, Polynomial):
            reports.append(check_symbolic(ident, part))
        else:
            if grid is None:
                raise ValueError("a grid is required to check non-polynomial models")
            reports.append(check_numeric(ident, part, grid, tol))
    return reports


def terms_match(a: Sequence, b: Sequence, scale=1) -> bool:
    """True when two term lists agree as multisets after scaling ``b``."""
    key = lambda t: (t[1], t[2])  # noqa: E731
    return sorted((Fraction(c), x, y) for c, x, y in a) == sorted(
        (Fraction(c) * scale, x, y) for c, x, y in b
    ) and sorted(map(key, a)) == sorted(map(key, b))
