"""The mixed cubic-quartic difference operator and its classical relatives.

Every operator is a linear combination ``sum c * f(alpha*x + beta*y)``
stored once as a coefficient table; numeric evaluation, symbolic
expansion and grid sweeps all read the same table.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .funcmodel import FunctionModel, Polynomial, SampleGrid
from .polynomial import BivariatePolynomial
from .scalar import Scalar, common_mode, scalar_to_json

Term = tuple  # (coeff, alpha, beta)

# D_f(x, y) = 4[f(3x+y) + f(3x-y)] - 12[f(2x+y) + f(2x-y)] + 12[f(x+y) + f(x-y)]
#             - f(2y) + 8 f(y) - 30 f(2x) + 192 f(x)
OPERATOR_TERMS: tuple[Term, ...] = (
    (4, 3, 1),
    (4, 3, -1),
    (-12, 2, 1),
    (-12, 2, -1),
    (12, 1, 1),
    (12, 1, -1),
    (-1, 0, 2),
    (8, 0, 1),
    (-30, 2, 0),
    (192, 1, 0),
)

# f(x+2y) + f(x-2y) - 4f(x+y) - 4f(x-y) - 24f(y) + 6f(x)
QUARTIC_TERMS: tuple[Term, ...] = (
    (1, 1, 2),
    (1, 1, -2),
    (-4, 1, 1),
    (-4, 1, -1),
    (-24, 0, 1),
    (6, 1, 0),
)

# f(2x+y) + f(2x-y) - 2f(x+y) - 2f(x-y) - 12f(x)
CUBIC_TERMS: tuple[Term, ...] = (
    (1, 2, 1),
    (1, 2, -1),
    (-2, 1, 1),
    (-2, 1, -1),
    (-12, 1, 0),
)

OPERATOR_ABS_SUM = sum(abs(c) for c, _, _ in OPERATOR_TERMS)  # 287

DEFAULT_MAX_PAIRS = 250_000


def abs_coefficient_sum(terms: Sequence[Term]) -> Fraction:
    return sum((abs(Fraction(c)) for c, _, _ in terms), Fraction(0))


@dataclass(frozen=True)
class ResidualReport:
    sup: Scalar
    argmax: tuple
    samples: int

    def to_json(self):
        return {
            "sup": scalar_to_json(self.sup),
            "argmax": [str(self.argmax[0]), str(self.argmax[1])],
            "samples": self.samples,
        }


def combination_at(terms: Sequence[Term], f: FunctionModel, x, y) -> Scalar:
    """sum c * f(alpha*x + beta*y) at one point, in the mode of (x, y)."""
    if common_mode(x, y) == "exact":
        x, y = Fraction(x), Fraction(y)
        total = Fraction(0)
    else:
        x, y = float(x), float(y)
        total = 0.0
    for c, a, b in terms:
        total += c * f(a * x + b * y)
    return total


def residual_at(f: FunctionModel, x, y) -> Scalar:
    """D_f(x, y); exact for exact models at rational points."""
    return combination_at(OPERATOR_TERMS, f, x, y)


def quartic_residual_at(f: FunctionModel, x, y) -> Scalar:
    """LHS - RHS of the classical quartic equation."""
    return combination_at(QUARTIC_TERMS, f, x, y)


def cubic_residual_at(f: FunctionModel, x, y) -> Scalar:
    """LHS - RHS of the classical cubic equation."""
    return combination_at(CUBIC_TERMS, f, x, y)


def expand_combination(terms: Sequence[Term], f: Polynomial) -> BivariatePolynomial:
    total = BivariatePolynomial()
    for c, a, b in terms:
        total = total + BivariatePolynomial.from_univariate(f.coeffs, a, b) * Fraction(c)
    return total


def symbolic_residual(f: Polynomial) -> BivariatePolynomial:
    """D_f expanded as an exact polynomial in (x, y)."""
    if not isinstance(f, Polynomial):
        raise TypeError("symbolic expansion needs an exact polynomial model")
    return expand_combination(OPERATOR_TERMS, f)


def combination_many(terms: Sequence[Term], f: FunctionModel, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    out = np.zeros(np.broadcast(xs, ys).shape)
    for c, a, b in terms:
        out += float(c) * f.evaluate_many(a * xs + b * ys)
    return out


def sample_pairs(grid: SampleGrid, max_pairs: int = DEFAULT_MAX_PAIRS, seed: int = 0):
    """Deterministic index pairs (ix, iy) into ``grid``, lexicographically sorted.

    All ordered pairs when they fit in ``max_pairs``; otherwise the full
    product of a strided sub-grid (keeping both ends and 0) topped up with
    seeded uniform pairs.
    """
    n = len(grid)
    if max_pairs < 1:
        raise ValueError("max_pairs must be positive")
    if n * n <= max_pairs:
        ix, iy = np.divmod(np.arange(n * n, dtype=np.int64), n)
        return ix, iy
    stride = 1
    while True:
        stride *= 2
        sub = set(range(0, n, stride)) | {n - 1}
        if 0 in grid.points:
            sub.add(grid.points.index(0))
        if len(sub) ** 2 <= max_pairs or stride > n:
            break
    sub_idx = np.array(sorted(sub), dtype=np.int64)
    if len(sub_idx) ** 2 > max_pairs:
        sub_idx = sub_idx[:0]
    codes = (sub_idx[:, None] * n + sub_idx[None, :]).ravel()
    remaining = max_pairs - codes.size
    if remaining > 0:
        rng = np.random.default_rng(seed)
        extra = rng.integers(0, n, size=(remaining, 2), dtype=np.int64)
        codes = np.concatenate([codes, extra[:, 0] * n + extra[:, 1]])
    codes = np.unique(codes)
    return np.divmod(codes, n)


def resolve_threads(threads: int | None = None) -> int:
    if threads is None:
        threads = int(os.environ.get("FE_STAB_THREADS", "1") or 1)
    return max(1, int(threads))


def _evaluate_pairs(fn, xs, ys, threads):
    if threads <= 1 or xs.size < 4096:
        return fn(xs, ys)
    chunks = np.array_split(np.arange(xs.size), threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        parts = list(pool.map(lambda idx: fn(xs[idx], ys[idx]), chunks))
    return np.concatenate(parts)


def combination_on_grid(
    terms: Sequence[Term],
    f: FunctionModel,
    grid: SampleGrid,
    max_pairs: int = DEFAULT_MAX_PAIRS,
    seed: int = 0,
    threads: int | None = None,
):
    """Float values of the combination on sampled grid pairs.

    Returns ``(ix, iy, values)``. Polynomials go through their exact
    expansion, so an identity that holds symbolically gives exact zeros.
    """
    ix, iy = sample_pairs(grid, max_pairs, seed)
    xs, ys = grid.array[ix], grid.array[iy]
    if isinstance(f, Polynomial):
        expanded = expand_combination(terms, f)
        fn = expanded.evaluate_many
    else:
        def fn(a, b):
            return combination_many(terms, f, a, b)
    values = _evaluate_pairs(fn, xs, ys, resolve_threads(threads))
    return ix, iy, values


def sup_combination(terms, f, grid, max_pairs=DEFAULT_MAX_PAIRS, seed=0, threads=None) -> ResidualReport:
    ix, iy, values = combination_on_grid(terms, f, grid, max_pairs, seed, threads)
    mags = np.abs(values)
    k = int(np.argmax(mags))  # first maximum = lexicographically smallest pair
    x, y = grid.points[ix[k]], grid.points[iy[k]]
    if f.is_exact:
        sup = abs(combination_at(terms, f, x, y))
    else:
        sup = float(mags[k])
    return ResidualReport(sup, (x, y), int(values.size))


def sup_residual(f: FunctionModel, grid: SampleGrid, max_pairs=DEFAULT_MAX_PAIRS, seed=0, threads=None) -> ResidualReport:
    """max |D_f(x, y)| over sampled grid pairs, with its argmax."""
    return sup_combination(OPERATOR_TERMS, f, grid, max_pairs, seed, threads)
