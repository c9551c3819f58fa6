"""Exact bivariate polynomials over the rationals."""

from __future__ import annotations

from fractions import Fraction
from math import comb
from typing import Iterable, Mapping

import numpy as np


class BivariatePolynomial:
    """Sparse polynomial in x and y: a map (i, j) -> coefficient of x^i y^j.

    Zero coefficients are never stored, so the zero polynomial has no terms
    and equality is plain dictionary equality.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping | Iterable = ()):
        acc: dict[tuple[int, int], Fraction] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for (i, j), c in items:
            if i < 0 or j < 0:
                raise ValueError("exponents must be nonnegative")
            c = Fraction(c)
            acc[(i, j)] = acc.get((i, j), Fraction(0)) + c
        self._terms = {k: v for k, v in acc.items() if v != 0}

    @classmethod
    def constant(cls, c) -> "BivariatePolynomial":
        return cls({(0, 0): c})

    @classmethod
    def linear(cls, alpha, beta) -> "BivariatePolynomial":
        """The form alpha*x + beta*y."""
        return cls({(1, 0): alpha, (0, 1): beta})

    @classmethod
    def from_univariate(cls, coeffs, alpha, beta) -> "BivariatePolynomial":
        """Expand sum_k c_k (alpha*x + beta*y)^k by the binomial theorem."""
        alpha, beta = Fraction(alpha), Fraction(beta)
        acc: dict[tuple[int, int], Fraction] = {}
        for k, c in enumerate(coeffs):
            if c == 0:
                continue
            for m in range(k + 1):
                term = Fraction(c) * comb(k, m) * alpha**m * beta ** (k - m)
                if term:
                    acc[(m, k - m)] = acc.get((m, k - m), Fraction(0)) + term
        return cls(acc)

    @property
    def terms(self) -> dict:
        return dict(self._terms)

    @property
    def is_zero(self) -> bool:
        return not self._terms

    @property
    def total_degree(self) -> int:
        return max((i + j for i, j in self._terms), default=0)

    def coefficient(self, i: int, j: int) -> Fraction:
        return self._terms.get((i, j), Fraction(0))

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = BivariatePolynomial.constant(other)
        if not isinstance(other, BivariatePolynomial):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            other = BivariatePolynomial.constant(other)
        return BivariatePolynomial(list(self._terms.items()) + list(other._terms.items()))

    __radd__ = __add__

    def __neg__(self):
        return BivariatePolynomial({k: -v for k, v in self._terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return BivariatePolynomial({k: v * other for k, v in self._terms.items()})
        acc: dict[tuple[int, int], Fraction] = {}
        for (i1, j1), c1 in self._terms.items():
            for (i2, j2), c2 in other._terms.items():
                key = (i1 + i2, j1 + j2)
                acc[key] = acc.get(key, Fraction(0)) + c1 * c2
        return BivariatePolynomial(acc)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("negative powers are not polynomials")
        result = BivariatePolynomial.constant(1)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __call__(self, x, y):
        """Exact value at rational (x, y), float value at float inputs."""
        return sum((c * x**i * y**j for (i, j), c in self._terms.items()), Fraction(0) if isinstance(x, (int, Fraction)) else 0.0)

    def evaluate_many(self, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.float64)
        ys = np.asarray(ys, dtype=np.float64)
        out = np.zeros(np.broadcast(xs, ys).shape)
        for (i, j), c in self._terms.items():
            out += float(c) * xs**i * ys**j
        return out

    def sorted_terms(self):
        return sorted(self._terms.items(), key=lambda kv: (-(kv[0][0] + kv[0][1]), -kv[0][0]))

    def __str__(self):
        if self.is_zero:
            return "0"
        parts = []
        for (i, j), c in self.sorted_terms():
            mono = "*".join(s for s in (_pow("x", i), _pow("y", j)) if s)
            if not mono:
                parts.append(str(c))
            elif c == 1:
                parts.append(mono)
            elif c == -1:
                parts.append("-" + mono)
            else:
                parts.append(f"{c}*{mono}")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self):
        return f"BivariatePolynomial({str(self)!r})"

    def to_json(self):
        return [[i, j, str(c)] for (i, j), c in self.sorted_terms()]


def _pow(var, k):
    if k == 0:
        return ""
    return var if k == 1 else f"{var}^{k}"
