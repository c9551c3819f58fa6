"""One-variable function models, dyadic sample grids and parity splitting.

Three kinds of model are exposed:

* :class:`Polynomial` -- exact rational coefficients, evaluates exactly on
  Fractions and in double precision on floats.
* :class:`Perturbed` -- a base model plus a deterministic bounded noise
  ``n(x)`` with ``|n(x)| <= delta`` and ``n(0) = 0``.
* :class:`Tabulated` -- values stored at exact dyadic keys, no interpolation.

:class:`ParityPart` is a lazy even/odd projection used by the direct-method
iteration, which needs the parts at points outside any finite grid.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from types import MappingProxyType
from typing import Mapping, Sequence

import numpy as np

from .errors import AsymmetricGrid, BadRange, ModeMismatch, TabulatedMiss
from .scalar import Scalar, as_scalar, mode_of, parse_scalar, scalar_to_json, to_fraction

__all__ = [
    "FunctionModel",
    "Polynomial",
    "Perturbed",
    "Tabulated",
    "ParityPart",
    "SampleGrid",
    "NormReport",
    "make_polynomial",
    "make_perturbed",
    "make_tabulated",
    "evaluate",
    "parity_parts",
    "decompose_parity",
    "dyadic_grid",
    "tabulate",
    "sup_norm_on_grid",
    "model_from_json",
    "model_to_json",
]

_U64 = np.uint64


def _splitmix64(z: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore"):
        z = z + _U64(0x9E3779B97F4A7C15)
        z = (z ^ (z >> _U64(30))) * _U64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> _U64(27))) * _U64(0x94D049BB133111EB)
        return z ^ (z >> _U64(31))


def _point_keys(xs: np.ndarray) -> np.ndarray:
    # bit pattern of the double is a canonical encoding of a float point; -0.0 folded into 0.0
    xs = np.where(xs == 0.0, 0.0, np.asarray(xs, dtype=np.float64))
    return np.ascontiguousarray(xs).view(np.uint64)


def _fraction_key(x: Fraction) -> int:
    as_float = float(x)
    if math.isfinite(as_float) and Fraction(as_float) == x:
        return int(_point_keys(np.array([as_float]))[0])
    digest = hashlib.blake2b(f"{x.numerator}/{x.denominator}".encode(), digest_size=8).digest()
    return int.from_bytes(digest, "little")


def _noise_from_keys(keys: np.ndarray, seed: int, delta: float) -> np.ndarray:
    seed_mix = _splitmix64(np.array([seed & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64))[0]
    h = _splitmix64(_splitmix64(keys) ^ seed_mix)
    u = (h >> _U64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)  # [0, 1)
    return delta * (2.0 * u - 1.0)


class FunctionModel:
    """Common interface. Subclasses are immutable."""

    is_exact: bool = False

    def __call__(self, x) -> Scalar:
        raise NotImplementedError

    def evaluate_many(self, xs: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    @property
    def noise_amplitude(self) -> float:
        """Declared bound on the deviation from an exact model."""
        return 0.0

    @property
    def origin_anchored(self) -> bool:
        return self(Fraction(0)) == 0

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Polynomial(FunctionModel):
    coeffs: tuple  # c0, c1, ..., cd as Fractions

    is_exact = True

    def __post_init__(self):
        cs = [Fraction(c) for c in self.coeffs]
        if not cs:
            raise ValueError("coefficient list must be nonempty")
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @property
    def degree(self) -> int:
        return 0 if self.is_zero else len(self.coeffs) - 1

    @property
    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    @cached_property
    def _float_coeffs(self):
        return tuple(float(c) for c in self.coeffs)

    def __call__(self, x):
        if mode_of(x) == "exact":
            x = Fraction(x)
            acc = Fraction(0)
            for c in reversed(self.coeffs):
                acc = acc * x + c
            return acc
        x = float(x)
        acc = 0.0
        for c in reversed(self._float_coeffs):
            acc = acc * x + c
        return acc

    def evaluate_many(self, xs):
        xs = np.asarray(xs, dtype=np.float64)
        acc = np.zeros_like(xs)
        for c in reversed(self._float_coeffs):
            acc = acc * xs + c
        return acc

    def parity_part(self, sign: int) -> "Polynomial":
        keep = 0 if sign > 0 else 1
        return Polynomial(tuple(c if i % 2 == keep else Fraction(0) for i, c in enumerate(self.coeffs)))

    def scaled(self, factor) -> "Polynomial":
        factor = Fraction(factor)
        return Polynomial(tuple(factor * c for c in self.coeffs))

    def __str__(self):
        out = ""
        for i, c in enumerate(self.coeffs):
            if not c:
                continue
            mag = abs(c)
            body = str(mag) if i == 0 else (f"x^{i}" if mag == 1 else f"{mag}*x^{i}")
            sign = "-" if c < 0 else "+"
            out += (f" {sign} " if out else ("-" if c < 0 else "")) + body
        return out or "0"

    def to_json(self):
        return {"kind": "poly", "coeffs": [str(c) for c in self.coeffs]}


@dataclass(frozen=True)
class Perturbed(FunctionModel):
    base: FunctionModel
    delta: float
    seed: int

    def __post_init__(self):
        if not self.delta >= 0:
            raise ValueError(f"noise amplitude must be nonnegative, got {self.delta!r}")
        object.__setattr__(self, "delta", float(self.delta))
        object.__setattr__(self, "seed", int(self.seed))

    @property
    def noise_amplitude(self):
        return self.delta + self.base.noise_amplitude

    def noise(self, x) -> float:
        if x == 0:
            return 0.0
        key = np.array([_fraction_key(to_fraction(x))], dtype=np.uint64)
        return float(_noise_from_keys(key, self.seed, self.delta)[0])

    def noise_many(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=np.float64)
        out = _noise_from_keys(_point_keys(xs), self.seed, self.delta)
        out[xs == 0.0] = 0.0
        return out

    def __call__(self, x):
        return float(self.base(x)) + self.noise(x)

    def evaluate_many(self, xs):
        xs = np.asarray(xs, dtype=np.float64)
        return self.base.evaluate_many(xs) + self.noise_many(xs)

    def to_json(self):
        return {"kind": "perturbed", "base": self.base.to_json(), "delta": self.delta, "seed": self.seed}


@dataclass(frozen=True, eq=False)
class Tabulated(FunctionModel):
    entries: Mapping
    declared_noise: float = 0.0

    def __post_init__(self):
        table = {to_fraction(k): as_scalar(v) for k, v in dict(self.entries).items()}
        object.__setattr__(self, "entries", MappingProxyType(table))

    @cached_property
    def is_exact(self):
        return all(isinstance(v, Fraction) for v in self.entries.values())

    @property
    def noise_amplitude(self):
        return self.declared_noise

    def _lookup(self, key: Fraction):
        try:
            return self.entries[key]
        except KeyError:
            raise TabulatedMiss(f"point {key} is not stored in the table") from None

    def __call__(self, x):
        value = self._lookup(to_fraction(x))
        if mode_of(x) == "float":
            return float(value)
        return value

    def evaluate_many(self, xs):
        xs = np.asarray(xs, dtype=np.float64)
        return np.array([float(self._lookup(Fraction(float(x)))) for x in xs.ravel()]).reshape(xs.shape)

    def to_json(self):
        items = sorted(self.entries.items())
        return {"kind": "table", "entries": {str(k): scalar_to_json(v) for k, v in items}}


@dataclass(frozen=True)
class ParityPart(FunctionModel):
    """Lazy ``(f(x) + sign*f(-x)) / 2``; sign=+1 gives the even part."""

    base: FunctionModel
    sign: int

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError("sign must be +1 or -1")

    @property
    def is_exact(self):
        return self.base.is_exact

    @property
    def noise_amplitude(self):
        return self.base.noise_amplitude

    def __call__(self, x):
        base = self.base
        if isinstance(base, Perturbed):
            # split structurally so the smooth part never goes through a cancelling difference
            smooth = parity_parts(base.base)[0 if self.sign > 0 else 1](x)
            return float(smooth) + 0.5 * (base.noise(x) + self.sign * base.noise(-x))
        return (base(x) + self.sign * base(-x)) / 2

    def evaluate_many(self, xs):
        xs = np.asarray(xs, dtype=np.float64)
        base = self.base
        if isinstance(base, Perturbed):
            smooth = parity_parts(base.base)[0 if self.sign > 0 else 1].evaluate_many(xs)
            return smooth + 0.5 * (base.noise_many(xs) + self.sign * base.noise_many(-xs))
        return 0.5 * (base.evaluate_many(xs) + self.sign * base.evaluate_many(-xs))

    def to_json(self):
        return {"kind": "even" if self.sign > 0 else "odd", "base": self.base.to_json()}


@dataclass(frozen=True)
class SampleGrid:
    lo: Fraction
    hi: Fraction
    depth: int
    points: tuple

    @cached_property
    def array(self) -> np.ndarray:
        return np.array([float(p) for p in self.points], dtype=np.float64)

    @property
    def is_symmetric(self) -> bool:
        pts = set(self.points)
        return all(-p in pts for p in pts)

    def __len__(self):
        return len(self.points)

    def to_json(self):
        return {"lo": str(self.lo), "hi": str(self.hi), "depth": self.depth}


@dataclass(frozen=True)
class NormReport:
    sup: Scalar
    argmax: Fraction

    def to_json(self):
        return {"sup": scalar_to_json(self.sup), "argmax": str(self.argmax)}


def make_polynomial(coefficients: Sequence) -> Polynomial:
    """Polynomial sum c_i x^i from c_0..c_d (ints, Fractions or "p/q" strings)."""
    if len(coefficients) == 0:
        raise ValueError("coefficient list must be nonempty")
    return Polynomial(tuple(parse_scalar(c) if isinstance(c, str) else Fraction(c) for c in coefficients))


def make_perturbed(base: FunctionModel, delta: float, seed: int) -> Perturbed:
    return Perturbed(base, delta, seed)


def make_tabulated(entries: Mapping, declared_noise: float = 0.0) -> Tabulated:
    return Tabulated(entries, declared_noise)


def evaluate(model: FunctionModel, x, exact: bool | None = None) -> Scalar:
    """Evaluate ``model`` at ``x``.

    ``exact=None`` returns the model's native result for the input's mode.
    ``exact=True`` insists on an error-free rational result; ``exact=False``
    always returns a float.
    """
    if exact is None:
        return model(x)
    if exact:
        if mode_of(x) != "exact":
            raise ModeMismatch("exact evaluation requested at a float point")
        if not model.is_exact:
            raise ModeMismatch(f"{type(model).__name__} model cannot be evaluated exactly")
        return model(Fraction(x))
    return float(model(x))


def parity_parts(model: FunctionModel) -> tuple[FunctionModel, FunctionModel]:
    """Even and odd parts as models evaluable anywhere ``model`` is."""
    if isinstance(model, Polynomial):
        return model.parity_part(1), model.parity_part(-1)
    return ParityPart(model, 1), ParityPart(model, -1)


def decompose_parity(model: FunctionModel, grid: SampleGrid) -> tuple[Tabulated, Tabulated]:
    """Tabulate ``f_e`` and ``f_o`` on a symmetric grid."""
    if not grid.is_symmetric:
        raise AsymmetricGrid("grid must be symmetric about 0 to split parity")
    even, odd = parity_parts(model)
    noise = model.noise_amplitude
    if model.is_exact:
        ev = {p: even(p) for p in grid.points}
        od = {p: odd(p) for p in grid.points}
    else:
        xs = grid.array
        ev = dict(zip(grid.points, map(float, even.evaluate_many(xs))))
        od = dict(zip(grid.points, map(float, odd.evaluate_many(xs))))
    return Tabulated(ev, noise), Tabulated(od, noise)


def dyadic_grid(lo, hi, depth: int) -> SampleGrid:
    """All k/2**depth in [lo, hi] for a range symmetric about zero."""
    lo, hi = parse_scalar(lo), parse_scalar(hi)
    if mode_of(lo) != "exact" or mode_of(hi) != "exact":
        lo, hi = to_fraction(lo), to_fraction(hi)
    if not isinstance(depth, int) or depth < 0:
        raise BadRange(f"depth must be a nonnegative integer, got {depth!r}")
    if not (lo < 0 < hi) or lo != -hi:
        raise BadRange(f"need lo < 0 < hi with lo = -hi, got [{lo}, {hi}]")
    scale = 2**depth
    kmax = math.floor(hi * scale)
    points = tuple(Fraction(k, scale) for k in range(-kmax, kmax + 1))
    return SampleGrid(lo, hi, depth, points)


def tabulate(model: FunctionModel, grid: SampleGrid, pad: int = 4) -> Tabulated:
    """Tabulate ``model`` on the dyadic grid of the same depth widened by ``pad``.

    A padding of 4 keeps every argument of the difference operator
    (at most 3|x| + |y|) inside the table for grid pairs.
    """
    wide = dyadic_grid(-pad * grid.hi, pad * grid.hi, grid.depth)
    if model.is_exact:
        values = {p: model(p) for p in wide.points}
    else:
        values = dict(zip(wide.points, map(float, model.evaluate_many(wide.array))))
    return Tabulated(values, model.noise_amplitude)


def sup_norm_on_grid(model: FunctionModel, grid: SampleGrid) -> NormReport:
    """max |f(x)| over the grid; ties go to the smallest point."""
    if model.is_exact:
        best, arg = None, None
        for p in grid.points:
            v = abs(model(p))
            if best is None or v > best:
                best, arg = v, p
        return NormReport(best, arg)
    values = np.abs(model.evaluate_many(grid.array))
    i = int(np.argmax(values))
    return NormReport(float(values[i]), grid.points[i])


def model_from_json(desc) -> FunctionModel:
    if not isinstance(desc, dict) or "kind" not in desc:
        raise ValueError(f"model description must be an object with a 'kind': {desc!r}")
    kind = desc["kind"]
    allowed = {
        "poly": {"kind", "coeffs"},
        "perturbed": {"kind", "base", "delta", "seed"},
        "table": {"kind", "entries", "noise"},
        "even": {"kind", "base"},
        "odd": {"kind", "base"},
    }
    if kind not in allowed:
        raise ValueError(f"unknown model kind {kind!r}")
    extra = set(desc) - allowed[kind]
    if extra:
        raise ValueError(f"unknown keys for {kind!r} model: {sorted(extra)}")
    if kind == "poly":
        return make_polynomial([parse_scalar(c) for c in desc["coeffs"]])
    if kind == "perturbed":
        delta = float(parse_scalar(desc["delta"]))
        return make_perturbed(model_from_json(desc["base"]), delta, int(desc["seed"]))
    if kind == "table":
        entries = {parse_scalar(k): parse_scalar(v) for k, v in desc["entries"].items()}
        return make_tabulated(entries, float(parse_scalar(desc.get("noise", 0))))
    return parity_parts(model_from_json(desc["base"]))[0 if kind == "even" else 1]


def model_to_json(model: FunctionModel) -> dict:
    return model.to_json()
