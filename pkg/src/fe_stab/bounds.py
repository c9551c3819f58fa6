"""Control functions and the stability-bound series.

The series start at index ``i = (s-1)/2``, written here with ``j = i + 1``:
``j >= 1`` when the iteration halves its argument (s = +1) and ``j >= 0``
when it doubles it (s = -1). The jth quartic term is ``2**(4sj) / 16 * phi(0, x / 2**(sj))``
and the cubic term uses ``2**(3sj) / 8``.

For the built-in control functions ``phi(0, y)`` is a geometric sequence
along the dyadic orbit, so the tail of a truncated sum is known in closed
form and the truncation is certified.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .errors import DivergentSeries, DomainError, InadmissibleControl
from .scalar import Scalar, parse_scalar, scalar_to_json

__all__ = [
    "ControlFunction",
    "Constant",
    "PowerSum",
    "ProductSum",
    "Custom",
    "SeriesEvaluation",
    "phi_eval",
    "select_direction",
    "convergence_precheck",
    "quartic_series_bound",
    "cubic_series_bound",
    "combined_bound",
    "closed_form_bound",
    "control_from_json",
]

DEFAULT_SERIES_TOL = 1e-12
MAX_TERMS = 100_000
HEURISTIC_TERMS = 64


class ControlFunction:
    def __call__(self, x, y):
        return phi_eval(self, x, y)

    def to_json(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Constant(ControlFunction):
    epsilon: Scalar

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be nonnegative")

    def to_json(self):
        return {"kind": "constant", "epsilon": scalar_to_json(self.epsilon)}


@dataclass(frozen=True)
class PowerSum(ControlFunction):
    """theta * (|x|^p + |y|^p)"""

    theta: Scalar
    p: Scalar

    def __post_init__(self):
        if self.theta < 0:
            raise ValueError("theta must be nonnegative")

    def to_json(self):
        return {"kind": "power_sum", "theta": scalar_to_json(self.theta), "p": scalar_to_json(self.p)}


@dataclass(frozen=True)
class ProductSum(ControlFunction):
    """theta * (|x|^u |y|^v + |x|^p + |y|^p)"""

    theta: Scalar
    u: Scalar
    v: Scalar
    p: Scalar

    def __post_init__(self):
        if self.theta < 0:
            raise ValueError("theta must be nonnegative")

    def to_json(self):
        return {
            "kind": "product_sum",
            "theta": scalar_to_json(self.theta),
            "u": scalar_to_json(self.u),
            "v": scalar_to_json(self.v),
            "p": scalar_to_json(self.p),
        }


@dataclass(frozen=True)
class Custom(ControlFunction):
    """Black-box bound; series results for it are heuristic only."""

    fn: Callable = field(compare=False)
    name: str = "custom"

    def to_json(self):
        return {"kind": "custom", "name": self.name}


BUILTINS = (Constant, PowerSum, ProductSum)


def _is_int(p) -> bool:
    return isinstance(p, (int, Fraction)) and Fraction(p).denominator == 1


def _abs_pow(x, p):
    """|x|**p with 0**0 = 1; exact for rational x and integer p."""
    if x == 0:
        if p > 0:
            return Fraction(0) if isinstance(x, (int, Fraction)) else 0.0
        if p == 0:
            return Fraction(1) if isinstance(x, (int, Fraction)) else 1.0
        raise DomainError(f"|0|^{p} is undefined for a negative exponent")
    if isinstance(x, (int, Fraction)) and _is_int(p):
        return abs(Fraction(x)) ** int(p)
    return abs(float(x)) ** float(p)


def _mul(theta, value):
    if isinstance(theta, float) or isinstance(value, float):
        return float(theta) * float(value)
    return Fraction(theta) * value


def phi_eval(phi: ControlFunction, x, y) -> Scalar:
    """phi(x, y) >= 0; raises DomainError at 0 for negative exponents."""
    if isinstance(phi, Constant):
        return phi.epsilon
    if isinstance(phi, PowerSum):
        return _mul(phi.theta, _abs_pow(x, phi.p) + _abs_pow(y, phi.p))
    if isinstance(phi, ProductSum):
        return _mul(phi.theta, _abs_pow(x, phi.u) * _abs_pow(y, phi.v) + _abs_pow(x, phi.p) + _abs_pow(y, phi.p))
    if isinstance(phi, Custom):
        value = phi.fn(x, y)
        if value < 0:
            raise ValueError(f"custom control returned a negative value at ({x}, {y})")
        return value
    raise TypeError(f"not a control function: {phi!r}")


def _axis_value(phi: ControlFunction, y):
    """phi(0, y) as used by the bound series.

    Terms carrying a power of the zero first argument are dropped, which
    is the reading under which the power-sum closed forms hold for every
    admissible exponent, including p <= 0.
    """
    if isinstance(phi, Constant):
        return phi.epsilon
    if isinstance(phi, (PowerSum, ProductSum)):
        return _mul(phi.theta, _abs_pow(y, phi.p))
    return phi_eval(phi, 0, y)


def _regime(exponent) -> int:
    if exponent > 4:
        return 1
    if exponent < 3:
        return -1
    return 0


def select_direction(phi: ControlFunction) -> int:
    """+1 (halving) for growth beyond quartic, -1 (doubling) below cubic."""
    if isinstance(phi, Constant):
        return -1
    if isinstance(phi, PowerSum):
        s = _regime(phi.p)
        if s == 0:
            raise InadmissibleControl(f"exponent p={phi.p} lies in the excluded band [3, 4]")
        return s
    if isinstance(phi, ProductSum):
        s_p, s_uv = _regime(phi.p), _regime(phi.u + phi.v)
        if s_p == 0 or s_uv == 0:
            raise InadmissibleControl(f"exponents p={phi.p}, u+v={phi.u + phi.v} must avoid [3, 4]")
        if s_p != s_uv:
            raise InadmissibleControl(f"exponents p={phi.p} and u+v={phi.u + phi.v} fall in opposite regimes")
        return s_p
    if isinstance(phi, Custom):
        for s in (-1, 1):
            if convergence_precheck(phi, s):
                return s
        raise InadmissibleControl("custom control passes the convergence test in neither direction")
    raise TypeError(f"not a control function: {phi!r}")


def _check_direction(s):
    if s not in (1, -1):
        raise ValueError(f"direction must be +1 or -1, got {s!r}")


def convergence_precheck(phi: ControlFunction, s: int, degrees=(3, 4)) -> bool:
    """Whether the bound series and the scaled-residual limits converge.

    Exact for the built-in controls (ratio of consecutive terms is
    2**(s*(d - p))). For Custom controls the ratio is measured over the
    first 64 terms at x = +-1, a heuristic.
    """
    _check_direction(s)
    if isinstance(phi, Constant):
        return s == -1
    if isinstance(phi, (PowerSum, ProductSum)):
        exponents = [phi.p] if isinstance(phi, PowerSum) else [phi.p, phi.u + phi.v]
        return all(s * (e - d) > 0 for e in exponents for d in degrees)
    if isinstance(phi, Custom):
        for d in degrees:
            for x in (1.0, -1.0):
                terms = [_custom_term(phi, d, s, x, j) for j in range(HEURISTIC_TERMS)]
                if not all(math.isfinite(t) for t in terms):
                    return False
                tail = terms[-8:]
                if tail[0] > 0 and not tail[-1] < tail[0]:
                    return False
            limit = [2.0 ** (d * s * n) * phi.fn(2.0 ** (-s * n), 2.0 ** (-s * n)) for n in (32, 64)]
            if limit[1] > 0 and not limit[1] < limit[0]:
                return False
        return True
    raise TypeError(f"not a control function: {phi!r}")


def _custom_term(phi, d, s, x, j):
    return 2.0 ** (d * s * j) / 2**d * float(phi.fn(0.0, math.ldexp(float(x), -s * j)))


@dataclass(frozen=True)
class SeriesEvaluation:
    value: Scalar
    tail_bound: Scalar
    terms_used: int
    exact_closed_form: Scalar | None = None
    closed_form: Scalar | None = None
    discrepancy: bool | None = None
    rigorous: bool = True
    direction: int = -1

    @property
    def total(self) -> Scalar:
        """value + tail_bound: a certified upper bound for the full series."""
        return self.value + self.tail_bound

    def to_json(self):
        return {
            "value": scalar_to_json(self.value),
            "tail_bound": scalar_to_json(self.tail_bound),
            "terms_used": self.terms_used,
            "exact_closed_form": scalar_to_json(self.exact_closed_form),
            "closed_form": scalar_to_json(self.closed_form),
            "discrepancy": self.discrepancy,
            "rigorous": self.rigorous,
            "direction": self.direction,
        }


def _to_mode(value, exact):
    return Fraction(value) if exact else float(value)


def _geometric_components(phi, x, s, degrees, symmetric):
    """[(c, r)] such that the jth series term is sum c * r**j."""
    exact = (
        all(isinstance(v, (int, Fraction)) for v in _params(phi))
        and isinstance(x, (int, Fraction))
        and (isinstance(phi, Constant) or _is_int(phi.p))
    )
    if symmetric:
        axis = _to_mode(_axis_value(phi, x), exact) + _to_mode(_axis_value(phi, -x), exact)
    else:
        axis = _to_mode(_axis_value(phi, x), exact)
    if isinstance(phi, Constant):
        rho = _to_mode(1, exact)
    elif exact:
        rho = Fraction(2) ** (-s * int(phi.p))
    else:
        rho = 2.0 ** (-s * float(phi.p))
    comps = []
    for d in degrees:
        # symmetrised terms carry 2**(ds j) / 2**(d+1) per the combined bound
        weight = Fraction(1, 2**d) if not symmetric else Fraction(1, 2 ** (d + 1))
        comps.append((_to_mode(weight, exact) * axis, _to_mode(Fraction(2) ** (d * s), exact) * rho))
    return comps, exact


def _params(phi):
    if isinstance(phi, Constant):
        return (phi.epsilon,)
    if isinstance(phi, PowerSum):
        return (phi.theta,)
    return (phi.theta,)


def _sum_geometric(comps, j0, tol, exact):
    zero = Fraction(0) if exact else 0.0
    closed = sum((c * r**j0 / (1 - r) for c, r in comps), zero)
    terms = []
    j = j0
    while True:
        tail = sum((c * r**j / (1 - r) for c, r in comps), zero)
        value = sum(terms, zero) if exact else math.fsum(terms)
        if tail == 0 or float(tail) <= tol * abs(float(value)) or len(terms) >= MAX_TERMS:
            return value, tail, len(terms), closed
        terms.append(sum((c * r**j for c, r in comps), zero))
        j += 1


def _sum_heuristic(term, j0, tol):
    terms = []
    j = j0
    while True:
        terms.append(float(term(j)))
        j += 1
        if len(terms) >= 9:
            recent = terms[-9:]
            ratios = [b / a for a, b in zip(recent, recent[1:]) if a > 0]
            r_hat = max(ratios) if ratios else 0.0
            if r_hat >= 1 and len(terms) >= HEURISTIC_TERMS:
                raise DivergentSeries("empirical term ratio does not fall below 1")
            if r_hat < 1:
                value = math.fsum(terms)
                tail = terms[-1] * r_hat / (1 - r_hat)
                if tail <= tol * abs(value) or len(terms) >= MAX_TERMS:
                    return value, tail, len(terms)
        if len(terms) >= MAX_TERMS:
            raise DivergentSeries("series did not settle within the term budget")


def _series(phi, x, s, tol, degrees, symmetric):
    _check_direction(s)
    if not convergence_precheck(phi, s, degrees):
        raise DivergentSeries(f"series diverges for {phi!r} in direction s={s:+d}")
    j0 = 1 if s == 1 else 0
    if isinstance(phi, BUILTINS):
        comps, exact = _geometric_components(phi, x, s, degrees, symmetric)
        value, tail, used, closed = _sum_geometric(comps, j0, tol, exact)
        return SeriesEvaluation(value, tail, used, exact_closed_form=closed, direction=s)

    def term(j):
        y = math.ldexp(float(x), -s * j)
        total = 0.0
        for d in degrees:
            scale = 2.0 ** (d * s * j)
            if symmetric:
                total += scale / 2 ** (d + 1) * (float(phi.fn(0.0, y)) + float(phi.fn(0.0, -y)))
            else:
                total += scale / 2**d * float(phi.fn(0.0, y))
        return total

    value, tail, used = _sum_heuristic(term, j0, tol)
    return SeriesEvaluation(value, tail, used, rigorous=False, direction=s)


def quartic_series_bound(phi: ControlFunction, x, s: int, tol: float = DEFAULT_SERIES_TOL) -> SeriesEvaluation:
    """Bound on |f(x) - Q(x)| for an even f whose residual is bounded by phi."""
    return _series(phi, x, s, tol, (4,), symmetric=False)


def cubic_series_bound(phi: ControlFunction, x, s: int, tol: float = DEFAULT_SERIES_TOL) -> SeriesEvaluation:
    """Bound on |f(x) - C(x)| for an odd f whose residual is bounded by phi."""
    return _series(phi, x, s, tol, (3,), symmetric=False)


def combined_bound(phi: ControlFunction, x, s: int, tol: float = DEFAULT_SERIES_TOL) -> SeriesEvaluation:
    """Bound on |f(x) - Q(x) - C(x)| for a general origin-anchored f.

    For built-in controls the closed form is attached as well, and
    ``discrepancy`` records whether it disagrees with the summed series.
    """
    ev = _series(phi, x, s, tol, (4, 3), symmetric=True)
    if not isinstance(phi, BUILTINS):
        return ev
    try:
        reference_form = closed_form_bound(phi, x)
    except (InadmissibleControl, DomainError):
        return ev
    if select_direction(phi) != s:
        return ev
    reference = ev.exact_closed_form
    if isinstance(reference_form, Fraction) and isinstance(reference, Fraction):
        mismatch = reference_form != reference
    else:
        mismatch = not math.isclose(float(reference_form), float(reference), rel_tol=1e-9, abs_tol=1e-300)
    return SeriesEvaluation(
        ev.value, ev.tail_bound, ev.terms_used, ev.exact_closed_form,
        closed_form=reference_form, discrepancy=mismatch, rigorous=True, direction=s,
    )


def closed_form_bound(phi: ControlFunction, x) -> Scalar:
    """The closed-form constant times the growth factor at x.

    Constant eps: 22 eps / 105. Power sums: theta |x|^p (1/(2^p-16) + 1/(2^p-8))
    for p > 4 and theta |x|^p (1/(16-2^p) + 1/(8-2^p)) for p < 3. Product
    sums use the power-sum expression with the same p. Custom controls have
    no closed form (returns None).
    """
    if isinstance(phi, Custom):
        return None
    s = select_direction(phi)
    if isinstance(phi, Constant):
        eps = phi.epsilon
        return Fraction(22, 105) * eps if isinstance(eps, (int, Fraction)) else 22 * float(eps) / 105
    exact = isinstance(phi.theta, (int, Fraction)) and isinstance(x, (int, Fraction)) and _is_int(phi.p)
    if exact:
        two_p = Fraction(2) ** int(phi.p)
        growth = Fraction(phi.theta) * _abs_pow(x, phi.p)
    else:
        two_p = 2.0 ** float(phi.p)
        growth = float(phi.theta) * float(_abs_pow(x, phi.p))
    if s == 1:
        return growth * (1 / (two_p - 16) + 1 / (two_p - 8))
    return growth * (1 / (16 - two_p) + 1 / (8 - two_p))


def control_from_json(desc) -> ControlFunction:
    if not isinstance(desc, dict) or "kind" not in desc:
        raise ValueError(f"control description must be an object with a 'kind': {desc!r}")
    kind = desc["kind"]
    fields_by_kind = {
        "constant": ("epsilon",),
        "power_sum": ("theta", "p"),
        "product_sum": ("theta", "u", "v", "p"),
    }
    if kind not in fields_by_kind:
        raise ValueError(f"unknown control kind {kind!r}")
    names = fields_by_kind[kind]
    extra = set(desc) - {"kind", *names}
    if extra:
        raise ValueError(f"unknown keys for {kind!r} control: {sorted(extra)}")
    missing = [n for n in names if n not in desc]
    if missing:
        raise ValueError(f"missing keys for {kind!r} control: {missing}")
    values = [parse_scalar(desc[n]) for n in names]
    return {"constant": Constant, "power_sum": PowerSum, "product_sum": ProductSum}[kind](*values)
