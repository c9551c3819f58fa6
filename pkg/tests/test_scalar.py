from fractions import Fraction

import pytest

from fe_stab.errors import ModeMismatch
from fe_stab.scalar import common_mode, isclose, mode_of, parse_scalar, scalar_to_json, scale_pow2


def test_modes():
    assert mode_of(3) == mode_of(Fraction(1, 3)) == "exact"
    assert mode_of(0.5) == "float"
    assert common_mode(1, Fraction(2)) == "exact"
    with pytest.raises(ModeMismatch):
        common_mode(1, 0.5)
    with pytest.raises(TypeError):
        mode_of(True)


def test_parsing_keeps_strings_exact():
    assert parse_scalar("1/3") == Fraction(1, 3)
    assert parse_scalar("0.1") == Fraction(1, 10)
    assert parse_scalar(0.25) == 0.25 and isinstance(parse_scalar(0.25), float)
    assert scalar_to_json(Fraction(22, 105)) == "22/105"
    assert scalar_to_json(0.1) == 0.1


def test_power_of_two_scaling_keeps_mode():
    assert scale_pow2(3, -2) == Fraction(3, 4)
    assert scale_pow2(0.75, 3) == 6.0
    assert isinstance(scale_pow2(Fraction(1), 5), Fraction)


def test_isclose():
    assert isclose(1.0, 1.0 + 1e-12)
    assert not isclose(1.0, 1.001)
