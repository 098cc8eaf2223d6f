"""
Arithmetic Backends
Exact (sympy) and float scalars shared by every simulator in the lab
"""

import math
from enum import Enum
from fractions import Fraction
from typing import Any, Iterable, Union

import sympy

Scalar = Union[float, sympy.Expr]

FLOAT_TOLERANCE = 1e-9


class ArithmeticMode(str, Enum):
    """Scalar backend used for amplitudes and probabilities"""
    RATIONAL = "rational"
    FLOAT = "float"


def parse_mode(mode: Union[str, ArithmeticMode, None]) -> ArithmeticMode:
    if mode is None:
        return ArithmeticMode.FLOAT
    if isinstance(mode, ArithmeticMode):
        return mode
    try:
        return ArithmeticMode(str(mode).lower())
    except ValueError:
        from core.errors import InstanceError
        raise InstanceError(f"unknown arithmetic mode: {mode}")


def to_scalar(value: Any, mode: ArithmeticMode) -> Scalar:
    """
    Convert a JSON or Python number into the backend scalar

    Args:
        value: int, float, Fraction, sympy expression or string such as "1/2" or "sqrt(2)/2"
        mode: Target backend

    Returns:
        sympy expression in rational mode, float otherwise
    """
    if mode is ArithmeticMode.RATIONAL:
        if isinstance(value, sympy.Basic):
            return value
        if isinstance(value, Fraction):
            return sympy.Rational(value.numerator, value.denominator)
        if isinstance(value, (bool, int)):
            return sympy.Integer(int(value))
        if isinstance(value, str):
            return sympy.sympify(value, rational=True)
        return sympy.nsimplify(float(value), tolerance=1e-12, rational=False)

    if isinstance(value, str):
        return float(sympy.sympify(value))
    return float(value)


def sqrt(value: Scalar, mode: ArithmeticMode) -> Scalar:
    if mode is ArithmeticMode.RATIONAL:
        return sympy.sqrt(value)
    return math.sqrt(float(value))


def zero(mode: ArithmeticMode) -> Scalar:
    return sympy.Integer(0) if mode is ArithmeticMode.RATIONAL else 0.0


def one(mode: ArithmeticMode) -> Scalar:
    return sympy.Integer(1) if mode is ArithmeticMode.RATIONAL else 1.0


def half(mode: ArithmeticMode) -> Scalar:
    return sympy.Rational(1, 2) if mode is ArithmeticMode.RATIONAL else 0.5


def inverse_power_of_two(exponent: int, mode: ArithmeticMode) -> Scalar:
    if mode is ArithmeticMode.RATIONAL:
        return sympy.Rational(1, 2 ** exponent)
    return 2.0 ** (-exponent)


def total(values: Iterable[Scalar], mode: ArithmeticMode) -> Scalar:
    """Sum in one shot through sympy.Add in rational mode"""
    if mode is ArithmeticMode.RATIONAL:
        return sympy.expand(sympy.Add(*list(values)))
    return float(math.fsum(float(v) for v in values))


def simplify(value: Scalar) -> Scalar:
    if isinstance(value, sympy.Basic):
        return sympy.simplify(value)
    return value


def exact_equal(a: Any, b: Any) -> bool:
    """Exact equality for sympy expressions (radicals included)"""
    diff = sympy.simplify(sympy.sympify(a) - sympy.sympify(b))
    return diff == 0


def close(a: Any, b: Any, tolerance: float = FLOAT_TOLERANCE) -> bool:
    return abs(float(a) - float(b)) <= tolerance


def as_float(value: Any) -> float:
    return float(value)


def as_fraction(value: Any) -> Fraction:
    """Rational scalar as a Fraction; raises for irrational values"""
    if isinstance(value, Fraction):
        return value
    expr = sympy.nsimplify(value) if isinstance(value, sympy.Basic) else sympy.Rational(value)
    if not expr.is_Rational:
        raise ValueError(f"not rational: {value}")
    return Fraction(int(expr.p), int(expr.q))


def to_text(value: Any) -> str:
    """Stable textual form of a scalar used in reports"""
    if isinstance(value, sympy.Basic):
        return str(sympy.simplify(value))
    if isinstance(value, Fraction):
        return f"{value.numerator}/{value.denominator}" if value.denominator != 1 else str(value.numerator)
    return repr(float(value))
