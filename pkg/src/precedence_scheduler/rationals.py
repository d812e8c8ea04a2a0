"""
Exact rational helpers shared by every module.

All processing times, weights, times and objectives are `fractions.Fraction`.
On the wire they travel as ``"num/den"`` strings (integers as ``"k"``).
"""

from __future__ import annotations

from fractions import Fraction
from typing import Annotated, Any, Iterable, Optional

from pydantic_core import core_schema

RationalLike = Fraction | int | str


def parse_rational(value: Any) -> Fraction:
    """Parse ``"num/den"``, ``"k"``, ints and Fractions. Floats are rejected."""
    if isinstance(value, bool):
        raise ValueError("booleans are not rationals")
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not text:
            raise ValueError("empty rational")
        try:
            return Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"not a rational: {value!r}") from exc
    raise ValueError(f"expected 'num/den' string or integer, got {type(value).__name__}")


def format_rational(value: Fraction) -> str:
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def format_decimal(value: Optional[Fraction], precision: int = 3) -> str:
    """Round half away from zero to ``precision`` places, exactly."""
    if value is None:
        return "inf"
    scale = 10**precision
    scaled = abs(value) * scale
    rounded = int(scaled)
    if scaled - rounded >= Fraction(1, 2):
        rounded += 1
    sign = "-" if value < 0 and rounded else ""
    whole, frac = divmod(rounded, scale)
    if precision == 0:
        return f"{sign}{whole}"
    return f"{sign}{whole}.{frac:0{precision}d}"


def harmonic(k: int) -> Fraction:
    return sum((Fraction(1, i) for i in range(1, k + 1)), Fraction(0))


def rational_sum(values: Iterable[Fraction]) -> Fraction:
    return sum(values, Fraction(0))


class _RationalAnnotation:
    @classmethod
    def __get_pydantic_core_schema__(cls, source_type: Any, handler: Any) -> core_schema.CoreSchema:
        return core_schema.no_info_plain_validator_function(
            parse_rational,
            serialization=core_schema.plain_serializer_function_ser_schema(
                format_rational, when_used="json"
            ),
        )

    @classmethod
    def __get_pydantic_json_schema__(cls, _schema: Any, handler: Any) -> dict[str, Any]:
        return {"type": "string", "pattern": r"^-?\d+(/\d+)?$", "examples": ["3/2", "4"]}


Rational = Annotated[Fraction, _RationalAnnotation]
