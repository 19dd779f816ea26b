"""
util: Utility Functions for i3audit

This module provides helper functions for the i3audit package: exact rational parsing, decimal rendering of
rationals for presentation, JSON serialization helpers and table printing.
"""
import logging
import pandas as pd

from enum import Enum
from numbers import Rational
from fractions import Fraction
from typing import Union
from decimal import Decimal, ROUND_HALF_EVEN, ROUND_HALF_UP
from pydantic import BaseModel

from .config import config

logger = logging.getLogger(__name__)


def to_rational(value: Union[int, float, str, Fraction]) -> Fraction:
    """
    Converts a number to an exact Fraction.

    Floats are converted through their shortest decimal representation, so 47.5 becomes 95/2 and 0.1 becomes
    1/10 (not the binary approximation). Strings may be integers, decimals ("47.5") or fractions ("3/2").

    :param value: The value to convert.
    :type value: Union[int, float, str, Fraction]
    :return: The exact rational value.
    :rtype: Fraction
    :raises ValueError: If the value cannot be interpreted as a rational number.
    """
    if isinstance(value, bool):
        raise ValueError(f"Cannot interpret boolean {value} as a rational number")
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(repr(value))
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"Cannot interpret '{value}' as a rational number")
    raise ValueError(f"Cannot interpret {value!r} ({type(value).__name__}) as a rational number")


def format_rational(value: Union[int, Fraction], digits: int = None, rounding: str = None, fixed: bool = False) -> str:
    """
    Renders an exact rational as a decimal string.

    Integer values are rendered without decimals ("76") unless `fixed` is set, any other value with exactly
    `digits` decimals ("1.9000"). Rounding is done exactly on the rational value, never on a float.

    :param value: The value to render.
    :type value: Union[int, Fraction]
    :param digits: Number of decimals (default from `config["output"]["digits"]`).
    :type digits: int
    :param rounding: "ROUND_HALF_EVEN" or "ROUND_HALF_UP" (default from `config["output"]["rounding"]`).
    :type rounding: str
    :param fixed: If True, integer values get `digits` decimals too ("2.0000").
    :type fixed: bool
    :return: The decimal rendering.
    :rtype: str
    """
    value = to_rational(value)
    if value.denominator == 1 and not fixed:
        return str(value.numerator)
    digits = config["output"]["digits"] if digits is None else digits
    rounding = rounding or config["output"]["rounding"]
    if rounding not in (ROUND_HALF_EVEN, ROUND_HALF_UP):
        raise ValueError(f"Unsupported rounding mode '{rounding}'")

    sign = -1 if value < 0 else 1
    quotient, remainder = divmod(abs(value.numerator) * 10 ** digits, value.denominator)
    twice = 2 * remainder
    if twice > value.denominator or (twice == value.denominator
                                     and (rounding == ROUND_HALF_UP or quotient % 2 == 1)):
        quotient += 1
    return str(Decimal(sign * quotient).scaleb(-digits))


def rational_to_json(value: Union[int, Fraction], digits: int = None) -> dict:
    """
    Serializes an exact rational as `{"num": ..., "den": ..., "decimal": ...}`.

    The fraction is always reduced and the denominator is always positive.

    :param value: The value to serialize.
    :type value: Union[int, Fraction]
    :param digits: Number of decimals of the `decimal` rendering.
    :type digits: int
    :return: The JSON-ready dictionary.
    :rtype: dict
    """
    value = to_rational(value)
    return {"num": value.numerator, "den": value.denominator, "decimal": format_rational(value, digits)}


def rational_from_json(data: Union[dict, int, str]) -> Fraction:
    """Inverse of :func:`rational_to_json` (the `decimal` field is ignored)."""
    if isinstance(data, dict):
        return Fraction(int(data["num"]), int(data["den"]))
    return to_rational(data)


def make_serializable(data: dict, digits: int = None) -> dict:
    """
    Converts non-serializable values in a dictionary (in place) so it can be safely serialized to JSON.

    Fractions become `{"num", "den", "decimal"}` objects, objects with a `json()` method are replaced by its
    output, nested dictionaries and lists are processed recursively and anything else is converted to string.

    :param data: The dictionary to process.
    :type data: dict
    :return: The dictionary with all values JSON-serializable.
    :rtype: dict
    """
    if type(data) is not dict:
        raise TypeError("Input must be a dictionary")

    for key, value in data.items():
        data[key] = _serializable_value(value, digits)
    return data


def _serializable_value(value, digits):
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, BaseModel):
        return model_to_dict(value, digits)
    if isinstance(value, bool) or value is None or isinstance(value, (int, str, float)):
        return value
    if isinstance(value, Fraction):
        return rational_to_json(value, digits)
    if isinstance(value, dict):
        return make_serializable(dict(value), digits)
    if isinstance(value, (list, tuple)):
        return [_serializable_value(v, digits) for v in value]
    if hasattr(value, "json") and callable(value.json):
        return value.json()
    return str(value)


def model_to_dict(model: BaseModel, digits: int = None) -> dict:
    """
    Serializable dictionary of the fields of a pydantic model.

    Fields are read as attributes (not through `model_dump()`), so Fractions keep their exact
    `{"num", "den", "decimal"}` form at every nesting level.

    :param model: The model to convert.
    :type model: BaseModel
    :param digits: Number of decimals of the decimal renderings.
    :type digits: int
    :return: The JSON-ready dictionary.
    :rtype: dict
    """
    return make_serializable({name: getattr(model, name) for name in type(model).model_fields}, digits)


def dict_to_table(data: dict,
                  sort_by: str = None,
                  sort_ascending: bool = True,
                  markdown: bool = False,
                  index_name: str = "owner",
                  show: bool = True) -> str:
    """
    Print a dictionary of dictionaries as a table (markdown or plain text).

    Values should already be rendered as strings (see :func:`format_rational`), so exact rationals are never
    turned into floats by the table formatting.

    :param data: The dictionary to convert to a table (outer keys are rows).
    :type data: dict
    :param sort_by: The key to sort (column name) the table by. If None, no sorting is applied.
    :type sort_by: str, optional
    :param sort_ascending: If True, sort in ascending order; otherwise, descending.
    :type sort_ascending: bool
    :param markdown: If True, format the table as Markdown; otherwise, as plain text.
    :type markdown: bool
    :param index_name: Header of the index column.
    :type index_name: str
    :param show: If True, print the table to the console.
    :type show: bool
    :return: The formatted table as a string.
    :rtype: str
    """
    if not data:
        return "(empty table)"
    df = pd.DataFrame(data).T
    df.index.name = index_name
    if sort_by:
        df.sort_values(by=sort_by, ascending=sort_ascending, inplace=True)
    if markdown:
        table = df.to_markdown(disable_numparse=True)
    else:
        table = df.to_markdown(tablefmt='fancy_grid', disable_numparse=True)

    if show:
        print(table)

    return table
