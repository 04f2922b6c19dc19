"""Shared test helpers."""

import decimal

import pytest


def approx_printed(expected: float, slack: float = 0.6):
    """pytest.approx with tolerance ``slack`` units in the last printed digit.

    The reference tables round to their printed precision, so a frozen
    literal like 0.012591 carries +/- 0.5e-6 of rounding; the tolerance is
    inferred from the literal's own decimal representation.
    """
    d = decimal.Decimal(repr(expected))
    ulp = float(10.0 ** d.as_tuple().exponent)
    return pytest.approx(expected, abs=slack * ulp, rel=1e-9)
