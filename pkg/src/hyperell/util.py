"""Shared numeric helpers: base-q logarithms, degree rounding, rationals."""

import math
from fractions import Fraction

# Euler-Mascheroni constant, to double precision.
EULER_GAMMA = 0.5772156649015329


def log_q(q, x):
    """Logarithm of x to base q."""
    return math.log(x) / math.log(q)


def log2_q(q, x):
    """Twice-iterated base-q logarithm, log_q(log_q(x))."""
    return log_q(q, log_q(q, x))


def round_degree(x):
    """Round a real-valued degree cutoff to the nearest integer >= 1.

    Exact half-integers round down so that the shorter truncation wins.
    """
    m = math.floor(x)
    n = m if x - m <= 0.5 else m + 1
    return max(1, n)


def frac_str(v):
    """Render a Fraction losslessly as 'num/den'."""
    return f"{v.numerator}/{v.denominator}"


def parse_frac(s):
    """Inverse of frac_str; also accepts bare integers."""
    if "/" in s:
        num, den = s.split("/", 1)
        return Fraction(int(num), int(den))
    return Fraction(int(s))
