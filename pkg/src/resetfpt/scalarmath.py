"""Scalar math that works across float, complex and mpmath operands.

Closed-form transforms in this package are written against these helpers so
the same expression can be evaluated with ordinary floats (fast paths),
complex arguments (Talbot contours) or mpmath numbers (high-precision
moment extraction). Arrays are deliberately unsupported; everything here is
scalar kernels that hot loops avoid.
"""

import math
import cmath

import mpmath


def _is_mp(x):
    return isinstance(x, (mpmath.mpf, mpmath.mpc))


def exp(x):
    if _is_mp(x):
        return mpmath.exp(x)
    if isinstance(x, complex):
        return cmath.exp(x)
    return math.exp(x)


def expm1(x):
    if _is_mp(x):
        return mpmath.expm1(x)
    if isinstance(x, complex):
        return cmath.exp(x) - 1.0
    return math.expm1(x)


def log(x):
    if _is_mp(x):
        return mpmath.log(x)
    if isinstance(x, complex):
        return cmath.log(x)
    if x < 0:
        return cmath.log(x)
    return math.log(x)


def sqrt(x):
    if _is_mp(x):
        return mpmath.sqrt(x)
    if isinstance(x, complex):
        return cmath.sqrt(x)
    if x < 0:
        return cmath.sqrt(x)
    return math.sqrt(x)


def power(x, a):
    if _is_mp(x) or _is_mp(a):
        return mpmath.power(x, a)
    if isinstance(x, complex) or isinstance(a, complex):
        return x ** a
    if x < 0:
        return complex(x) ** a
    return x ** a

def cosh(x):
    if _is_mp(x):
        return mpmath.cosh(x)
    if isinstance(x, complex):
        return cmath.cosh(x)
    return math.cosh(x)


def real(x):
    if _is_mp(x):
        return mpmath.re(x) if isinstance(x, mpmath.mpc) else x
    if isinstance(x, complex):
        return x.real
    return x


def is_real_scalar(x):
    """True for plain real scalars (not complex, not mpmath)."""
    return isinstance(x, (int, float)) and not isinstance(x, bool)
