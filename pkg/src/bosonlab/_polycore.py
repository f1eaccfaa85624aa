"""Shared sparse-polynomial machinery for commuting variables.

A polynomial is a dict mapping exponent tuples (one nonnegative integer per
variable) to coefficients.  Both the classical mode polynomials and the real
phase-space polynomials wrap these helpers with their own variable
conventions.
"""

from __future__ import annotations

from . import scalars
from .scalars import ZERO_TOL, as_scalar, is_zero


def prune(terms: dict, tol: float = ZERO_TOL) -> dict:
    return {k: c for k, c in terms.items() if not is_zero(c, tol)}


def add(lhs: dict, rhs: dict) -> dict:
    out = dict(lhs)
    for key, coeff in rhs.items():
        if key in out:
            out[key] = out[key] + coeff
        else:
            out[key] = coeff
    return prune(out)


def scale(terms: dict, factor) -> dict:
    factor = as_scalar(factor)
    return prune({k: c * factor for k, c in terms.items()})


def mul(lhs: dict, rhs: dict) -> dict:
    out: dict = {}
    for k1, c1 in lhs.items():
        for k2, c2 in rhs.items():
            key = tuple(a + b for a, b in zip(k1, k2))
            contrib = c1 * c2
            if key in out:
                out[key] = out[key] + contrib
            else:
                out[key] = contrib
    return prune(out)


def power(terms: dict, n: int, nvars: int) -> dict:
    if n < 0:
        raise ValueError("negative powers are not supported")
    out = {(0,) * nvars: scalars.exact(1)}
    base = terms
    while n:
        if n & 1:
            out = mul(out, base)
        base = mul(base, base)
        n >>= 1
    return out


def derive(terms: dict, var: int) -> dict:
    out: dict = {}
    for key, coeff in terms.items():
        p = key[var]
        if p == 0:
            continue
        dkey = key[:var] + (p - 1,) + key[var + 1 :]
        contrib = coeff * p
        if dkey in out:
            out[dkey] = out[dkey] + contrib
        else:
            out[dkey] = contrib
    return prune(out)


def evaluate(terms: dict, values) -> complex:
    """Numeric evaluation; `values` is one number (or array) per variable."""
    total = 0
    for key, coeff in terms.items():
        term = complex(coeff) if scalars.is_exact(coeff) else coeff
        for var, p in enumerate(key):
            if p:
                term = term * values[var] ** p
        total = total + term
    return total


def compose(terms: dict, images, one, combine_mul, combine_pow):
    """Substitute polynomial `images[var]` for each variable.

    `one` is the multiplicative identity of the target algebra and
    `combine_mul`/`combine_pow` its product and power.  Returns the
    accumulated sum in the target algebra (via `+`).
    """
    total = None
    for key, coeff in terms.items():
        term = one * coeff
        for var, p in enumerate(key):
            if p:
                term = combine_mul(term, combine_pow(images[var], p))
        total = term if total is None else total + term
    if total is None:
        return one * 0
    return total


def total_degree(terms: dict) -> int:
    if not terms:
        return 0
    return max(sum(key) for key in terms)
