"""Integer and finite-field primitives backing the set-family constructions."""

from __future__ import annotations

import math
from typing import NamedTuple


def isqrt(x: int) -> int:
    """Exact floor square root of a non-negative integer."""
    if x < 0:
        raise ValueError("isqrt of negative value")
    return math.isqrt(x)


def ceil_sqrt(x: int) -> int:
    """Smallest r with r*r >= x, for x >= 0."""
    if x <= 0:
        return 0
    return math.isqrt(x - 1) + 1


def ceil_log2(x: int) -> int:
    """Ceiling of log2(x), clamped to a minimum of 1.

    Every "log" in the parameter formulas uses this; the clamp keeps
    degrees and ground-set sizes positive at tiny inputs.
    """
    if x < 1:
        raise ValueError("ceil_log2 needs x >= 1")
    return max(1, (x - 1).bit_length())


def ceil_root4(x: int) -> int:
    """Smallest r with r**4 >= x, for x >= 1."""
    if x < 1:
        raise ValueError("ceil_root4 needs x >= 1")
    r = ceil_sqrt(ceil_sqrt(x))
    while r**4 < x:
        r += 1
    while r > 1 and (r - 1) ** 4 >= x:
        r -= 1
    return r


def is_prime(p: int) -> bool:
    """Trial-division primality; fine for the desk-scale primes used here."""
    if p < 2:
        return False
    if p < 4:
        return True
    if p % 2 == 0:
        return False
    f = 3
    while f * f <= p:
        if p % f == 0:
            return False
        f += 2
    return True


class PolyIndex(NamedTuple):
    """A polynomial over GF(modulus) identified by an integer index.

    Coefficient j is the j-th little-endian base-`modulus` digit of
    `index`, so index 0 is the zero polynomial and index < modulus**(degree+1).
    """

    index: int
    modulus: int
    degree: int


def poly_coeffs(poly: PolyIndex) -> tuple[int, ...]:
    """Little-endian coefficient vector (length degree+1)."""
    i, p, d = poly
    if i < 0 or i >= p ** (d + 1):
        raise ValueError(f"polynomial index {i} out of range for p={p}, d={d}")
    coeffs = []
    for _ in range(d + 1):
        coeffs.append(i % p)
        i //= p
    return tuple(coeffs)


def poly_eval(poly: PolyIndex, x: int) -> int:
    """Evaluate the indexed polynomial at x in GF(modulus)."""
    if not 0 <= x < poly.modulus:
        raise ValueError(f"evaluation point {x} not in [{poly.modulus}]")
    acc = 0
    for c in reversed(poly_coeffs(poly)):
        acc = (acc * x + c) % poly.modulus
    return acc
