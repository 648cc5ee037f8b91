"""Bijection between I2 colors and quadruples <a, b, c, d>.

The strides are a*2*lam*(mu+1)*B + b*2*lam*(mu+1) + c*(mu+1) + d on top of
ell3, with a in [lam^2], b in [B], c in [2*lam], d in [mu+1].  d == mu is
the reserved "unset" sentinel; it lives inside the color so colors stay
plain integers.
"""

from __future__ import annotations

from functools import lru_cache
from typing import NamedTuple


class Quad(NamedTuple):
    a: int
    b: int
    c: int
    d: int


def a_hat(a: int, lam: int) -> int:
    return a // lam


def a_tilde(a: int, lam: int) -> int:
    return a % lam


def encode(params, quad: Quad) -> int:
    """Pack a quadruple into its I2 color."""
    a, b, c, d = quad
    lam, mu, B = params.lam, params.mu, params.B
    if not 0 <= a < lam * lam:
        raise ValueError(f"a={a} outside [{lam * lam}]")
    if not 0 <= b < B:
        raise ValueError(f"b={b} outside [{B}]")
    if not 0 <= c < 2 * lam:
        raise ValueError(f"c={c} outside [{2 * lam}]")
    if not 0 <= d <= mu:
        raise ValueError(f"d={d} outside [{mu + 1}]")
    stride_c = mu + 1
    stride_b = 2 * lam * stride_c
    stride_a = B * stride_b
    return params.ell3 + a * stride_a + b * stride_b + c * stride_c + d


def decode(params, color: int) -> Quad:
    """Unpack an I2 color into its quadruple."""
    return _decode(params, color)


@lru_cache(maxsize=1 << 20)
def _decode(params, color: int) -> Quad:
    if not params.ell3 <= color < params.ell3 + params.ell2:
        raise ValueError(f"color {color} not in I2")
    i = color - params.ell3
    lam, mu, B = params.lam, params.mu, params.B
    stride_c = mu + 1
    stride_b = 2 * lam * stride_c
    stride_a = B * stride_b
    a, i = divmod(i, stride_a)
    b, i = divmod(i, stride_b)
    c, d = divmod(i, stride_c)
    return Quad(a, b, c, d)
