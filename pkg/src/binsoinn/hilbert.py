"""Hilbert curve index <-> grid point conversion.

The curve on a ``2**n x 2**n`` grid starts at the origin; at order 1 it visits
(0, 0), (0, 1), (1, 1), (1, 0) as ``(x, y)`` pairs.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

MAX_ORDER = 16
DEFAULT_MAX_SIDE = 256


def _check_order(n: int) -> None:
    if not 1 <= n <= MAX_ORDER:
        raise ValueError(f"curve order must be in [1, {MAX_ORDER}], got {n}")


def index_to_point(n: int, d: int) -> tuple[int, int]:
    """Return the ``(x, y)`` cell visited at position ``d`` of the order-``n`` curve."""
    _check_order(n)
    if not 0 <= d < 4**n:
        raise IndexError(f"curve index {d} out of range for order {n}")
    x = y = 0
    t = d
    s = 1
    side = 1 << n
    while s < side:
        rx = 1 & (t >> 1)
        ry = 1 & (t ^ rx)
        if ry == 0:
            if rx == 1:
                x = s - 1 - x
                y = s - 1 - y
            x, y = y, x
        x += s * rx
        y += s * ry
        t >>= 2
        s <<= 1
    return x, y


def point_to_index(n: int, x: int, y: int) -> int:
    """Inverse of :func:`index_to_point`."""
    _check_order(n)
    side = 1 << n
    if not (0 <= x < side and 0 <= y < side):
        raise IndexError(f"point ({x}, {y}) outside {side}x{side} grid")
    d = 0
    s = side >> 1
    while s > 0:
        rx = 1 if x & s else 0
        ry = 1 if y & s else 0
        d += s * s * ((3 * rx) ^ ry)
        # rotate within the full grid so lower bits see the canonical orientation
        if ry == 0:
            if rx == 1:
                x = side - 1 - x
                y = side - 1 - y
            x, y = y, x
        s >>= 1
    return d


def order_for_length(byte_count: int, max_side: int = DEFAULT_MAX_SIDE) -> int:
    """Smallest order whose grid holds ``byte_count`` cells, capped by ``max_side``."""
    if max_side < 2 or max_side & (max_side - 1):
        raise ValueError(f"max_side must be a power of two >= 2, got {max_side}")
    if byte_count < 0:
        raise ValueError("byte_count must be non-negative")
    cap = max_side.bit_length() - 1
    n = 1
    while n < cap and 4**n < byte_count:
        n += 1
    return min(n, cap)


@lru_cache(maxsize=MAX_ORDER)
def curve_points(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised ``index_to_point`` over the whole curve.

    Returns read-only arrays ``(xs, ys)`` of length ``4**n``.
    """
    _check_order(n)
    t = np.arange(4**n, dtype=np.int64)
    x = np.zeros_like(t)
    y = np.zeros_like(t)
    s = 1
    while s < (1 << n):
        rx = 1 & (t >> 1)
        ry = 1 & (t ^ rx)
        flip = (ry == 0) & (rx == 1)
        x = np.where(flip, s - 1 - x, x)
        y = np.where(flip, s - 1 - y, y)
        swap = ry == 0
        x, y = np.where(swap, y, x), np.where(swap, x, y)
        x += s * rx
        y += s * ry
        t >>= 2
        s <<= 1
    x.setflags(write=False)
    y.setflags(write=False)
    return x, y
