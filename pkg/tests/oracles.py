"""Slow, independent reference computations used by the tests."""

from collections import Counter

import numpy as np

from binsoinn.hilbert import index_to_point


def hilbert_recursive(n):
    """Points of the order-n curve from the quadrant construction.

    Lower-left copy transposed, then upper-left and upper-right copies as is,
    then the lower-right copy anti-transposed.
    """
    if n == 0:
        return [(0, 0)]
    prev = hilbert_recursive(n - 1)
    h = 1 << (n - 1)
    out = [(y, x) for x, y in prev]
    out += [(x, y + h) for x, y in prev]
    out += [(x + h, y + h) for x, y in prev]
    out += [(2 * h - 1 - y, h - 1 - x) for x, y in prev]
    return out


def classify_naive(b):
    if b == 0:
        return "black"
    if b == 255:
        return "white"
    if 32 <= b <= 126:
        return "blue"
    if b < 32 or b == 127:
        return "green"
    return "red"


RGB = {"black": (0, 0, 0), "white": (255, 255, 255), "blue": (0, 0, 255), "green": (0, 255, 0), "red": (255, 0, 0)}

_points = {}


def _curve(n):
    if n not in _points:
        _points[n] = [index_to_point(n, d) for d in range(4**n)]
    return _points[n]


def render_naive(data, max_side=256):
    """Returns (side, rows) where rows[y][x] is an (r, g, b) tuple."""
    n = 1
    while (1 << n) < max_side and 4**n < len(data):
        n += 1
    side = 1 << n
    cells = side * side
    rows = [[None] * side for _ in range(side)]
    pts = _curve(n)
    for d in range(cells):
        if len(data) > cells:
            b = data[d * len(data) // cells]
        elif d < len(data):
            b = data[d]
        else:
            b = 0
        x, y = pts[d]
        rows[y][x] = RGB[classify_naive(b)]
    return side, rows


def features_naive(side, rows):
    """Four stripe histograms over 3-3-2 quantised colours, as one list."""
    if side < 4:
        rows = [r for r in rows for _ in (0, 1)]
        rows = [[p for p in r for _ in (0, 1)] for r in rows]
        side *= 2
    h = side // 4
    out = []
    for s in range(4):
        counts = Counter()
        for y in range(s * h, (s + 1) * h):
            for r, g, b in rows[y]:
                counts[(r // 32) * 32 + (g // 32) * 4 + b // 64] += 1
        total = h * side
        out.extend(counts[i] / total for i in range(256))
    return out


def brute_winners(weights, ids, u):
    d = [float(np.sqrt(sum((a - b) ** 2 for a, b in zip(w, u)))) for w in weights]
    order = sorted(range(len(ids)), key=lambda r: (d[r], ids[r]))
    return ids[order[0]], ids[order[1]], d[order[0]], d[order[1]]


def brute_threshold(weights, ids, adj, i, isolated="max"):
    r = ids.index(i)
    w = weights[r]

    def dist(j):
        v = weights[ids.index(j)]
        return float(np.sqrt(sum((a - b) ** 2 for a, b in zip(w, v))))

    nbrs = adj.get(i) or set()
    if nbrs:
        return max(dist(j) for j in nbrs)
    others = [dist(j) for j in ids if j != i]
    return max(others) if isolated == "max" else min(others)


def nearest_labeled(weights, ids, labels, u):
    best = None
    for w, i, lab in zip(weights, ids, labels):
        d = float(np.sqrt(np.sum((np.asarray(w) - np.asarray(u)) ** 2)))
        if best is None or d < best[0]:
            best = (d, i, lab)
    return best
