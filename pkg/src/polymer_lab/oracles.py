"""Quadratic, literal-definition reference implementations.

These are deliberately naive: each one checks its defining inequalities
over all index pairs, with no shared helpers from the fast code paths.
They exist to certify the fast versions in tests and audits.
"""

from __future__ import annotations


def _xs(w):
    return [int(p[0]) for p in w.points]


def is_bridge(w) -> bool:
    x = _xs(w)
    n = len(x) - 1
    return all(x[0] < x[i] <= x[n] for i in range(1, n + 1))


def renewal_times(w) -> list[int]:
    x = _xs(w)
    n = len(x) - 1
    out = []
    for i in range(1, n):
        later = all(x[i] < x[k] for k in range(i + 1, n + 1))
        earlier = all(x[i] >= x[k] for k in range(i))
        if later and earlier:
            out.append(i)
    return out


def zigzags(w, require_dip: bool = True) -> list[tuple[int, int]]:
    """Pairs 0 < i <= j < n satisfying the three zigzag inequalities.

    With ``require_dip`` a pair with j > i must also have x(j) < x(i); this
    only matters for j = i + 1, where the middle range is empty.
    """
    x = _xs(w)
    n = len(x) - 1
    out = []
    for i in range(1, n):
        for j in range(i, n):
            c1 = all(x[k] <= x[i] for k in range(i))
            c2 = all(x[j] <= x[k] < x[i] for k in range(i + 1, j))
            c3 = all(x[j] < x[k] for k in range(j + 1, n + 1))
            dip = j == i or x[j] < x[i] or not require_dip
            if c1 and c2 and c3 and dip:
                out.append((i, j))
    return out


def crossing_counts(w) -> dict[int, int]:
    x = _xs(w)
    counts = {}
    for x0 in range(min(x), max(x)):
        plane = x0 + 0.5
        counts[x0] = sum(1 for i in range(len(x) - 1) if min(x[i], x[i + 1]) < plane < max(x[i], x[i + 1]))
    return counts


def diamond_times(w) -> list[int]:
    pts = [(int(p[0]), int(p[1])) for p in w.points]
    out = []
    for i in renewal_times(w):
        xi, yi = pts[i]
        good = True
        for k, (x, y) in enumerate(pts):
            if k == i:
                continue
            right = x > xi and x - xi >= y - yi > -(x - xi)
            left = x < xi and xi - x > y - yi > -(xi - x)
            if not (right or left):
                good = False
                break
        if good:
            out.append(i)
    return out


def local_time_log_weight(w, phi, rho) -> float:
    """log sigma by direct counting with a plain dict."""
    import math

    counts = {}
    for p in w.points:
        key = tuple(int(c) for c in p)
        counts[key] = counts.get(key, 0) + 1
    rep = 0.0
    for c in counts.values():
        v = phi(c)
        if v == math.inf:
            return -math.inf
        rep += v
    logp = 0.0
    for a, b in zip(w.points[:-1], w.points[1:]):
        logp += math.log(rho.prob(tuple(int(c) for c in b - a)))
    return logp - rep
