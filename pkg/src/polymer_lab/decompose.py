"""Structure of walks and bridges.

Renewal times, the bridge decomposition of an arbitrary walk, hyperplane
crossing profiles, zigzags, diamond times and the transverse width.
Everything here is a pure function of the walk.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotABridge
from .lattice import StepSet, Walk, concatenate, reflect_x


def renewal_times(w: Walk) -> tuple[int, ...]:
    """Indices 1 <= i <= n-1 with x(i) >= x(k) for k < i and x(i) < x(k) for k > i."""
    x = w.x
    n = w.length
    if n < 2:
        return ()
    pmax = np.maximum.accumulate(x)
    smin = np.minimum.accumulate(x[::-1])[::-1]
    i = np.arange(1, n)
    ok = (x[i] >= pmax[i - 1]) & (x[i] < smin[i + 1])
    return tuple(int(v) for v in i[ok])


def is_bridge(w: Walk) -> bool:
    x = w.x
    return bool(np.all((x[1:] > x[0]) & (x[1:] <= x[-1])))


def is_irreducible(w: Walk) -> bool:
    return w.length >= 1 and is_bridge(w) and not renewal_times(w)


def _require_bridge(w: Walk) -> None:
    if not is_bridge(w):
        raise NotABridge("operation is defined for bridges only")


def irreducible_pieces(w: Walk) -> list[Walk]:
    """Cut a bridge at all its renewal times."""
    _require_bridge(w)
    cuts = (0, *renewal_times(w), w.length)
    return [w.segment(a, b) for a, b in zip(cuts, cuts[1:])]


# -- bridge decomposition of arbitrary walks ----------------------------------

@dataclass(frozen=True)
class BridgeDecomposition:
    """Bridges obtained from a walk by the half-space procedure.

    ``negative_part`` decomposes the reversed segment before the first
    minimum of x, ``positive_part`` the rest (with ``prepended_step`` added
    in front when that rest returns to its starting hyperplane).
    """

    negative_part: tuple[Walk, ...]
    positive_part: tuple[Walk, ...]
    prepended_step: tuple[int, ...] | None
    split_index: int
    dimension: int = 2

    @property
    def negative_widths(self) -> list[int]:
        return [int(b.end[0]) for b in self.negative_part]

    @property
    def positive_widths(self) -> list[int]:
        return [int(b.end[0]) for b in self.positive_part]

    @property
    def bridges(self) -> list[Walk]:
        return [*self.negative_part, *self.positive_part]

    @property
    def total_steps(self) -> int:
        return sum(b.length for b in self.bridges)


def _halfspace_bridges(w: Walk) -> list[Walk]:
    # w has x > 0 after its first point
    out = []
    while True:
        x = w.x
        top = int(np.flatnonzero(x == x.max())[-1])
        out.append(w.segment(0, top))
        if top == w.length:
            return out
        w = reflect_x(w.segment(top, w.length))


def _alternating(bridges) -> Walk:
    parts = [b if k % 2 == 0 else reflect_x(b) for k, b in enumerate(bridges)]
    return concatenate(*parts)


def _reverse(w: Walk) -> Walk:
    return Walk(w.points[::-1] - w.points[-1])


def hw_decompose(w: Walk, step_set: StepSet | None = None) -> BridgeDecomposition:
    """Split a walk into two families of bridges with strictly decreasing widths.

    ``step_set`` supplies the step prepended to the second half when it
    needs one (the lexicographically smallest step with positive x);
    nearest-neighbour steps are assumed when omitted.
    """
    if step_set is None:
        step_set = StepSet.nearest_neighbor(w.dimension)
    x = w.x
    a0 = int(np.argmin(x))
    neg: list[Walk] = []
    if a0 > 0:
        neg = _halfspace_bridges(_reverse(w.segment(0, a0)))
    pos: list[Walk] = []
    pre = None
    if a0 < w.length:
        rest = w.segment(a0, w.length)
        if np.any(rest.x[1:] <= 0):
            pre = min(s for s in step_set.steps if s[0] > 0)
            rest = concatenate(Walk.from_steps([pre]), rest)
        pos = _halfspace_bridges(rest)
    return BridgeDecomposition(tuple(neg), tuple(pos), pre, a0, w.dimension)


def hw_reconstruct(dec: BridgeDecomposition) -> Walk:
    """Inverse of :func:`hw_decompose`."""
    d = dec.dimension
    first = _reverse(_alternating(dec.negative_part)) if dec.negative_part else Walk.empty(d)
    if dec.positive_part:
        second = _alternating(dec.positive_part)
        if dec.prepended_step is not None:
            second = second.segment(1, second.length)
    else:
        second = Walk.empty(d)
    return concatenate(first, second)


# -- crossings -----------------------------------------------------------------

@dataclass(frozen=True)
class CrossingProfile:
    """counts[k] = number of steps crossing the plane x = offset + k + 1/2."""

    offset: int
    counts: np.ndarray

    def crossings(self, x0: int) -> int:
        k = x0 - self.offset
        if 0 <= k < len(self.counts):
            return int(self.counts[k])
        return 0

    def rl(self, m: int) -> set[int]:
        """Rl^m: planes x0 >= 0 crossed between 1 and m times."""
        x0 = np.arange(len(self.counts)) + self.offset
        sel = (x0 >= 0) & (self.counts >= 1) & (self.counts <= m)
        return {int(v) for v in x0[sel]}


def crossing_profile(w: Walk) -> CrossingProfile:
    x = w.x
    lo = int(x.min())
    hi = int(x.max())
    diff = np.zeros(hi - lo + 1, dtype=np.int64)
    a = np.minimum(x[:-1], x[1:]) - lo
    b = np.maximum(x[:-1], x[1:]) - lo
    np.add.at(diff, a, 1)
    np.add.at(diff, b, -1)
    return CrossingProfile(lo, np.cumsum(diff)[:-1])


def renewal_sandwich(w: Walk, D: int) -> tuple[int, int, int]:
    """(|R|, |Rl^1|, D |R|) where R counts the start index 0 as a renewal time."""
    r = len(renewal_times(w)) + 1
    return r, len(crossing_profile(w).rl(1)), D * r


# -- zigzags -----------------------------------------------------------------

def zigzags(w: Walk) -> list[tuple[int, int]]:
    """All zigzags (i, j) of a bridge, in increasing order.

    A pair with i == j is a renewal time; for i < j the walk dips strictly
    below x(i) on (i, j], bottoms out at j and stays above x(j) afterwards.
    """
    _require_bridge(w)
    x = w.x
    n = w.length
    if n < 2:
        return []
    pmax = np.maximum.accumulate(x)
    # smin[k] = min x[k:], lastmin[k] = last index attaining it
    smin = np.empty(n + 2, dtype=np.int64)
    lastmin = np.empty(n + 2, dtype=np.int64)
    smin[n + 1] = np.iinfo(np.int64).max
    lastmin[n + 1] = n + 1
    for k in range(n, -1, -1):
        if x[k] < smin[k + 1]:
            smin[k], lastmin[k] = x[k], k
        else:
            smin[k], lastmin[k] = smin[k + 1], lastmin[k + 1]
    # next index with x >= x[i]
    nxt = np.full(n + 1, n + 1, dtype=np.int64)
    stack: list[int] = []
    for k in range(n, -1, -1):
        while stack and x[stack[-1]] < x[k]:
            stack.pop()
        nxt[k] = stack[-1] if stack else n + 1
        stack.append(k)
    out = []
    for i in range(1, n):
        if x[i] < pmax[i - 1]:
            continue
        if smin[i + 1] > x[i]:
            out.append((i, i))
            continue
        j = int(lastmin[i + 1])
        if smin[i + 1] < x[i] and j < nxt[i] and j < n:
            out.append((i, j))
    return out


def short_zigzags(w: Walk, threshold: int) -> list[tuple[int, int]]:
    return [(i, j) for i, j in zigzags(w) if j - i <= threshold]


# -- diamonds and width -------------------------------------------------------

def in_diamond_cone(dx, dy):
    """Double cone around a point, first two coordinates only.

    Forward half: dx > 0 and -dx < dy <= dx. Backward half: dx < 0 and
    dx < dy < -dx (strict on both sides).
    """
    dx = np.asarray(dx)
    dy = np.asarray(dy)
    fwd = (dx > 0) & (dy <= dx) & (dy > -dx)
    bwd = (dx < 0) & (dy < -dx) & (dy > dx)
    return fwd | bwd


def is_diamond_point(w: Walk, i: int, window: int | None = None) -> bool:
    """Cone test of every other point around point i (optionally only those
    within ``window`` indices). The renewal property is not checked here."""
    lo, hi = 0, w.length
    if window is not None:
        lo, hi = max(0, i - window), min(w.length, i + window)
    idx = np.r_[lo:i, i + 1 : hi + 1]
    rel = w.points[idx, :2] - w.points[i, :2]
    return bool(np.all(in_diamond_cone(rel[:, 0], rel[:, 1])))


def diamond_times(w: Walk) -> list[int]:
    """Renewal times of a bridge around which the whole walk sits in the double cone."""
    _require_bridge(w)
    if w.dimension < 2:
        raise ValueError("diamond times need d >= 2")
    return [i for i in renewal_times(w) if is_diamond_point(w, i)]


def width(w: Walk) -> int:
    """Spread of the second coordinate: max_i y(i) - min_j y(j)."""
    y = w.y
    return int(y.max() - y.min())
