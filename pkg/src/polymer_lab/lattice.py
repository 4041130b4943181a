"""Lattice geometry on Z^d: step sets, walks, symmetries and concatenation."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import MixedDimension, NotSymmetric, ZeroStep

COMPASS = {"E": (1, 0), "W": (-1, 0), "N": (0, 1), "S": (0, -1)}


def signed_permutations(d: int) -> np.ndarray:
    """All d x d signed permutation matrices (the hyperoctahedral group).

    The identity is always element 0.
    """
    mats = []
    for perm in itertools.permutations(range(d)):
        for signs in itertools.product((1, -1), repeat=d):
            m = np.zeros((d, d), dtype=np.int64)
            for row, (col, s) in enumerate(zip(perm, signs)):
                m[row, col] = s
            mats.append(m)
    return np.stack(mats)


@dataclass(frozen=True)
class StepSet:
    """A finite jump set, closed under the symmetries of Z^d.

    Build instances with :func:`validate_step_set`; the constructor does not
    check anything.
    """

    steps: tuple[tuple[int, ...], ...]
    dimension: int

    @cached_property
    def array(self) -> np.ndarray:
        a = np.array(self.steps, dtype=np.int64).reshape(len(self.steps), self.dimension)
        a.setflags(write=False)
        return a

    @property
    def x_extent(self) -> int:
        """D: the largest x-displacement of a single step."""
        return max(s[0] for s in self.steps)

    @cached_property
    def _index(self) -> dict[tuple[int, ...], int]:
        return {s: i for i, s in enumerate(self.steps)}

    def index(self, step) -> int:
        return self._index[tuple(int(c) for c in step)]

    def __contains__(self, step) -> bool:
        return tuple(int(c) for c in step) in self._index

    def __len__(self) -> int:
        return len(self.steps)

    @cached_property
    def symmetry_table(self) -> np.ndarray:
        """table[g, s] = index of the image of step s under group element g."""
        group = signed_permutations(self.dimension)
        images = np.einsum("gij,sj->gsi", group, self.array)
        table = np.empty((len(group), len(self)), dtype=np.int64)
        for g in range(len(group)):
            for s in range(len(self)):
                table[g, s] = self.index(images[g, s])
        return table

    def orbits(self) -> list[list[int]]:
        """Partition of step indices into symmetry orbits."""
        seen: set[int] = set()
        out = []
        for s in range(len(self)):
            if s in seen:
                continue
            orbit = sorted(set(self.symmetry_table[:, s].tolist()))
            seen.update(orbit)
            out.append(orbit)
        return out

    @classmethod
    def nearest_neighbor(cls, d: int = 2) -> "StepSet":
        steps = []
        for k in range(d):
            for sgn in (1, -1):
                e = [0] * d
                e[k] = sgn
                steps.append(tuple(e))
        return validate_step_set(steps)


def validate_step_set(steps) -> StepSet:
    """Check a candidate jump set and return it as a :class:`StepSet`.

    Raises ZeroStep, MixedDimension or NotSymmetric. Duplicates are dropped,
    first occurrence wins.
    """
    steps = [tuple(int(c) for c in s) for s in steps]
    if not steps:
        raise ValueError("step set must be non-empty")
    dims = {len(s) for s in steps}
    if len(dims) != 1:
        raise MixedDimension(f"steps have mixed dimensions {sorted(dims)}")
    d = dims.pop()
    if d < 2:
        raise MixedDimension(f"dimension must be at least 2, got {d}")
    ordered = list(dict.fromkeys(steps))
    members = set(ordered)
    if (0,) * d in members:
        raise ZeroStep("the zero vector is not an allowed step")
    group = signed_permutations(d)
    for s in ordered:
        for img in group @ np.array(s, dtype=np.int64):
            if tuple(int(c) for c in img) not in members:
                raise NotSymmetric(f"image {tuple(int(c) for c in img)} of step {s} is missing")
    return StepSet(tuple(ordered), d)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.int64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Walk:
    """A lattice path starting at the origin, stored as absolute points.

    ``points`` has shape (n + 1, d). Increment membership in a step set is
    not enforced here; use :meth:`is_walk_of`.
    """

    points: np.ndarray = field(repr=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.int64)
        if pts.ndim != 2 or pts.shape[0] < 1:
            raise ValueError("points must have shape (n + 1, d)")
        if pts[0].any():
            raise ValueError("a walk must start at the origin")
        object.__setattr__(self, "points", _frozen(pts))

    @classmethod
    def from_steps(cls, steps, dimension: int | None = None) -> "Walk":
        steps = np.asarray(steps, dtype=np.int64)
        if steps.size == 0:
            if dimension is None:
                raise ValueError("dimension needed for an empty walk")
            return cls(np.zeros((1, dimension), dtype=np.int64))
        steps = steps.reshape(len(steps), -1)
        pts = np.vstack([np.zeros((1, steps.shape[1]), dtype=np.int64), np.cumsum(steps, axis=0)])
        return cls(pts)

    @classmethod
    def from_compass(cls, letters: str) -> "Walk":
        try:
            steps = [COMPASS[c] for c in letters.upper() if not c.isspace()]
        except KeyError as exc:
            raise ValueError(f"unknown compass letter {exc.args[0]!r}") from None
        return cls.from_steps(steps, dimension=2)

    @classmethod
    def empty(cls, dimension: int = 2) -> "Walk":
        return cls(np.zeros((1, dimension), dtype=np.int64))

    @property
    def length(self) -> int:
        return self.points.shape[0] - 1

    def __len__(self) -> int:
        return self.length

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    @property
    def steps(self) -> np.ndarray:
        return np.diff(self.points, axis=0)

    @property
    def x(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.points[:, 1]

    @property
    def end(self) -> np.ndarray:
        return self.points[-1]

    def is_walk_of(self, step_set: StepSet) -> bool:
        return self.dimension == step_set.dimension and all(s in step_set for s in self.steps)

    def segment(self, i: int, j: int) -> "Walk":
        """The sub-walk (points i..j) translated to start at the origin."""
        if not 0 <= i <= j <= self.length:
            raise IndexError(f"bad segment ({i}, {j}) for a walk of length {self.length}")
        return Walk(self.points[i : j + 1] - self.points[i])

    def to_compass(self) -> str:
        inv = {v: k for k, v in COMPASS.items()}
        return "".join(inv[tuple(int(c) for c in s)] for s in self.steps)

    def to_list(self) -> list[list[int]]:
        return self.points.tolist()

    def __eq__(self, other) -> bool:
        if not isinstance(other, Walk):
            return NotImplemented
        return self.points.shape == other.points.shape and bool(np.array_equal(self.points, other.points))

    def __hash__(self) -> int:
        return hash((self.points.shape, self.points.tobytes()))

    def __repr__(self) -> str:
        return f"Walk({self.points.tolist()})"


def reflect_x(w: Walk) -> Walk:
    """Mirror image through the hyperplane x = 0."""
    pts = w.points.copy()
    pts[:, 0] *= -1
    return Walk(pts)


def rotate_xy_clockwise(w: Walk) -> Walk:
    """Quarter turn (x, y, ...) -> (y, -x, ...) around the origin."""
    pts = w.points.copy()
    pts[:, 0] = w.points[:, 1]
    pts[:, 1] = -w.points[:, 0]
    return Walk(pts)


def apply_symmetry(w: Walk, matrix: np.ndarray) -> Walk:
    return Walk(w.points @ np.asarray(matrix, dtype=np.int64).T)


def concatenate(*walks: Walk) -> Walk:
    """a ∘ b ∘ ...: each walk is translated to start where the previous ends."""
    if not walks:
        raise ValueError("nothing to concatenate")
    d = walks[0].dimension
    if any(w.dimension != d for w in walks):
        raise MixedDimension("cannot concatenate walks of different dimensions")
    parts = [walks[0].points]
    offset = walks[0].end
    for w in walks[1:]:
        parts.append(w.points[1:] + offset)
        offset = offset + w.end
    return Walk(np.vstack(parts))
