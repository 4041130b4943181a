"""The self-repelling weight: potential, jump distribution, local times."""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property

import numpy as np

from .errors import CapExceeded, ModelError, NonzeroBase, NotSuperadditive
from .lattice import StepSet, Walk, validate_step_set

DEFAULT_CAP = 64
INF = math.inf


@dataclass(frozen=True)
class Potential:
    """Repulsion phi(a) for a vertex visited a times.

    ``values`` tabulates phi on 0..cap. Past the cap the free, saw and weak
    kinds extend analytically; a table potential raises CapExceeded.
    """

    kind: str
    values: tuple[float, ...]
    k: float = 0.0

    @property
    def cap(self) -> int:
        return len(self.values) - 1

    def __call__(self, a: int) -> float:
        if a < 0:
            raise ValueError("multiplicity must be non-negative")
        if a <= self.cap:
            return self.values[a]
        if self.kind == "free":
            return 0.0
        if self.kind == "saw":
            return INF
        if self.kind == "weak":
            return self.k * (a - 1)
        raise CapExceeded(f"multiplicity {a} exceeds the tabulated range 0..{self.cap}")

    def table(self, upto: int) -> np.ndarray:
        """phi on 0..upto as floats; a table potential stops at its cap."""
        m = upto if self.kind != "table" else min(upto, self.cap)
        return np.array([self(a) for a in range(m + 1)], dtype=np.float64)

    @property
    def is_hard_core(self) -> bool:
        """True when phi only takes the values 0 and +inf (free or saw-like)."""
        if self.kind in ("free", "saw"):
            return True
        if self.kind == "weak":
            return self.k == 0
        return all(v == 0 or v == INF for v in self.values)

    @classmethod
    def free(cls, cap: int = DEFAULT_CAP) -> "Potential":
        return validate_potential(cls("free", (0.0,) * (cap + 1)), cap)

    @classmethod
    def saw(cls, cap: int = DEFAULT_CAP) -> "Potential":
        return validate_potential(cls("saw", (0.0, 0.0) + (INF,) * (cap - 1)), cap)

    @classmethod
    def weak(cls, k: float, cap: int = DEFAULT_CAP) -> "Potential":
        if k < 0:
            raise ModelError("weak-mode strength must be non-negative")
        vals = tuple(float(k * max(a - 1, 0)) for a in range(cap + 1))
        return validate_potential(cls("weak", vals, float(k)), cap)

    @classmethod
    def from_table(cls, values) -> "Potential":
        vals = tuple(INF if v is None else float(v) for v in values)
        return validate_potential(cls("table", vals), len(vals) - 1)


def validate_potential(p: Potential, cap: int) -> Potential:
    """Check phi(0) = phi(1) = 0 and superadditivity on every pair a + b <= cap."""
    if cap < 1:
        raise ModelError("cap must be at least 1")
    if p.kind == "table" and p.cap < cap:
        raise ModelError(f"table gives phi only up to {p.cap}, cap {cap} requested")
    vals = [p(a) for a in range(cap + 1)]
    if vals[0] != 0 or vals[1] != 0:
        raise NonzeroBase("phi(0) and phi(1) must both be 0")
    if any(math.isnan(v) for v in vals):
        raise ModelError("phi values must not be NaN")
    for a in range(1, cap // 2 + 1):
        for b in range(a, cap - a + 1):
            if vals[a + b] < vals[a] + vals[b]:
                raise NotSuperadditive(a, b)
    if any(v < 0 for v in vals):
        raise ModelError("phi must be non-negative")
    if p.kind == "table" and p.cap > cap:
        return Potential("table", p.values[: cap + 1])
    return p


@dataclass(frozen=True)
class JumpDistribution:
    """Step probabilities rho on a step set.

    When built from integers/Fractions the distribution also carries integer
    numerators over a common denominator, used for exact counting.
    """

    step_set: StepSet
    probabilities: tuple[float, ...]
    numerators: tuple[int, ...] | None = None
    denominator: int | None = None

    @cached_property
    def log_probs(self) -> np.ndarray:
        return np.log(np.array(self.probabilities, dtype=np.float64))

    @property
    def is_rational(self) -> bool:
        return self.numerators is not None

    def prob(self, step) -> float:
        return self.probabilities[self.step_set.index(step)]

    @classmethod
    def uniform(cls, step_set: StepSet) -> "JumpDistribution":
        m = len(step_set)
        return cls(step_set, (1.0 / m,) * m, (1,) * m, m)

    @classmethod
    def explicit(cls, step_set: StepSet, values) -> "JumpDistribution":
        values = list(values)
        if len(values) != len(step_set):
            raise ModelError("one probability per step is required")
        rational = all(isinstance(v, (int, Fraction)) for v in values)
        if rational:
            fr = [Fraction(v) for v in values]
            if any(f <= 0 for f in fr) or sum(fr) != 1:
                raise ModelError("probabilities must be positive and sum to 1")
            den = math.lcm(*(f.denominator for f in fr))
            nums = tuple(int(f * den) for f in fr)
            dist = cls(step_set, tuple(float(f) for f in fr), nums, den)
        else:
            fl = [float(v) for v in values]
            if any(not v > 0 for v in fl) or abs(math.fsum(fl) - 1.0) > 1e-12:
                raise ModelError("probabilities must be positive and sum to 1")
            dist = cls(step_set, tuple(fl))
        for orbit in step_set.orbits():
            ref = dist.probabilities[orbit[0]]
            if any(abs(dist.probabilities[s] - ref) > 1e-15 for s in orbit):
                raise ModelError("rho must be invariant under the lattice symmetries")
        return dist


@dataclass(frozen=True)
class Model:
    step_set: StepSet
    rho: JumpDistribution
    phi: Potential

    def __post_init__(self):
        if self.rho.step_set != self.step_set:
            raise ModelError("rho is defined on a different step set")

    @property
    def dimension(self) -> int:
        return self.step_set.dimension

    @property
    def D(self) -> int:
        return self.step_set.x_extent

    @property
    def is_rational(self) -> bool:
        """Exact integer weights are available (rational rho, 0/inf phi)."""
        return self.rho.is_rational and self.phi.is_hard_core

    @classmethod
    def nearest_neighbor(cls, phi: Potential | None = None, d: int = 2) -> "Model":
        steps = StepSet.nearest_neighbor(d)
        return cls(steps, JumpDistribution.uniform(steps), phi or Potential.free())

    @classmethod
    def uniform(cls, steps, phi: Potential | None = None) -> "Model":
        ss = validate_step_set(steps)
        return cls(ss, JumpDistribution.uniform(ss), phi or Potential.free())


class LocalTimeMap(Counter):
    """Visit counts per vertex; keys are coordinate tuples."""

    def push(self, v) -> None:
        self[tuple(int(c) for c in v)] += 1

    def pop(self, v) -> None:
        key = tuple(int(c) for c in v)
        self[key] -= 1
        if self[key] == 0:
            del self[key]


def local_times(w: Walk) -> LocalTimeMap:
    return LocalTimeMap(map(tuple, w.points.tolist()))


def interaction(w: Walk, phi: Potential) -> float:
    """Sum over visited vertices of phi(local time)."""
    return math.fsum(phi(c) for c in local_times(w).values())


def weight_sigma(w: Walk, phi: Potential, rho: JumpDistribution) -> float:
    """log sigma(w); -inf when some vertex is visited a forbidden number of times."""
    steps = rho.step_set
    if w.dimension != steps.dimension:
        raise ModelError("walk and step set dimensions differ")
    try:
        idx = [steps.index(s) for s in w.steps]
    except KeyError:
        raise ModelError("walk uses a step outside the step set") from None
    rep = interaction(w, phi)
    if rep == INF:
        return -INF
    return math.fsum(rho.log_probs[idx].tolist()) - rep


def incremental_weight_delta(state: LocalTimeMap, next_point, step_prob: float, phi: Potential) -> float:
    """Change of log sigma when the walk moves onto ``next_point``.

    ``state`` is left untouched; the caller pushes the point afterwards.
    """
    c = state.get(tuple(int(v) for v in next_point), 0)
    hi = phi(c + 1)
    if hi == INF:
        return -INF
    return math.log(step_prob) - (hi - phi(c))
