"""Sampling and statistics.

Exact sampling of P_SRP_n by sequential prefix descent over the enumerated
walks, a Metropolis chain (pivots plus short window redraws) for lengths
beyond enumeration, the ballistic-tail scan, and a truncated i.i.d.
concatenation of irreducible bridges with its diamond-point density.

All randomness comes from numpy's Philox generator; independent streams
are obtained with ``SeedSequence.spawn`` so chains never share state.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import asdict, dataclass, field

import numpy as np

from . import _kernels as K
from .decompose import is_diamond_point
from .enumeration import (DEFAULT_BUDGET, _phi_table, _step_arrays, collect, enumerate_all,
                          kesten_partial_sum, lambda_bracket)
from .errors import BudgetExceeded, CapExceeded, EmptyTruncation
from .lattice import Walk
from .model import Model

RNG_ALGORITHM = "numpy Philox4x64, streams from SeedSequence(seed).spawn"


def _generators(seed: int, count: int) -> list[np.random.Generator]:
    return [np.random.Generator(np.random.Philox(s)) for s in np.random.SeedSequence(seed).spawn(count)]


def _walk_from_code(model: Model, code) -> Walk:
    return Walk.from_steps(model.step_set.array[np.asarray(code, dtype=np.int64)])


@dataclass
class SamplerConfig:
    mode: str = "exact"
    n: int = 4
    chains: int = 4
    sweeps: int = 10_000
    burn_in: int = 1_000
    seed: int = 0
    p_pivot: float = 0.5
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if self.mode not in ("exact", "mcmc", "auto"):
            raise ValueError(f"unknown sampler mode {self.mode!r}")
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if not 0.0 <= self.p_pivot <= 1.0:
            raise ValueError("p_pivot must lie in [0, 1]")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["rng"] = RNG_ALGORITHM
        return d


# -- exact sampling ------------------------------------------------------------

def exact_sample_codes(model: Model, n: int, count: int, seed: int, *,
                       budget: int = DEFAULT_BUDGET) -> np.ndarray:
    """Step-index arrays (count, n) of i.i.d. draws from P_SRP_n."""
    codes, _, lws = collect(model, n, n, "all", budget=budget)
    if len(codes) == 0:
        raise EmptyTruncation(f"no walk of length {n} has positive weight")
    w = np.exp(lws - lws.max())
    cumw = np.concatenate(([0.0], np.cumsum(w)))
    rng = _generators(seed, 1)[0]
    u = rng.random((count, n))
    idx = K.sequential_descent(codes, cumw, u)
    return codes[idx]


def exact_sample(model: Model, n: int, count: int, seed: int, *, budget: int = DEFAULT_BUDGET) -> list[Walk]:
    """i.i.d. walks from P_SRP_n, drawn one step at a time proportionally to
    the total weight of the completions below each prefix."""
    return [_walk_from_code(model, c) for c in exact_sample_codes(model, n, count, seed, budget=budget)]


# -- Metropolis chain ------------------------------------------------------------

@dataclass
class ChainResult:
    """Per-sweep endpoint records after burn-in, plus move statistics."""

    x: np.ndarray
    y: np.ndarray
    norm: np.ndarray
    final: Walk
    proposed: dict[str, int]
    accepted: dict[str, int]

    def acceptance(self, move: str) -> float:
        return self.accepted[move] / self.proposed[move] if self.proposed[move] else float("nan")


@dataclass
class McmcResult:
    config: SamplerConfig
    chains: list[ChainResult]

    def series(self, name: str) -> list[np.ndarray]:
        return [getattr(c, name) for c in self.chains]

    def estimate(self, f, batches: int = 20) -> tuple[float, float]:
        """Batch-means mean and standard error of f(x, y, norm) over all chains."""
        return batch_means([f(c.x, c.y, c.norm) for c in self.chains], batches)

    @property
    def samples(self) -> int:
        return sum(len(c.x) for c in self.chains)


def batch_means(series: list[np.ndarray], batches: int = 20) -> tuple[float, float]:
    """Pooled mean and batch-means standard error over several chains."""
    means = []
    for s in series:
        s = np.asarray(s, dtype=np.float64)
        b = max(1, min(batches, len(s)))
        size = len(s) // b
        for k in range(b):
            means.append(s[k * size:(k + 1) * size].mean())
    means = np.array(means)
    mean = float(math.fsum(np.concatenate([np.asarray(s, dtype=np.float64) for s in series]).tolist())
                 / sum(len(s) for s in series))
    if len(means) < 2:
        return mean, float("nan")
    return mean, float(means.std(ddof=1) / math.sqrt(len(means)))


def _initial_code(model: Model, n: int) -> np.ndarray:
    # straight line along the step with the largest x: self-avoiding, positive weight
    steps = model.step_set.steps
    best = max(range(len(steps)), key=lambda s: (steps[s][0], steps[s]))
    return np.full(n, best, dtype=np.int16)


_BLOCK = 1 << 18


def _run_chain(model: Model, cfg: SamplerConfig, rng: np.random.Generator) -> ChainResult:
    n = cfg.n
    steps, _, _ = _step_arrays(model)
    probs = np.array(model.rho.probabilities, dtype=np.float64)
    cum = np.concatenate(([0.0], np.cumsum(probs)))
    sym = np.ascontiguousarray(model.step_set.symmetry_table, dtype=np.int16)
    phi_tab = _phi_table(model, n)
    code = _initial_code(model, n)
    total = (cfg.burn_in + cfg.sweeps) * n
    recs = []
    stats = np.zeros((2, 2), np.int64)
    done = 0
    while done < total:
        size = min(_BLOCK - _BLOCK % n, total - done)
        u = rng.random((size, 8))
        code, rec, st, status = K.mcmc_run(code, steps, cum, sym, phi_tab, u, cfg.p_pivot, n)
        if status == K.CAP_EXCEEDED:
            raise CapExceeded(f"a vertex was visited more often than the potential table allows (cap {model.phi.cap})")
        recs.append(rec)
        stats += st
        done += size
    rec = np.concatenate(recs)[cfg.burn_in:]
    names = ("pivot", "window")
    return ChainResult(rec[:, 0].copy(), rec[:, 1].copy(), rec[:, 2].copy(), _walk_from_code(model, code),
                       {names[k]: int(stats[k, 0]) for k in range(2)},
                       {names[k]: int(stats[k, 1]) for k in range(2)})


def mcmc_sample(model: Model, config: SamplerConfig) -> McmcResult:
    """Metropolis chains on walks of length n with stationary law P_SRP_n.

    A proposal is either a pivot (a non-trivial lattice symmetry applied to
    the steps after a uniform index) or a redraw of a window of at most four
    consecutive steps from rho. Both are accepted with probability
    min(1, exp(Phi_old - Phi_new)). One sweep is n proposals.
    """
    gens = _generators(config.seed, config.chains)
    return McmcResult(config, [_run_chain(model, config, g) for g in gens])


# -- ballistic scan ----------------------------------------------------------------

@dataclass
class BallisticPoint:
    n: int
    mode: str
    mean_norm: float
    mean_norm_se: float
    tails: dict[float, float]
    tail_se: dict[float, float]

    @property
    def a_n(self) -> float:
        return math.log(self.mean_norm) / self.n if self.mean_norm > 0 else -math.inf


@dataclass
class BallisticScanReport:
    points: list[BallisticPoint]
    v_grid: list[float]
    config: dict = field(default_factory=dict)

    @property
    def slopes(self) -> list[float]:
        return [p.a_n for p in self.points]

    @property
    def slopes_negative(self) -> bool:
        return all(a < 0 for a in self.slopes)

    @property
    def slopes_nonincreasing(self) -> bool:
        a = self.slopes
        return all(b <= c for c, b in zip(a, a[1:]))

    @property
    def slopes_strictly_decreasing(self) -> bool:
        a = self.slopes
        return all(b < c for c, b in zip(a, a[1:]))


def _exact_points(model, ns, v_grid, budget, threads):
    rep = enumerate_all(model, max(ns), threads=threads, budget=budget)
    out = []
    for n in ns:
        tails = {v: rep.tail(n, v) for v in v_grid}
        out.append(BallisticPoint(n, "exact", rep.mean_norm(n), 0.0, tails, {v: 0.0 for v in v_grid}))
    return out


def _mcmc_point(model, n, v_grid, cfg):
    res = mcmc_sample(model, SamplerConfig(**{**asdict(cfg), "mode": "mcmc", "n": n}))
    m, se = res.estimate(lambda x, y, r: r)
    tails, tse = {}, {}
    for v in v_grid:
        tails[v], tse[v] = res.estimate(lambda x, y, r, v=v: (x > v * n).astype(np.float64))
    return BallisticPoint(n, "mcmc", m, se, tails, tse)


def ballistic_scan(model: Model, schedule, v_grid, config: SamplerConfig | None = None, *,
                   threads: int = 1) -> BallisticScanReport:
    """E|gamma(n)| and P(x(gamma(n)) > v n) along a schedule of lengths.

    Exact enumeration is used while it fits the budget (mode "exact" or
    "auto"); otherwise, or with mode "mcmc", the Metropolis chain.
    """
    ns = sorted(set(int(n) for n in schedule))
    if not ns:
        raise ValueError("empty schedule")
    v_grid = [float(v) for v in v_grid]
    cfg = config or SamplerConfig(mode="auto")
    points: list[BallisticPoint] = []
    if cfg.mode in ("exact", "auto"):
        try:
            points = _exact_points(model, ns, v_grid, cfg.budget, threads)
        except BudgetExceeded:
            if cfg.mode == "exact":
                raise
            points = []
            for n in ns:
                try:
                    points.extend(_exact_points(model, [n], v_grid, cfg.budget, threads))
                except BudgetExceeded:
                    points.append(_mcmc_point(model, n, v_grid, cfg))
    else:
        points = [_mcmc_point(model, n, v_grid, cfg) for n in ns]
    return BallisticScanReport(points, v_grid, {"sampler": cfg.to_dict(), "schedule": ns})


# -- irreducible-bridge process -----------------------------------------------------

@dataclass
class IbProcessConfig:
    L: int = 8
    lam: float | None = None
    pieces: int = 1000
    seed: int = 0
    budget: int = DEFAULT_BUDGET

    def to_dict(self) -> dict:
        d = asdict(self)
        d["rng"] = RNG_ALGORITHM
        return d


@dataclass
class PieceLaw:
    """Truncated normalized law of irreducible bridges of length <= L."""

    codes: np.ndarray
    lengths: np.ndarray
    probs: np.ndarray
    lam: float
    mass_gap: float

    def walk(self, model: Model, k: int) -> Walk:
        return _walk_from_code(model, self.codes[k, :self.lengths[k]])


def piece_law(model: Model, L: int, lam: float | None = None, *, budget: int = DEFAULT_BUDGET) -> PieceLaw:
    """P(gamma) proportional to sigma(gamma) exp(-lam |gamma|) over irreducible
    bridges with |gamma| <= L. ``lam`` defaults to the upper end of the
    enumerated bracket; ``mass_gap`` is 1 - S_L(lam)."""
    if lam is None:
        lam = lambda_bracket(enumerate_all(model, max(L, 2), budget=budget)).upper
    codes, lens, lws = collect(model, 1, L, "irreducible", budget=budget)
    if len(codes) == 0:
        raise EmptyTruncation(f"no irreducible bridge of length <= {L}")
    lw = lws - lam * lens
    w = np.exp(lw - lw.max())
    probs = w / math.fsum(w.tolist())
    S = math.fsum(np.exp(lw).tolist())
    return PieceLaw(codes, lens, probs, float(lam), 1.0 - S)


@dataclass
class IbProcessResult:
    walk: Walk
    renewals: np.ndarray
    piece_index: np.ndarray
    piece_lengths: np.ndarray
    lam: float
    mass_gap: float
    config: dict

    def drift(self) -> tuple[float, float, float, float]:
        """(mean x advance per piece, its SE, mean y advance per piece, its SE)."""
        ends = self.walk.points[self.renewals]
        inc = np.diff(ends, axis=0).astype(np.float64)
        k = len(inc)
        sx = inc[:, 0].std(ddof=1) / math.sqrt(k) if k > 1 else float("nan")
        mx = float(inc[:, 0].mean())
        if self.walk.dimension < 2:
            return mx, float(sx), 0.0, 0.0
        sy = inc[:, 1].std(ddof=1) / math.sqrt(k) if k > 1 else float("nan")
        return mx, float(sx), float(inc[:, 1].mean()), float(sy)


def shift(res: IbProcessResult) -> IbProcessResult:
    """Re-index the trajectory at its first renewal time r_1."""
    r1 = int(res.renewals[1])
    w = res.walk.segment(r1, res.walk.length)
    return IbProcessResult(w, res.renewals[1:] - r1, res.piece_index[1:], res.piece_lengths[1:],
                           res.lam, res.mass_gap, res.config)


def simulate_ib_process(model: Model, cfg: IbProcessConfig, law: PieceLaw | None = None) -> IbProcessResult:
    """Concatenate i.i.d. pieces drawn from the truncated irreducible-bridge law.

    The returned ``renewals`` are r_0 = 0, r_1, ..., r_K (piece boundaries).
    """
    if law is None:
        law = piece_law(model, cfg.L, cfg.lam, budget=cfg.budget)
    rng = _generators(cfg.seed, 1)[0]
    idx = rng.choice(len(law.probs), size=cfg.pieces, p=law.probs)
    lens = law.lengths[idx]
    steps = np.concatenate([law.codes[k, :law.lengths[k]] for k in idx])
    w = _walk_from_code(model, steps)
    ren = np.concatenate(([0], np.cumsum(lens)))
    return IbProcessResult(w, ren, idx, lens, law.lam, law.mass_gap, cfg.to_dict())


# -- conditional identity -------------------------------------------------------------

def verify_conditional_identity(model: Model, n: int, *, budget: int = DEFAULT_BUDGET) -> float:
    """Total-variation distance between the bridge law sigma / H_n and the law
    of concatenations of irreducible pieces with total length n.

    The second law is built by summing products of piece weights over all
    ordered sequences of irreducible bridges; exp(-lambda n) is common to
    all of them and drops out after normalization.
    """
    bcodes, _, blw = collect(model, n, n, "bridge", budget=budget)
    icodes, ilens, ilw = collect(model, 1, n, "irreducible", budget=budget)
    by_len = defaultdict(list)
    for c, l, w in zip(icodes, ilens, ilw):
        by_len[int(l)].append((tuple(int(s) for s in c[:l]), float(w)))

    concat: dict[tuple, float] = {}

    def grow(prefix: tuple, lw: float, left: int):
        if left == 0:
            concat[prefix] = concat.get(prefix, 0.0) + math.exp(lw)
            return
        for l in range(1, left + 1):
            for c, w in by_len.get(l, ()):
                grow(prefix + c, lw + w, left - l)

    grow((), 0.0, n)
    bridge = {tuple(int(s) for s in c): math.exp(w) for c, w in zip(bcodes, blw)}
    zb = math.fsum(bridge.values())
    zc = math.fsum(concat.values())
    if zb == 0 and zc == 0:
        return 0.0
    keys = set(bridge) | set(concat)
    return 0.5 * math.fsum(abs(bridge.get(k, 0.0) / zb - concat.get(k, 0.0) / zc) for k in keys)


# -- diamond density ---------------------------------------------------------------------

@dataclass
class DiamondDensity:
    """Fraction of interior renewal points that pass the windowed cone test.

    This is an upper-bound estimate at window ``window``: the true property
    constrains the whole trajectory.
    """

    density: float
    se: float
    window: int
    renewals: int
    lower95: float

    @property
    def positive(self) -> bool:
        return self.lower95 > 0


def diamond_density_estimate(model: Model, cfg: IbProcessConfig, window: int = 50, *, batches: int = 20,
                             result: IbProcessResult | None = None) -> DiamondDensity:
    res = result if result is not None else simulate_ib_process(model, cfg)
    w = res.walk
    # same candidate set for every window, so larger windows can only remove hits
    cand = [int(r) for r in res.renewals[1:-1]]
    if not cand:
        return DiamondDensity(float("nan"), float("nan"), window, 0, float("nan"))
    hits = np.array([is_diamond_point(w, r, window) for r in cand], dtype=np.float64)
    mean, se = batch_means([hits], batches)
    if not math.isfinite(se):
        se = 0.0
    return DiamondDensity(mean, se, window, len(cand), mean - 1.96 * se)
