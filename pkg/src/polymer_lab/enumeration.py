"""Exhaustive weighted enumeration of walks and bridges.

Per length n the enumerator produces Z_n (all walks), H_n (bridges),
H_{n,h} (bridges ending at x = h), the half-space sum over W_n^+ and the
irreducible-bridge mass. From these come the two-sided bracket on the
connective constant, the Kesten partial sums and truncated generating
series.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .errors import BudgetExceeded, CapExceeded, DegenerateModel, SNotBelowOne
from .model import Model

DEFAULT_BUDGET = 5_000_000_000
_CLASSES = ("Z", "H", "Zplus", "iB")


def _phi_table(model: Model, max_len: int) -> np.ndarray:
    return model.phi.table(max_len + 2)


def _rational_ok(model: Model, N: int) -> bool:
    return model.is_rational and model.rho.denominator ** N < 2**62


def _step_arrays(model: Model):
    steps = np.ascontiguousarray(model.step_set.array, dtype=np.int64)
    logp = np.ascontiguousarray(model.rho.log_probs, dtype=np.float64)
    nums = np.array(model.rho.numerators or (1,) * len(steps), dtype=np.int64)
    return steps, logp, nums


def _probs(model: Model) -> np.ndarray:
    return np.array(model.rho.probabilities, dtype=np.float64)


@dataclass
class _Partial:
    """Raw kernel accumulators of one subtask (sum + compensation pairs)."""

    acc: np.ndarray
    comp: np.ndarray
    lse_m: np.ndarray
    lse_s: np.ndarray
    counts: np.ndarray
    ints: list
    hnh: np.ndarray
    hnh_c: np.ndarray
    xh: np.ndarray
    xh_c: np.ndarray
    nodes: int
    status: int

    @classmethod
    def zero(cls, N: int, R: int) -> "_Partial":
        return cls(
            np.zeros((5, N + 1)), np.zeros((5, N + 1)),
            np.full((4, N + 1), -np.inf), np.zeros((4, N + 1)),
            np.zeros((4, N + 1), np.int64), [[0] * (N + 1) for _ in range(4)],
            np.zeros((N + 1, R + 1)), np.zeros((N + 1, R + 1)),
            np.zeros((N + 1, 2 * R + 1)), np.zeros((N + 1, 2 * R + 1)),
            0, K.OK,
        )


def _two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def _merge(parts: list[_Partial], N: int, R: int) -> _Partial:
    """Fold subtask accumulators in list order (pure, deterministic)."""
    out = _Partial.zero(N, R)
    for p in parts:
        for a, c, pa, pc in ((out.acc, out.comp, p.acc, p.comp),
                             (out.hnh, out.hnh_c, p.hnh, p.hnh_c),
                             (out.xh, out.xh_c, p.xh, p.xh_c)):
            s, err = _two_sum(a, pa)
            a[...] = s
            c += err + pc
        lv_out = np.where(out.lse_s > 0, out.lse_m + np.log(np.where(out.lse_s > 0, out.lse_s, 1.0)), -np.inf)
        lv_p = np.where(p.lse_s > 0, p.lse_m + np.log(np.where(p.lse_s > 0, p.lse_s, 1.0)), -np.inf)
        both = np.logaddexp(lv_out, lv_p)
        out.lse_m = both
        out.lse_s = np.where(np.isfinite(both), 1.0, 0.0)
        out.counts += p.counts
        for k in range(4):
            for n in range(N + 1):
                out.ints[k][n] += p.ints[k][n]
        out.nodes += p.nodes
        if p.status != K.OK and out.status == K.OK:
            out.status = p.status
    return out


@dataclass(frozen=True)
class Shard:
    """One independent piece of the DFS: every walk extending ``prefix``
    whose length lies in [min_depth, max_depth]."""

    prefix: np.ndarray = field(repr=False)
    min_depth: int
    max_depth: int


@dataclass
class ShardPlan:
    N: int
    tasks: list[Shard]
    head: Shard | None = None

    @property
    def all_tasks(self) -> list[Shard]:
        return ([self.head] if self.head is not None else []) + self.tasks


def shard_enumeration(model: Model, N: int, prefix_depth: int) -> ShardPlan:
    """Split the enumeration up to length N at depth ``prefix_depth``.

    Each weighted prefix of that length is one task continuing the DFS.
    Lengths below ``prefix_depth`` are covered by a separate ``head`` task.
    """
    if not 0 <= prefix_depth < max(N, 1):
        raise ValueError("prefix_depth must satisfy 0 <= prefix_depth < N")
    d = model.dimension
    if prefix_depth == 0:
        return ShardPlan(N, [Shard(np.zeros((1, d), np.int64), 0, N)])
    codes, lens, _ = collect(model, prefix_depth, prefix_depth, kind="all")
    steps = model.step_set.array
    tasks = []
    for row in codes:
        pts = np.vstack([np.zeros((1, d), np.int64), np.cumsum(steps[row[:prefix_depth]], axis=0)])
        tasks.append(Shard(pts, prefix_depth, N))
    head = Shard(np.zeros((1, d), np.int64), 0, prefix_depth - 1)
    return ShardPlan(N, tasks, head)


def run_shard(model: Model, N: int, task: Shard, node_limit: int = DEFAULT_BUDGET) -> _Partial:
    steps, logp, nums = _step_arrays(model)
    phi_tab = _phi_table(model, N)
    rational = _rational_ok(model, N)
    out = K.enumerate_walks(steps, _probs(model), logp, nums, phi_tab, N, np.ascontiguousarray(task.prefix),
                            task.min_depth, task.max_depth, node_limit, rational)
    acc, comp, lse_m, lse_s, lse_c, counts, ints, hnh, hnh_c, xh, xh_c, nodes, status = out
    lse_s = lse_s + lse_c
    if status == K.DEAD_PREFIX:
        return _Partial.zero(N, N * model.D)
    return _Partial(acc, comp, lse_m, lse_s, counts, ints.tolist(), hnh, hnh_c, xh, xh_c, int(nodes), int(status))


@dataclass
class EnumerationReport:
    """Per-length aggregates for n = 0..N.

    Linear values are compensated sums; ``*_log`` are independent
    log-sum-exp accumulations of the same terms. ``exact`` holds integer
    sums of weight numerators (sum * denominator**n) when the model admits
    exact arithmetic, else None. Length 0 is the empty walk: Z_0 = H_0 =
    Zplus_0 = 1 and iB_0 = 0.
    """

    model: Model
    N: int
    Z: np.ndarray
    H: np.ndarray
    Zplus: np.ndarray
    iB_mass: np.ndarray
    Z_log: np.ndarray
    H_log: np.ndarray
    Zplus_log: np.ndarray
    iB_log: np.ndarray
    counts: dict[str, np.ndarray]
    H_nh: np.ndarray
    endpoint_norm: np.ndarray
    x_hist: np.ndarray
    exact: dict[str, list[int]] | None
    nodes: int
    partial: bool = False

    @property
    def x_offset(self) -> int:
        """Column of ``x_hist`` holding x(gamma(n)) = 0."""
        return (self.x_hist.shape[1] - 1) // 2

    def lse_agreement(self) -> float:
        """Largest relative gap between the linear and log-sum-exp totals."""
        worst = 0.0
        for lin, lg in ((self.Z, self.Z_log), (self.H, self.H_log),
                        (self.Zplus, self.Zplus_log), (self.iB_mass, self.iB_log)):
            for a, b in zip(lin, lg):
                if a > 0:
                    worst = max(worst, abs(math.exp(b) - a) / a)
        return worst

    def mean_norm(self, n: int) -> float:
        """E_{SRP_n} |gamma(n)| (Euclidean norm)."""
        return self.endpoint_norm[n] / self.Z[n]

    def x_distribution(self, n: int) -> tuple[np.ndarray, np.ndarray]:
        xs = np.arange(self.x_hist.shape[1]) - self.x_offset
        return xs, self.x_hist[n] / self.Z[n]

    def tail(self, n: int, v: float) -> float:
        """P_{SRP_n}(x(gamma(n)) > v n)."""
        xs, p = self.x_distribution(n)
        mask = xs > v * n
        return float(math.fsum(p[mask].tolist())) if mask.any() else 0.0


def _finish(model: Model, N: int, part: _Partial, partial: bool) -> EnumerationReport:
    tot = part.acc + part.comp
    with np.errstate(divide="ignore"):
        logs = np.where(part.lse_s > 0, part.lse_m + np.log(np.where(part.lse_s > 0, part.lse_s, 1.0)), -np.inf)
    exact = None
    if _rational_ok(model, N):
        exact = {name: [int(v) for v in part.ints[k]] for k, name in enumerate(_CLASSES)}
    return EnumerationReport(
        model=model, N=N,
        Z=tot[K.Z], H=tot[K.H], Zplus=tot[K.ZPLUS], iB_mass=tot[K.IB],
        Z_log=logs[K.Z], H_log=logs[K.H], Zplus_log=logs[K.ZPLUS], iB_log=logs[K.IB],
        counts={name: part.counts[k].copy() for k, name in enumerate(_CLASSES)},
        H_nh=part.hnh + part.hnh_c, endpoint_norm=tot[K.NORM], x_hist=part.xh + part.xh_c,
        exact=exact, nodes=part.nodes, partial=partial,
    )


def default_threads() -> int:
    env = os.environ.get("POLYMER_LAB_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def enumerate_all(model: Model, N: int, *, threads: int = 1, prefix_depth: int | None = None,
                  budget: int = DEFAULT_BUDGET) -> EnumerationReport:
    """Enumerate every walk of length <= N from the origin.

    With ``threads`` > 1 (or an explicit ``prefix_depth``) the DFS is
    sharded and subtasks run on a thread pool; the merge folds subtask
    results in a fixed order so totals do not depend on the worker count.
    Raises BudgetExceeded (carrying a partial report) when more than
    ``budget`` nodes would be visited, CapExceeded when a table potential
    runs out of range.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    if prefix_depth is None:
        prefix_depth = 0
        if threads > 1:
            prefix_depth = 1
            while prefix_depth < N - 1 and len(model.step_set) ** prefix_depth < 4 * threads:
                prefix_depth += 1
    plan = shard_enumeration(model, N, prefix_depth)
    return run_plan(model, plan, threads=threads, budget=budget)


def run_plan(model: Model, plan: ShardPlan, *, threads: int = 1, budget: int = DEFAULT_BUDGET) -> EnumerationReport:
    N = plan.N
    tasks = plan.all_tasks
    if threads <= 1:
        parts = []
        remaining = budget
        for t in tasks:
            p = run_shard(model, N, t, max(remaining, 0))
            parts.append(p)
            remaining -= p.nodes
            if p.status != K.OK:
                break
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(lambda t: run_shard(model, N, t, budget), tasks))
    merged = _merge(parts, N, N * model.D)
    if merged.status == K.CAP_EXCEEDED:
        raise CapExceeded(f"a vertex was visited more often than the potential table allows (cap {model.phi.cap})")
    if merged.status == K.BUDGET_EXCEEDED or merged.nodes > budget:
        raise BudgetExceeded(f"enumeration exceeded the budget of {budget} nodes",
                             partial=_finish(model, N, merged, True))
    return _finish(model, N, merged, False)


@dataclass
class LambdaBracket:
    """lower = max_n (1/n) log H_n <= lambda_0 <= upper = min_n (1/n) log Z_n."""

    lower: float
    upper: float
    lower_trace: np.ndarray
    upper_trace: np.ndarray

    def contains(self, value: float, tol: float = 0.0) -> bool:
        return self.lower - tol <= value <= self.upper + tol


def lambda_bracket(report: EnumerationReport) -> LambdaBracket:
    if report.N < 2:
        raise ValueError("the bracket needs N >= 2")
    n = np.arange(1, report.N + 1)
    if np.any(report.H[1:] <= 0):
        raise DegenerateModel("some H_n vanishes; the step set has no x-increasing step")
    lo = np.log(report.H[1:]) / n
    up = np.log(report.Z[1:]) / n
    return LambdaBracket(float(lo.max()), float(up.min()), lo, up)


def kesten_partial_sum(report: EnumerationReport, lam: float) -> float:
    """S_N(lambda) = sum_{n <= N} iB_n exp(-lambda n)."""
    return math.fsum(float(report.iB_mass[n]) * math.exp(-lam * n) for n in range(1, report.N + 1))


@dataclass
class SeriesEvaluation:
    lam: float
    N: int
    W_truncated: float
    H_truncated: float
    S: float
    resummation: float | None
    """1 / (1 - S_N(lambda)) when S_N < 1, else None."""

    @property
    def resummation_bound_holds(self) -> bool | None:
        if self.resummation is None:
            return None
        return self.H_truncated <= self.resummation * (1 + 1e-12)


def _discounted(values: np.ndarray, lam: float, N: int) -> float:
    terms = [float(values[0])]
    terms += [float(values[n]) * math.exp(-lam * n) for n in range(1, N + 1)]
    return math.fsum(terms)


def evaluate_series(report: EnumerationReport, lam: float, *, strict: bool = False) -> SeriesEvaluation:
    """Truncated W(lambda), H(lambda) and the Kesten resummation check.

    With ``strict`` a partial sum S_N(lambda) >= 1 raises SNotBelowOne;
    otherwise the comparison is skipped and ``resummation`` is None.
    """
    S = kesten_partial_sum(report, lam)
    if S >= 1 and strict:
        raise SNotBelowOne(f"S_N({lam}) = {S} >= 1")
    res = 1.0 / (1.0 - S) if S < 1 else None
    return SeriesEvaluation(lam, report.N, _discounted(report.Z, lam, report.N),
                            _discounted(report.H, lam, report.N), S, res)


def fitted_sqrt_constants(report: EnumerationReport) -> np.ndarray:
    """Smallest C_n with exp(-C_n sqrt(n)) Z_n <= H_n, for n = 1..N."""
    n = np.arange(1, report.N + 1)
    return np.log(report.Z[1:] / report.H[1:]) / np.sqrt(n)


_KINDS = {"all": 0, "bridge": 1, "irreducible": 2}


def collect(model: Model, lo: int, hi: int, kind: str = "all", *, budget: int = DEFAULT_BUDGET,
            capacity: int = 4096):
    """Every weighted walk with lo <= length <= hi of the given kind.

    Returns (codes, lengths, log_weights); ``codes[r, :lengths[r]]`` are step
    indices, rows are in lexicographic step-index order.
    """
    steps, logp, _ = _step_arrays(model)
    phi_tab = _phi_table(model, hi)
    while True:
        codes, lens, lws, count, nodes, status = K.collect_walks(
            steps, logp, phi_tab, lo, hi, _KINDS[kind], capacity, budget)
        if status == K.CAP_EXCEEDED:
            raise CapExceeded(f"a vertex was visited more often than the potential table allows (cap {model.phi.cap})")
        if status == K.BUDGET_EXCEEDED:
            raise BudgetExceeded(f"collecting walks exceeded the budget of {budget} nodes")
        if count <= capacity:
            return codes[:count, :hi].astype(np.int64), lens[:count].copy(), lws[:count].copy()
        capacity = int(count)
