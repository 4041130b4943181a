"""Shared fixtures and independent brute-force oracles.

The oracles here never touch the compiled kernels: they walk step
sequences with plain Python and exact Fractions.
"""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np
import pytest

from polymer_lab import Model, Potential, Walk

NN = [(1, 0), (-1, 0), (0, 1), (0, -1)]
SPREAD = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1), (2, 0), (-2, 0), (0, 2), (0, -2)]

ACCEPTANCE: dict[int, list[tuple[bool, str]]] = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    ACCEPTANCE.setdefault(criterion, []).append((bool(ok), detail))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[k]
        ok = all(p for p, _ in parts)
        detail = "; ".join(d for _, d in parts)
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


# -- brute force -------------------------------------------------------------------

def saw_counts(n_max: int) -> list[int]:
    """c_n for n = 0..n_max by plain recursion on the NN square lattice."""
    counts = [0] * (n_max + 1)

    def rec(p, seen, n):
        counts[n] += 1
        if n == n_max:
            return
        for dx, dy in NN:
            q = (p[0] + dx, p[1] + dy)
            if q not in seen:
                seen.add(q)
                rec(q, seen, n + 1)
                seen.discard(q)

    rec((0, 0), {(0, 0)}, 0)
    return counts


def all_walks(steps, n):
    for seq in itertools.product(steps, repeat=n):
        yield Walk.from_steps(list(seq), dimension=len(steps[0]))


def exact_weight(w: Walk, phi_values, prob: Fraction):
    """sigma as (Fraction step part, total phi) with phi_values a plain dict/callable."""
    counts = {}
    for p in w.points:
        t = tuple(int(c) for c in p)
        counts[t] = counts.get(t, 0) + 1
    rep = sum(phi_values(c) for c in counts.values())
    return prob ** w.length, rep


def random_walk(rng: np.random.Generator, n: int, steps=NN) -> Walk:
    idx = rng.integers(0, len(steps), size=n)
    return Walk.from_steps(np.array(steps)[idx], dimension=len(steps[0]))


# -- fixtures ---------------------------------------------------------------------------

@pytest.fixture(scope="session")
def free_model():
    return Model.nearest_neighbor(Potential.free())


@pytest.fixture(scope="session")
def saw_model():
    return Model.nearest_neighbor(Potential.saw())


@pytest.fixture(scope="session")
def weak_model():
    return Model.nearest_neighbor(Potential.weak(1.0))


_REPORTS = {}


def report(model_kind: str, N: int):
    """Cached enumeration reports (the N=12 runs take seconds each)."""
    from polymer_lab import enumerate_all

    key = (model_kind, N)
    if key not in _REPORTS:
        phi = {"free": Potential.free(), "saw": Potential.saw(), "weak": Potential.weak(1.0)}[model_kind]
        _REPORTS[key] = enumerate_all(Model.nearest_neighbor(phi), N)
    return _REPORTS[key]


def pooled_chisquare(counts, expected, min_expected: float = 5.0) -> float:
    """chi-square p-value after pooling cells with small expectation."""
    from scipy.stats import chisquare

    counts = np.asarray(counts, dtype=float)
    expected = np.asarray(expected, dtype=float)
    big = expected >= min_expected
    obs, exp = counts[big], expected[big]
    if (~big).any() and expected[~big].sum() > 0:
        obs = np.append(obs, counts[~big].sum())
        exp = np.append(exp, expected[~big].sum())
    exp = exp * obs.sum() / exp.sum()
    return float(chisquare(obs, exp).pvalue)
