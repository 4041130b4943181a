import math

import numpy as np
import pytest
from scipy.stats import chisquare

from conftest import pooled_chisquare

from polymer_lab import (IbProcessConfig, Model, Potential, SamplerConfig, ballistic_scan, diamond_density_estimate,
                         exact_sample, is_irreducible, mcmc_sample, renewal_times, shift, simulate_ib_process,
                         verify_conditional_identity)
from polymer_lab.errors import BudgetExceeded
from polymer_lab.montecarlo import batch_means, exact_sample_codes, piece_law

FREE = Model.nearest_neighbor(Potential.free())
SAW = Model.nearest_neighbor(Potential.saw())
WEAK = Model.nearest_neighbor(Potential.weak(1.0))


def test_saw_two_steps_uniform_over_twelve():
    codes = exact_sample_codes(SAW, 2, 60_000, seed=11)
    keys, counts = np.unique(codes[:, 0] * 4 + codes[:, 1], return_counts=True)
    assert len(keys) == 12
    assert chisquare(counts).pvalue > 0.001


def test_exact_sample_is_deterministic():
    a = exact_sample_codes(WEAK, 5, 1000, seed=3)
    b = exact_sample_codes(WEAK, 5, 1000, seed=3)
    assert a.tobytes() == b.tobytes()
    assert exact_sample_codes(WEAK, 5, 1000, seed=4).tobytes() != a.tobytes()
    walks = exact_sample(WEAK, 5, 10, seed=3)
    assert all(w.length == 5 for w in walks)


def test_exact_sample_respects_budget():
    with pytest.raises(BudgetExceeded):
        exact_sample_codes(WEAK, 12, 10, seed=0, budget=1000)


def test_free_chain_accepts_every_pivot():
    r = mcmc_sample(FREE, SamplerConfig(mode="mcmc", n=8, chains=2, sweeps=500, burn_in=10, seed=1))
    for c in r.chains:
        assert c.acceptance("pivot") == 1.0
        assert c.acceptance("window") == 1.0


def test_chains_with_different_seeds_agree():
    cfg = dict(mode="mcmc", n=10, chains=4, sweeps=20_000, burn_in=500)
    a = mcmc_sample(SAW, SamplerConfig(seed=12345, **cfg)).estimate(lambda x, y, r: r)
    b = mcmc_sample(SAW, SamplerConfig(seed=54321, **cfg)).estimate(lambda x, y, r: r)
    assert abs(a[0] - b[0]) < 3 * math.hypot(a[1], b[1])


def test_saw_chain_stays_self_avoiding():
    r = mcmc_sample(SAW, SamplerConfig(mode="mcmc", n=20, chains=1, sweeps=200, burn_in=0, seed=2))
    pts = {tuple(p) for p in r.chains[0].final.points.tolist()}
    assert len(pts) == 21


def test_batch_means_on_iid_noise():
    rng = np.random.default_rng(0)
    m, se = batch_means([rng.normal(size=20_000) for _ in range(4)])
    assert abs(m) < 4 * se and 0.003 < se < 0.02


def test_ballistic_tails():
    rep = ballistic_scan(SAW, range(4, 9), [0.1, 0.3, 0.5, 1.0, 1.5], SamplerConfig(mode="exact"))
    for p in rep.points:
        assert p.tails[1.0] == 0.0 and p.tails[1.5] == 0.0
        t = [p.tails[v] for v in rep.v_grid]
        assert all(b <= a for a, b in zip(t, t[1:]))
        assert all(0.0 <= v <= 1.0 for v in t)
    assert rep.slopes_strictly_decreasing


def test_ballistic_mcmc_fallback_carries_error_bars():
    cfg = SamplerConfig(mode="auto", sweeps=3000, burn_in=100, chains=2, budget=20_000)
    rep = ballistic_scan(WEAK, [3, 9], [0.5], cfg)
    assert [p.mode for p in rep.points] == ["exact", "mcmc"]
    assert rep.points[1].mean_norm_se > 0
    assert 0.0 <= rep.points[1].tails[0.5] <= 1.0


def test_ib_process_structure():
    res = simulate_ib_process(SAW, IbProcessConfig(L=6, pieces=3000, seed=5))
    ren = set(renewal_times(res.walk))
    assert set(res.renewals[1:-1].tolist()) <= ren
    mx, sx, my, sy = res.drift()
    assert mx - 4 * sx > 0
    assert abs(my) < 4 * sy
    lens = res.piece_lengths.astype(float)
    r1 = np.corrcoef(lens[:-1], lens[1:])[0, 1]
    assert abs(r1) < 4 / math.sqrt(len(lens))
    sh = shift(res)
    assert sh.walk.length == res.walk.length - res.renewals[1]
    assert sh.renewals[0] == 0 and len(sh.renewals) == len(res.renewals) - 1


def test_single_piece_law():
    law = piece_law(WEAK, 4)
    assert 0 < law.mass_gap < 1
    idx = [simulate_ib_process(WEAK, IbProcessConfig(L=4, pieces=1, seed=s), law).piece_index[0]
           for s in range(4000)]
    counts = np.bincount(idx, minlength=len(law.probs))
    w = simulate_ib_process(WEAK, IbProcessConfig(L=4, pieces=1, seed=0), law).walk
    assert is_irreducible(w)
    assert pooled_chisquare(counts, law.probs * len(idx)) > 0.001


@pytest.mark.parametrize("model,n", [(FREE, 3), (FREE, 1), (Model.nearest_neighbor(Potential.weak(2.0)), 6)])
def test_conditional_identity_examples(model, n):
    assert verify_conditional_identity(model, n) < 1e-12


def test_diamond_density():
    cfg = IbProcessConfig(L=8, pieces=5000, seed=9)
    res = simulate_ib_process(SAW, cfg)
    ests = [diamond_density_estimate(SAW, cfg, w, result=res) for w in (5, 20, 50, 200)]
    assert ests[2].positive
    d = [e.density for e in ests]
    assert all(b <= a for a, b in zip(d, d[1:]))
    assert all(0 <= v <= 1 for v in d)
