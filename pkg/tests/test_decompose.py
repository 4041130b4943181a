import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import NN, SPREAD, random_walk
from polymer_lab import (Model, Potential, StepSet, Walk, concatenate, crossing_profile, diamond_times,
                         hw_decompose, hw_reconstruct, irreducible_pieces, is_bridge, is_irreducible,
                         renewal_sandwich, renewal_times, short_zigzags, weight_sigma, width, zigzags)
from polymer_lab import oracles
from polymer_lab.errors import NotABridge

walks = st.lists(st.sampled_from(NN), min_size=0, max_size=40).map(lambda s: Walk.from_steps(s, dimension=2))


def bridges_from(w: Walk):
    return [b for b in hw_decompose(w).bridges if b.length >= 1]


def test_renewal_examples():
    assert renewal_times(Walk.from_compass("EE")) == (1,)
    assert renewal_times(Walk.from_compass("ENW")) == ()


def test_bridge_examples():
    e = Walk.from_compass("E")
    assert is_bridge(e) and is_irreducible(e)
    ee = Walk.from_compass("EE")
    assert is_bridge(ee) and not is_irreducible(ee)
    for s in ("ENESE", "ENENE", "ESENE", "ENWNE", "EENWN"):
        w = Walk.from_compass(s)
        assert is_bridge(w) == oracles.is_bridge(w)
        assert is_irreducible(w) == (oracles.is_bridge(w) and not oracles.renewal_times(w))


@given(walks)
def test_renewals_match_oracle(w):
    assert list(renewal_times(w)) == oracles.renewal_times(w)


@given(walks)
def test_zigzags_match_oracle(w):
    for b in bridges_from(w):
        assert zigzags(b) == oracles.zigzags(b)


def test_zigzag_examples():
    w = Walk.from_compass("EENWNEE")
    assert w.x.tolist() == [0, 1, 2, 2, 1, 1, 2, 3]
    assert (3, 5) in zigzags(w)
    assert [z for z in zigzags(Walk.from_compass("ENENENE")) if z[0] != z[1]] == []
    with pytest.raises(NotABridge):
        zigzags(Walk.from_compass("EW"))


@given(walks)
def test_zigzags_are_disjoint(w):
    for b in bridges_from(w):
        zz = zigzags(b)
        for (a, c), (d, e) in zip(zz, zz[1:]):
            assert c < d


def test_short_zigzag_filter():
    w = Walk.from_compass("EENWNEE")
    assert short_zigzags(w, 1) == [z for z in zigzags(w) if z[1] - z[0] <= 1]


def test_hw_examples():
    b = Walk.from_compass("ENE")
    dec = hw_decompose(b)
    assert dec.bridges == [b] and dec.prepended_step is None
    dec = hw_decompose(Walk.from_compass("EEW"))
    assert dec.positive_widths == [2, 1]
    assert dec.positive_part[1] == Walk.from_compass("E")


@given(walks)
def test_hw_round_trip_and_decreasing_widths(w):
    dec = hw_decompose(w)
    assert hw_reconstruct(dec) == w
    for part in (dec.negative_widths, dec.positive_widths):
        assert all(b < a for a, b in zip(part, part[1:]))
    assert all(is_bridge(b) for b in dec.bridges)
    assert dec.total_steps == w.length + (dec.prepended_step is not None)


@settings(max_examples=50)
@given(st.lists(st.sampled_from(SPREAD), max_size=20))
def test_hw_round_trip_spread_out(steps):
    ss = StepSet(tuple(SPREAD), 2)
    w = Walk.from_steps(steps, dimension=2)
    assert hw_reconstruct(hw_decompose(w, ss)) == w


def test_crossing_examples():
    assert crossing_profile(Walk.from_compass("EE")).rl(1) == {0, 1}
    p = crossing_profile(Walk.from_compass("EW"))
    assert p.rl(1) == set() and p.rl(2) == {0}


@given(walks)
def test_crossings_match_oracle_and_rl_nests(w):
    if w.length == 0:
        return
    p = crossing_profile(w)
    for x0, c in oracles.crossing_counts(w).items():
        assert p.crossings(x0) == c
    for m in range(1, 5):
        assert p.rl(m) <= p.rl(m + 1)


@given(walks)
def test_renewal_sandwich_nearest_neighbour(w):
    for b in bridges_from(w):
        r, rl, hi = renewal_sandwich(b, 1)
        assert r <= rl <= hi


def test_renewal_sandwich_upper_bound_fails_for_spread_out_steps():
    # x: 0,2,3,3,2,2,4 -- no renewal time besides the start, yet three planes crossed once
    w = Walk(np.array([[0, 0], [2, 0], [3, 0], [3, 1], [2, 1], [2, 2], [4, 2]]))
    assert is_bridge(w) and renewal_times(w) == ()
    r, rl, hi = renewal_sandwich(w, 2)
    assert (r, rl, hi) == (1, 3, 2)
    assert r <= rl


@given(walks)
def test_renewal_splits_into_bridges_and_weight_multiplies(w):
    m = Model.nearest_neighbor(Potential.weak(1.0))
    for b in bridges_from(w):
        for r in renewal_times(b):
            assert is_bridge(b.segment(0, r)) and is_bridge(b.segment(r, b.length))
        pieces = irreducible_pieces(b)
        assert all(is_irreducible(p) for p in pieces)
        assert concatenate(*pieces) == b
        total = sum(weight_sigma(p, m.phi, m.rho) for p in pieces)
        assert abs(total - weight_sigma(b, m.phi, m.rho)) < 1e-12


def test_diamond_examples():
    assert diamond_times(Walk.from_compass("EE")) == [1]
    w = Walk.from_compass("ENNE")
    assert diamond_times(w) == oracles.diamond_times(w) == []


@given(walks)
def test_diamonds_match_oracle_and_are_renewals(w):
    for b in bridges_from(w):
        d = diamond_times(b)
        assert d == oracles.diamond_times(b)
        assert set(d) <= set(renewal_times(b))


def test_width_examples():
    assert width(Walk.from_compass("EEEE")) == 0
    assert width(Walk.from_compass("ENE")) == 1


@given(walks)
def test_width_is_y_spread(w):
    y = [int(p[1]) for p in w.points]
    assert width(w) == max(y) - min(y)


def test_decompositions_do_not_mutate():
    rng = np.random.default_rng(0)
    w = random_walk(rng, 30)
    before = w.points.copy()
    hw_decompose(w)
    crossing_profile(w)
    renewal_times(w)
    assert np.array_equal(before, w.points)
