import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import NN
from polymer_lab import (JumpDistribution, LocalTimeMap, Model, Potential, StepSet, Walk, concatenate,
                         incremental_weight_delta, local_times, reflect_x, rotate_xy_clockwise,
                         validate_potential, weight_sigma)
from polymer_lab.errors import CapExceeded, ModelError, NonzeroBase, NotSuperadditive
from polymer_lab.oracles import local_time_log_weight

walk_steps = st.lists(st.sampled_from(NN), min_size=0, max_size=25)
POTENTIALS = [Potential.free(), Potential.saw(), Potential.weak(1.0), Potential.weak(0.3),
              Potential.from_table([0, 0, 1, 3, 7, 12, 18] + [6 * a for a in range(7, 65)])]


def test_local_time_examples():
    assert local_times(Walk.from_compass("E")) == {(0, 0): 1, (1, 0): 1}
    assert local_times(Walk.from_compass("EW")) == {(0, 0): 2, (1, 0): 1}


@given(walk_steps)
def test_local_times_sum_to_point_count(steps):
    w = Walk.from_steps(steps, dimension=2)
    assert sum(local_times(w).values()) == w.length + 1


def test_weight_examples():
    rho = JumpDistribution.uniform(StepSet.nearest_neighbor())
    assert weight_sigma(Walk.from_compass("ENE"), Potential.free(), rho) == pytest.approx(3 * math.log(0.25), abs=1e-15)
    assert weight_sigma(Walk.from_compass("EW"), Potential.saw(), rho) == -math.inf
    assert weight_sigma(Walk.from_compass("EW"), Potential.weak(1), rho) == pytest.approx(2 * math.log(0.25) - 1,
                                                                                        abs=1e-15)


@pytest.mark.parametrize("phi", POTENTIALS, ids=lambda p: p.kind)
@given(walk_steps)
def test_weight_matches_plain_counting(phi, steps):
    m = Model.nearest_neighbor(phi)
    w = Walk.from_steps(steps, dimension=2)
    a = weight_sigma(w, phi, m.rho)
    b = local_time_log_weight(w, phi, m.rho)
    assert a == b or abs(a - b) < 1e-12


@pytest.mark.parametrize("phi", POTENTIALS, ids=lambda p: p.kind)
@given(walk_steps, st.data())
def test_factorisation_bound(phi, steps, data):
    rho = JumpDistribution.uniform(StepSet.nearest_neighbor())
    w = Walk.from_steps(steps, dimension=2)
    k = data.draw(st.integers(0, w.length))
    whole = weight_sigma(w, phi, rho)
    parts = weight_sigma(w.segment(0, k), phi, rho) + weight_sigma(w.segment(k, w.length), phi, rho)
    assert whole <= parts + 1e-12 or whole == -math.inf


@pytest.mark.parametrize("phi", POTENTIALS, ids=lambda p: p.kind)
@given(walk_steps)
def test_weight_is_symmetry_invariant(phi, steps):
    rho = JumpDistribution.uniform(StepSet.nearest_neighbor())
    w = Walk.from_steps(steps, dimension=2)
    s = weight_sigma(w, phi, rho)
    assert weight_sigma(reflect_x(w), phi, rho) == s
    assert weight_sigma(rotate_xy_clockwise(w), phi, rho) == s


@given(st.lists(st.sampled_from(NN), min_size=1, max_size=10), st.lists(st.sampled_from(NN), min_size=1, max_size=10))
def test_factorisation_is_equality_for_bridge_concatenation(a, b):
    from polymer_lab import is_bridge
    phi = Potential.weak(1.0)
    rho = JumpDistribution.uniform(StepSet.nearest_neighbor())
    u, v = Walk.from_steps(a, dimension=2), Walk.from_steps(b, dimension=2)
    if not (is_bridge(u) and is_bridge(v)):
        return
    whole = weight_sigma(concatenate(u, v), phi, rho)
    assert abs(whole - weight_sigma(u, phi, rho) - weight_sigma(v, phi, rho)) < 1e-12


def test_incremental_delta_examples():
    st_ = LocalTimeMap()
    st_.push((0, 0))
    assert incremental_weight_delta(st_, (1, 0), 0.25, Potential.weak(2.5)) == math.log(0.25)
    assert incremental_weight_delta(st_, (0, 0), 0.25, Potential.weak(2.5)) == pytest.approx(math.log(0.25) - 2.5)
    assert incremental_weight_delta(st_, (0, 0), 0.25, Potential.saw()) == -math.inf


@given(walk_steps)
def test_incremental_deltas_telescope(steps):
    phi = Potential.weak(0.7)
    w = Walk.from_steps(steps, dimension=2)
    state = LocalTimeMap()
    state.push(w.points[0])
    total = 0.0
    for p in w.points[1:]:
        total += incremental_weight_delta(state, p, 0.25, phi)
        state.push(p)
    assert total == pytest.approx(weight_sigma(w, phi, JumpDistribution.uniform(StepSet.nearest_neighbor())),
                                  abs=1e-12)
    before = dict(state)
    state.push((5, 5))
    state.pop((5, 5))
    assert dict(state) == before


def test_potential_validation_examples():
    assert Potential.free().cap == 64
    validate_potential(Potential("table", (0, 0, 1, 3, 7)), 4)
    validate_potential(Potential("table", (0, 0, 3, 4)), 3)
    with pytest.raises(NotSuperadditive) as info:
        validate_potential(Potential("table", (0, 0, 3, 4, 5)), 4)
    assert info.value.witness == (2, 2)
    with pytest.raises(NonzeroBase):
        Potential.from_table([0, 1, 2])


def test_potential_superadditivity_matches_pair_oracle():
    rng = np.random.default_rng(5)
    for _ in range(300):
        vals = [0.0, 0.0] + sorted(rng.integers(0, 10, size=5).tolist())
        ok = all(vals[a + b] >= vals[a] + vals[b] for a in range(1, 7) for b in range(1, 7) if a + b <= 6)
        try:
            validate_potential(Potential("table", tuple(vals)), 6)
            got = True
        except NotSuperadditive:
            got = False
        assert got == ok


def test_table_potential_caps_out():
    phi = Potential.from_table([0, 0, 1, 2])
    with pytest.raises(CapExceeded):
        phi(4)
    rho = JumpDistribution.uniform(StepSet.nearest_neighbor())
    with pytest.raises(CapExceeded):
        weight_sigma(Walk.from_compass("EWEWEWEW"), phi, rho)


def test_jump_distribution_checks():
    ss = StepSet.nearest_neighbor()
    rho = JumpDistribution.explicit(ss, [Fraction(1, 4)] * 4)
    assert rho.is_rational and rho.denominator == 4
    with pytest.raises(ModelError):
        JumpDistribution.explicit(ss, [0.4, 0.1, 0.25, 0.25])
    with pytest.raises(ModelError):
        JumpDistribution.explicit(ss, [0.5, 0.5, 0.0, 0.0])
