from dataclasses import dataclass

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bpmsr.errors import ProtocolViolation
from bpmsr.graph_core import Digraph, RoleAssignment
from bpmsr.percolation import (ACTIVATION_STRATEGIES, AlwaysOne, AlwaysZero, RandomMonotone,
                               run_bp, validate_strategy)
from bpmsr.robustness import robust_follower_set

from conftest import digraphs


@dataclass(frozen=True)
class Flicker:
    """Reports 1 at iteration 0, then 0."""
    kind = "flicker"

    def report(self, a, u, t, k):
        return 1 if k == 0 else 0


@dataclass(frozen=True)
class Half:
    kind = "half"

    def report(self, a, u, t, k):
        return 0.5


def test_two_hop_spread():
    g = Digraph.from_edges(5, [(0, 3), (1, 3), (2, 3), (3, 4), (1, 4), (2, 4)])
    roles = RoleAssignment.from_leaders(5, {0, 1, 2})
    rec = run_bp(g, roles, 3, AlwaysZero(), 0)
    assert rec.f == 2 and rec.q.shape == (5, 3)
    assert rec.q[3].tolist() == [0, 1, 1]
    assert rec.q[4].tolist() == [0, 0, 1]
    assert rec.active() == {0, 1, 2, 3, 4}


def test_silent_leaders_activate_nobody():
    g = Digraph.from_edges(4, [(2, 3)])
    rec = run_bp(g, RoleAssignment.from_leaders(4, {0, 1}), 1, AlwaysZero(), 0)
    assert not rec.final[2:].any()


def test_direct_leader_threshold():
    g = Digraph.from_edges(4, [(0, 3), (1, 3)])
    rec = run_bp(g, RoleAssignment.from_leaders(4, {0, 1}), 2, AlwaysZero(), 0)
    assert rec.q[3, 1:].tolist() == [1, 1]


def test_adversary_reports_count_only_for_its_receiver():
    # followers 3 and 4 each see leaders 1, 2 and adversary 0; r = 3
    g = Digraph.from_edges(5, [(1, 3), (2, 3), (0, 3), (1, 4), (2, 4), (0, 4)])
    roles = RoleAssignment.from_leaders(5, {1, 2}, {0})

    @dataclass(frozen=True)
    class OnlyTo3:
        def report(self, a, u, t, k):
            return int(u == 3)

    rec = run_bp(g, roles, 3, OnlyTo3(), 0)
    assert rec.final[3] == 1 and rec.final[4] == 0
    assert run_bp(g, roles, 3, AlwaysZero(), 0).final[3] == 0


def test_validate_strategy():
    g = Digraph.from_edges(3, [(0, 1), (0, 2)])
    roles = RoleAssignment.from_leaders(3, {1}, {0})
    assert validate_strategy(AlwaysZero(), g, roles, 0)
    assert validate_strategy(AlwaysOne(), g, roles, 0)
    assert validate_strategy(RandomMonotone(seed=1), g, roles, 3)
    bad = validate_strategy(Flicker(), g, roles, 0)
    assert not bad and bad.offender == (0, 1, 1)
    assert not validate_strategy(Half(), g, roles, 0)


@pytest.mark.parametrize("strategy", [Flicker(), Half()])
def test_run_bp_rejects_invalid_reports(strategy):
    # follower 4 needs several iterations, so the adversary is queried repeatedly
    g = Digraph.from_edges(5, [(0, 3), (0, 4), (1, 3), (3, 4)])
    roles = RoleAssignment.from_leaders(5, {1, 2}, {0})
    with pytest.raises(ProtocolViolation) as exc:
        run_bp(g, roles, 3, strategy, 7)
    assert exc.value.adversary == 0 and exc.value.t == 7


def test_random_monotone_is_deterministic_and_monotone():
    s = RandomMonotone(seed=11, horizon_k=5)
    for a, u, t in [(0, 3, 0), (0, 4, 9), (2, 1, 100)]:
        bits = [s.report(a, u, t, k) for k in range(8)]
        assert bits == sorted(bits)
        assert bits == [RandomMonotone(seed=11, horizon_k=5).report(a, u, t, k) for k in range(8)]


def test_registry_names():
    assert set(ACTIVATION_STRATEGIES) == {"always_zero", "always_one", "random_monotone"}
    for name, cls in ACTIVATION_STRATEGIES.items():
        assert cls().kind == name


@st.composite
def bp_instance(draw):
    g = draw(digraphs(min_n=3, max_n=8))
    leaders = draw(st.sets(st.integers(0, g.n - 1), min_size=1, max_size=g.n - 1))
    rest = sorted(set(range(g.n)) - leaders)
    adv = draw(st.sets(st.sampled_from(rest), max_size=len(rest) - 1))
    return g, RoleAssignment.from_leaders(g.n, leaders, adv)


@given(bp_instance(), st.integers(1, 4), st.integers(0, 10**6))
def test_sandwich(inst, r, seed):
    g, roles = inst
    lo = run_bp(g, roles, r, AlwaysZero(), 0).active()
    mid = run_bp(g, roles, r, RandomMonotone(seed=seed), 0).active()
    hi = run_bp(g, roles, r, AlwaysOne(), 0).active()
    assert lo <= mid <= hi


@given(bp_instance(), st.integers(1, 4))
def test_activation_never_drops(inst, r):
    g, roles = inst
    q = run_bp(g, roles, r, RandomMonotone(seed=3), 0).q
    assert np.all(np.diff(q.astype(int), axis=1) >= 0)


@given(bp_instance(), st.integers(1, 4))
def test_extremes_match_truthful_percolation(inst, r):
    g, roles = inst
    nf = roles.normal_followers
    hi = run_bp(g, roles, r, AlwaysOne(), 0).active() & nf
    assert hi == robust_follower_set(g, roles.leaders | roles.adversaries, r) & nf
    # adversaries silent: same as deleting them from the graph
    from bpmsr.graph_core import induced_subgraph
    lo = run_bp(g, roles, r, AlwaysZero(), 0).active() & nf
    sub = induced_subgraph(g, roles.normal)
    assert lo == robust_follower_set(sub, roles.normal_leaders, r) & nf
