"""Constructed benchmark scenarios.

Ten nodes: adversary ``0``, leaders ``1, 2, 3``, followers ``4..9``, ``F = 1``.
Three graphs are built so that, with threshold 3,

* only normal agents : G1 activates {6, 7}, G2 {8}, G3 {6};
* adversary as leader: G1 activates {6, 7}, G2 {8}, G3 {4, 5, 6};
* every graph is strongly 1-robust but not strongly 2-robust w.r.t. the leaders.

Follower 9 only ever hears the adversary, so it is stuck under every
protocol; under the ungated baselines it keeps feeding its stale value to
the followers that could otherwise converge.

Each graph carries its expected facts in :data:`GRAPH_FACTS`;
:func:`validate_gallery` re-derives all of them with the exact oracle.
"""

from __future__ import annotations

from dataclasses import replace

from .engine import Scenario, UniformInit
from .graph_core import (Digraph, GraphSchedule, PeriodicSchedule, RoleAssignment,
                         induced_subgraph, is_f_local)
from .percolation import AlwaysZero, RandomMonotone
from .protocols import ConstantSignal, PiecewiseRandomSignal, Sinusoid
from .robustness import is_strongly_r_robust_bruteforce, robust_follower_set

N = 10
ADVERSARY = 0
LEADERS = frozenset({1, 2, 3})
F = 1
REFERENCE = 250.0


def _graph(in_edges: dict[int, tuple[int, ...]]) -> Digraph:
    return Digraph.from_edges(N, [(j, i) for i, srcs in in_edges.items() for j in srcs])


G1 = _graph({0: (1,), 4: (0, 1), 5: (0, 3, 9), 6: (0, 1, 2, 3), 7: (1, 2, 6),
             8: (0, 7), 9: (0,)})
G2 = _graph({0: (1,), 4: (0, 8), 5: (0, 2), 6: (0, 8, 9), 7: (0, 4, 9),
             8: (1, 2, 3), 9: (0,)})
G3 = _graph({0: (1,), 4: (0, 1, 2), 5: (0, 3, 6), 6: (1, 2, 3), 7: (1, 4),
             8: (0, 5), 9: (0,)})

GRAPHS = {"G1": G1, "G2": G2, "G3": G3}

# per graph: followers in robust subgraphs w.r.t. normal leaders (normal
# agents only) and w.r.t. leaders plus adversary
GRAPH_FACTS = {
    "G1": {"lower": frozenset({6, 7}), "upper": frozenset({6, 7})},
    "G2": {"lower": frozenset({8}), "upper": frozenset({8})},
    "G3": {"lower": frozenset({6}), "upper": frozenset({4, 5, 6})},
}

ALTERNATING_BOUNDS = (frozenset({6, 7, 8}), frozenset({6, 7, 8}))
THREE_PERIODIC_BOUNDS = (frozenset({6, 7, 8}), frozenset({4, 5, 6, 7, 8}))


def roles() -> RoleAssignment:
    return RoleAssignment.from_leaders(N, LEADERS, {ADVERSARY})


def alternating_scenario(protocol: str = "BP-MSR", **kw) -> Scenario:
    """G1, G2, G1, G2, ... under a sinusoidal adversary and constant reference."""
    base = Scenario(
        schedule=PeriodicSchedule((G1, G2)), roles=roles(), F=F,
        signal=ConstantSignal(REFERENCE), value_strategy=Sinusoid(1000.0, 5.0),
        activation_strategy=AlwaysZero(), initial_states=UniformInit(-1000.0, 1000.0),
        horizon=600, protocol=protocol, window=2, seed=2024, name="alternating")
    return replace(base, **kw)


def three_periodic_scenario(activation=AlwaysZero(), **kw) -> Scenario:
    """G1, G2, G3 repeating; the adversary's activation reports are the knob."""
    base = Scenario(
        schedule=PeriodicSchedule((G1, G2, G3)), roles=roles(), F=F,
        signal=ConstantSignal(REFERENCE), value_strategy=Sinusoid(1000.0, 5.0),
        activation_strategy=activation, initial_states=UniformInit(-1000.0, 1000.0),
        horizon=900, protocol="BP-MSR", seed=2025, name="three_periodic")
    return replace(base, **kw)


def tracking_scenario(**kw) -> Scenario:
    """Alternating schedule with a reference redrawn every 50 steps, as in the plots."""
    base = alternating_scenario(
        signal=PiecewiseRandomSignal(50, -1000.0, 1000.0), horizon=300, name="tracking")
    return replace(base, **kw)


def full_consensus_scenario(protocol: str = "BP-MSR", **kw) -> Scenario:
    """Every normal follower is active at every step (two dense graphs)."""
    n = 8
    leaders = {1, 2, 3}
    complete = Digraph.complete(n)
    sparse = Digraph.from_edges(
        n, [(l, f) for l in leaders for f in range(4, n)]
        + [(0, f) for f in range(4, n)] + [(4, 5), (5, 6), (6, 7), (7, 4), (1, 0)])
    base = Scenario(
        schedule=PeriodicSchedule((complete, sparse)),
        roles=RoleAssignment.from_leaders(n, leaders, {0}), F=1,
        signal=ConstantSignal(-75.0), value_strategy=Sinusoid(1000.0, 5.0),
        activation_strategy=RandomMonotone(), initial_states=UniformInit(-1000.0, 1000.0),
        horizon=300, protocol=protocol, seed=7, name="full_consensus")
    return replace(base, **kw)


def full_consensus_schedule() -> GraphSchedule:
    return full_consensus_scenario().schedule


def validate_gallery() -> dict[str, dict]:
    """Recompute every stated graph fact; raises AssertionError on mismatch."""
    rl = roles()
    normal = rl.normal
    report = {}
    for name, g in GRAPHS.items():
        facts = GRAPH_FACTS[name]
        lower = robust_follower_set(induced_subgraph(g, normal), rl.normal_leaders, 2 * F + 1)
        upper = robust_follower_set(g, LEADERS | rl.adversaries, 2 * F + 1) - rl.adversaries
        assert lower == facts["lower"], (name, "lower", lower)
        assert upper == facts["upper"], (name, "upper", upper)
        # exact oracle: the activated parts are robust, one more follower breaks it
        low_sub = induced_subgraph(g, rl.normal_leaders | lower)
        assert is_strongly_r_robust_bruteforce(low_sub, rl.normal_leaders, 3).holds, name
        s_up = LEADERS | rl.adversaries
        up_sub = induced_subgraph(g, s_up | upper)
        assert is_strongly_r_robust_bruteforce(up_sub, s_up, 3).holds, name
        for extra in sorted(rl.normal_followers - upper):
            bigger = induced_subgraph(g, s_up | upper | {extra})
            assert not is_strongly_r_robust_bruteforce(bigger, s_up, 3).holds, (name, extra)
        whole_1 = is_strongly_r_robust_bruteforce(g, LEADERS, 1)
        whole_2 = is_strongly_r_robust_bruteforce(g, LEADERS, 2)
        assert whole_1.holds and not whole_2.holds, name
        assert is_f_local(PeriodicSchedule((g,)), rl.adversaries, F)
        report[name] = {"lower": sorted(lower), "upper": sorted(upper),
                        "strongly_1_robust": whole_1.holds,
                        "strongly_2_robust": whole_2.holds,
                        "not_2_reachable_witness": sorted(whole_2.witness)}
    return report
