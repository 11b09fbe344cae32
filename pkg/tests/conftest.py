import sys
import random

import hypothesis
import pytest
from hypothesis import strategies as st

from bpmsr.graph_core import Digraph

hypothesis.settings.register_profile("ci", max_examples=60, deadline=None)
hypothesis.settings.register_profile("thorough", max_examples=500, deadline=None)
hypothesis.settings.load_profile("ci")


def random_digraph(rng: random.Random, n: int, density: float) -> Digraph:
    edges = [(u, v) for u in range(n) for v in range(n) if u != v and rng.random() < density]
    return Digraph(n, frozenset(edges))


@st.composite
def digraphs(draw, min_n=1, max_n=8):
    n = draw(st.integers(min_n, max_n))
    pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    chosen = draw(st.lists(st.sampled_from(pairs), unique=True) if pairs else st.just([]))
    return Digraph(n, frozenset(chosen))


@st.composite
def graph_and_set(draw, max_n=7, min_set=1):
    g = draw(digraphs(min_n=max(2, min_set), max_n=max_n))
    s = draw(st.sets(st.integers(0, g.n - 1), min_size=min_set, max_size=g.n))
    return g, frozenset(s)


@pytest.fixture
def rng():
    return random.Random(12345)


def random_scenario(rng: random.Random, max_n: int = 12, horizon: int = 80):
    """Random F-local BP-MSR scenario with a constant (possibly late) reference."""
    from bpmsr.engine import Scenario, UniformInit
    from bpmsr.graph_core import PeriodicSchedule, RoleAssignment
    from bpmsr.percolation import AlwaysOne, AlwaysZero, RandomMonotone
    from bpmsr.protocols import (ConstantOutlier, ConstantSignal, PiecewiseRandomSignal,
                                 SelfBiased, Sinusoid, Split, Uniform)

    n = rng.randint(5, max_n)
    F = rng.choice([1, 2])
    n_lead = rng.randint(1, max(1, n // 2 - 1))
    perm = list(range(n))
    rng.shuffle(perm)
    leaders = set(perm[:n_lead])
    n_adv = rng.randint(0, min(F + 1, n - n_lead - 1))
    adv = set(rng.sample(sorted(perm[n_lead:]), n_adv))
    if rng.random() < 0.3 and n_lead > 1:
        adv.add(next(iter(leaders)))       # adversarial leader
    graphs = []
    for _ in range(rng.randint(1, 3)):
        g = random_digraph(rng, n, rng.choice([0.4, 0.6, 0.9]))
        # enforce F-locality: drop surplus adversarial in-edges
        edges = set(g.edges)
        for v in range(n):
            bad = sorted(u for u in adv if (u, v) in edges)
            rng.shuffle(bad)
            for u in bad[F:]:
                edges.discard((u, v))
        graphs.append(Digraph(n, frozenset(edges)))
    value = rng.choice([Sinusoid(), ConstantOutlier(rng.choice([1e6, -1e6])), Split(5e3)])
    act = rng.choice([AlwaysZero(), AlwaysOne(), RandomMonotone(seed=rng.randrange(10**6),
                                                                horizon_k=rng.randint(1, 8))])
    c = rng.uniform(-500, 500)
    if rng.random() < 0.5:
        signal = ConstantSignal(c)
    else:
        signal = ConstantSignal(c, from_time=rng.randint(1, 20),
                                prior=PiecewiseRandomSignal(5, -1000.0, 1000.0))
    rule = rng.choice([Uniform(), SelfBiased(rng.uniform(0.1, 0.9))])
    return Scenario(PeriodicSchedule(tuple(graphs)),
                    RoleAssignment.from_leaders(n, leaders, adv), F, signal,
                    value_strategy=value, activation_strategy=act, weight_rule=rule,
                    initial_states=UniformInit(-1000.0, 1000.0), horizon=horizon,
                    seed=rng.randrange(10**6), name="random")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda l: int(l.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
