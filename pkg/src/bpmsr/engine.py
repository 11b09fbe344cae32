"""Synchronous round-based simulation of leader-follower consensus.

Each timestep runs the full percolation phase on the graph in force, then a
single consensus round computed from the frozen snapshot of the previous
states. Every random quantity in a scenario is drawn from a named substream
of the scenario seed, so protocol comparisons share the same randomness.
"""

from __future__ import annotations

import re
import warnings
import zlib
from dataclasses import dataclass, field, replace
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .errors import SafetyViolation, ScenarioError
from .graph_core import GraphSchedule, RoleAssignment, is_f_local
from .percolation import ActivationStrategy, AlwaysZero, RandomMonotone, run_bp
from .protocols import (ConstantSignal, PiecewiseRandomSignal, ReferenceSignal, Sinusoid,
                        Uniform, ValueStrategy, WeightRule, Window, adversary_value,
                        bpmsr_follower_step, leader_step, swmsr_baseline_step,
                        wmsr_baseline_step)

PROTOCOLS = ("BP-MSR", "W-MSR", "SW-MSR")
_SW_PATTERN = re.compile(r"^SW-MSR(?:\((\d+)\))?$")


def substream(seed: int, name: str) -> np.random.Generator:
    """Independent generator for one named random quantity of a scenario."""
    return np.random.default_rng([seed, zlib.crc32(name.encode())])


def parse_protocol(name: str, default_window: int = 2) -> tuple[str, int]:
    """``"SW-MSR(3)"`` -> ``("SW-MSR", 3)``; other names pass through."""
    name = name.strip()
    m = _SW_PATTERN.match(name)
    if m:
        return "SW-MSR", int(m.group(1)) if m.group(1) else default_window
    if name not in PROTOCOLS:
        raise ScenarioError(f"unknown protocol {name!r}; expected one of {PROTOCOLS}")
    return name, default_window


@dataclass(frozen=True)
class UniformInit:
    low: float = -1000.0
    high: float = 1000.0
    kind = "uniform"


@dataclass(frozen=True)
class ExplicitInit:
    values: tuple[tuple[int, float], ...]
    kind = "explicit"

    def __post_init__(self):
        items = self.values.items() if isinstance(self.values, Mapping) else self.values
        object.__setattr__(self, "values", tuple(sorted((int(i), float(v)) for i, v in items)))


InitialStates = Union[UniformInit, ExplicitInit]


@dataclass(frozen=True)
class Scenario:
    schedule: GraphSchedule
    roles: RoleAssignment
    F: int
    signal: ReferenceSignal
    value_strategy: ValueStrategy = Sinusoid()
    activation_strategy: ActivationStrategy = AlwaysZero()
    weight_rule: WeightRule = Uniform()
    initial_states: InitialStates = UniformInit()
    horizon: int = 600
    protocol: str = "BP-MSR"
    window: int = 2
    seed: int = 0
    name: str = "scenario"

    @property
    def r(self) -> int:
        return 2 * self.F + 1

    @property
    def n(self) -> int:
        return self.roles.n

    def validate(self) -> list[str]:
        """Raise on broken invariants; return warnings for unmet theory hypotheses."""
        if self.schedule.n != self.roles.n:
            raise ScenarioError(
                f"schedule has {self.schedule.n} nodes but roles cover {self.roles.n}")
        if self.F < 0:
            raise ScenarioError("F must be non-negative")
        if self.horizon < 1:
            raise ScenarioError("horizon must be at least 1")
        if self.protocol not in PROTOCOLS:
            raise ScenarioError(f"unknown protocol {self.protocol!r}")
        if self.protocol == "SW-MSR" and self.window < 1:
            raise ScenarioError("SW-MSR window must be at least 1")
        if isinstance(self.initial_states, ExplicitInit):
            given = dict(self.initial_states.values)
            missing = sorted(self.roles.normal_followers - set(given))
            if missing:
                raise ScenarioError(f"no initial state for followers {missing}")
            extra = sorted(set(given) - self.roles.followers)
            if extra:
                raise ScenarioError(f"initial states given for non-followers {extra}")
            if not all(np.isfinite(v) for v in given.values()):
                raise ScenarioError("initial states must be finite")
        notes = []
        if not is_f_local(self.schedule, self.roles.adversaries, self.F, self.horizon):
            notes.append(f"adversary set is not {self.F}-local over the schedule")
        return notes

    def resolved(self) -> "Scenario":
        """Copy with every unset seed drawn from its named substream."""
        s = self
        act = s.activation_strategy
        if isinstance(act, RandomMonotone) and act.seed is None:
            s = replace(s, activation_strategy=replace(act, seed=_draw_seed(s.seed, "activation")))
        sig = s.signal
        if isinstance(sig, PiecewiseRandomSignal) and sig.seed is None:
            s = replace(s, signal=replace(sig, seed=_draw_seed(s.seed, "signal")))
        elif isinstance(sig, ConstantSignal) and isinstance(sig.prior, PiecewiseRandomSignal) \
                and sig.prior.seed is None:
            prior = replace(sig.prior, seed=_draw_seed(s.seed, "signal"))
            s = replace(s, signal=replace(sig, prior=prior))
        return s

    def initial_vector(self) -> np.ndarray:
        x = np.zeros(self.n)
        followers = sorted(self.roles.followers)
        if isinstance(self.initial_states, UniformInit):
            rng = substream(self.seed, "initial")
            draws = rng.uniform(self.initial_states.low, self.initial_states.high, len(followers))
            x[followers] = draws
        else:
            for i, v in self.initial_states.values:
                x[i] = v
        return x


def _draw_seed(seed: int, name: str) -> int:
    return int(substream(seed, name).integers(0, 2**31 - 1))


@dataclass
class ConsensusTrace:
    """States, final activations and transmission flags for ``t = 0..horizon``."""

    x: np.ndarray
    q_final: np.ndarray
    transmitted: np.ndarray
    roles: RoleAssignment
    protocol: str
    scenario: Optional[Scenario] = field(default=None, repr=False)

    @property
    def horizon(self) -> int:
        return self.x.shape[1] - 1

    def normal_hull(self, t: int) -> tuple[float, float]:
        idx = sorted(self.roles.normal)
        return float(self.x[idx, t].min()), float(self.x[idx, t].max())


def _transmit_vector(s: Scenario, q: np.ndarray) -> np.ndarray:
    tx = np.ones(s.n, dtype=np.uint8)
    if s.protocol == "BP-MSR":
        for i in s.roles.normal_followers:
            tx[i] = q[i]
    return tx


def run_simulation(s: Scenario, check_safety: bool = False, slack: float = 1e-12) -> ConsensusTrace:
    """Simulate ``s.horizon`` rounds.

    With ``check_safety`` (constant reference only) every normal state is
    asserted to stay inside the normal hull at the settle time, raising
    :class:`SafetyViolation` on the first breach.
    """
    notes = s.validate()
    for note in notes:
        warnings.warn(note, stacklevel=2)
    s = s.resolved()
    roles, n, T = s.roles, s.n, s.horizon
    adversaries = roles.adversaries
    normal_leaders = sorted(roles.normal_leaders)
    normal_followers = sorted(roles.normal_followers)
    normal = sorted(roles.normal)

    x = np.zeros((n, T + 1))
    q_final = np.zeros((n, T + 1), dtype=np.uint8)
    transmitted = np.zeros((n, T + 1), dtype=np.uint8)

    x[:, 0] = s.initial_vector()
    for i in normal_leaders:
        x[i, 0] = leader_step(0, s.signal)
    for a in adversaries:
        x[a, 0] = adversary_value(a, a, 0, s.value_strategy)

    settle = None
    if check_safety:
        if not isinstance(s.signal, ConstantSignal):
            raise ScenarioError("safety checking needs a constant reference signal")
        settle = s.signal.settle_time
    windows = {i: Window() for i in normal_followers}
    lo = hi = None

    for t in range(T + 1):
        g = s.schedule.graph_at(t)
        q = run_bp(g, roles, s.r, s.activation_strategy, t).final
        tx = _transmit_vector(s, q)
        q_final[:, t] = q
        transmitted[:, t] = tx
        if settle is not None and t == settle:
            lo, hi = float(x[normal, t].min()), float(x[normal, t].max())
        if t == T:
            break

        for i in normal_leaders:
            x[i, t + 1] = leader_step(t, s.signal)
        for a in adversaries:
            x[a, t + 1] = adversary_value(a, a, t + 1, s.value_strategy)
        in_lists = g.in_lists
        for i in normal_followers:
            inbox = []
            for j in in_lists[i]:
                if not tx[j]:
                    continue
                if j in adversaries:
                    inbox.append((j, adversary_value(j, i, t, s.value_strategy)))
                else:
                    inbox.append((j, float(x[j, t])))
            own = float(x[i, t])
            if s.protocol == "BP-MSR":
                x[i, t + 1], _ = bpmsr_follower_step(i, int(q[i]), own, inbox, s.F, s.weight_rule)
            elif s.protocol == "W-MSR":
                x[i, t + 1], _ = wmsr_baseline_step(i, own, inbox, s.F, s.weight_rule)
            else:
                x[i, t + 1], windows[i] = swmsr_baseline_step(
                    i, own, windows[i], inbox, s.window, s.F, s.weight_rule, t)

        if lo is not None:
            row = x[normal_followers, t + 1]
            bad = np.flatnonzero((row < lo - slack) | (row > hi + slack))
            if bad.size:
                node = normal_followers[int(bad[0])]
                raise SafetyViolation(
                    f"follower {node} left [{lo}, {hi}] at t={t + 1}: {x[node, t + 1]}",
                    node=node, t=t + 1)

    return ConsensusTrace(x, q_final, transmitted, roles, s.protocol, s)


def run_comparison(s: Scenario, protocols: Sequence[str]) -> dict[str, ConsensusTrace]:
    """Run the same scenario under several protocols; only the protocol differs."""
    if not protocols:
        raise ValueError("need at least one protocol")
    out = {}
    for name in protocols:
        proto, window = parse_protocol(name, s.window)
        out[name] = run_simulation(replace(s, protocol=proto, window=window))
    return out
