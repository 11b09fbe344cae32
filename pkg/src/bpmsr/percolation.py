"""Per-timestep bootstrap percolation as executed by the agents.

Normal agents follow the activation rule exactly. Adversaries do not
report their own state; instead an :class:`ActivationStrategy` decides, per
receiver and iteration, which bit each adversary claims. Reports must stay
binary and never switch from 1 back to 0 within a timestep: anything else
would be detectable and raises :class:`~bpmsr.errors.ProtocolViolation`.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Protocol

import numpy as np

from .errors import ProtocolViolation
from .graph_core import Digraph, RoleAssignment


class ActivationStrategy(Protocol):
    def report(self, a: int, u: int, t: int, k: int) -> int:
        """Bit adversary ``a`` sends receiver ``u`` at timestep ``t``, iteration ``k``."""


@dataclass(frozen=True)
class AlwaysZero:
    kind = "always_zero"

    def report(self, a, u, t, k):
        return 0


@dataclass(frozen=True)
class AlwaysOne:
    kind = "always_one"

    def report(self, a, u, t, k):
        return 1


@dataclass(frozen=True)
class RandomMonotone:
    """Each (adversary, receiver, timestep) switches on at a random iteration.

    The switch iteration is uniform on ``0..horizon_k``; values at or beyond
    the last BP iteration mean the report stays 0 for that timestep.
    ``seed=None`` is resolved by the engine from the scenario seed.
    """

    seed: Optional[int] = None
    horizon_k: int = 16
    kind = "random_monotone"

    def switch_at(self, a: int, u: int, t: int) -> int:
        return _switch_at(self.seed or 0, self.horizon_k, a, u, t)

    def report(self, a, u, t, k):
        return int(k >= self.switch_at(a, u, t))


@lru_cache(maxsize=1 << 16)
def _switch_at(seed, horizon_k, a, u, t):
    rng = np.random.default_rng([seed, a, u, t])
    return int(rng.integers(0, horizon_k + 1))


ACTIVATION_STRATEGIES = {
    "always_zero": AlwaysZero,
    "always_one": AlwaysOne,
    "random_monotone": RandomMonotone,
}


@dataclass(frozen=True)
class ActivationRecord:
    """``q[i, k]`` for every node and iteration ``k = 0..f``."""

    q: np.ndarray
    f: int

    @property
    def final(self) -> np.ndarray:
        return self.q[:, self.f]

    def active(self) -> frozenset[int]:
        return frozenset(int(i) for i in np.flatnonzero(self.final))


@dataclass(frozen=True)
class StrategyCheck:
    ok: bool
    offender: Optional[tuple[int, int, int]] = None  # (adversary, receiver, iteration)
    reason: str = ""

    def __bool__(self):
        return self.ok


def _check_bit(value, a, u, t, k):
    if isinstance(value, (bool, np.bool_)):
        return int(value)
    if isinstance(value, (int, np.integer)) and value in (0, 1):
        return int(value)
    raise ProtocolViolation(
        f"adversary {a} sent non-binary activation {value!r} to {u} at t={t}, k={k}",
        adversary=a, receiver=u, t=t, k=k)


def validate_strategy(strategy: ActivationStrategy, g: Digraph, roles: RoleAssignment,
                      t: int, f: Optional[int] = None) -> StrategyCheck:
    """Check binary, monotone reports for every adversary out-edge at ``t``."""
    if f is None:
        f = len(roles.followers)
    for a in sorted(roles.adversaries):
        for u in sorted(_bits(g.out_masks[a])):
            prev = 0
            for k in range(f + 1):
                try:
                    bit = _check_bit(strategy.report(a, u, t, k), a, u, t, k)
                except ProtocolViolation as exc:
                    return StrategyCheck(False, (a, u, k), str(exc))
                if bit < prev:
                    return StrategyCheck(False, (a, u, k), "report switched from 1 to 0")
                prev = bit
    return StrategyCheck(True)


def _bits(mask):
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


def run_bp(g: Digraph, roles: RoleAssignment, r: int, strategy: ActivationStrategy,
           t: int) -> ActivationRecord:
    """Run ``f = |followers|`` synchronous iterations of the activation rule.

    Normal nodes consume their in-neighbours' true bits from the previous
    iteration, except adversarial in-neighbours, whose bits come from the
    strategy (queried per receiver). Adversary rows keep their role-based
    initial value and are bookkeeping only.
    """
    if r < 1:
        raise ValueError("threshold r must be at least 1")
    n = g.n
    f = len(roles.followers)
    q = np.zeros((n, f + 1), dtype=np.uint8)
    for i in roles.leaders:
        q[i, 0] = 1

    adv = roles.adversaries
    normal_followers = sorted(roles.normal_followers)
    in_lists = g.in_lists
    last_report: dict[tuple[int, int], int] = {}

    for k in range(1, f + 1):
        prev = q[:, k - 1]
        q[:, k] = prev
        for i in normal_followers:
            if prev[i]:
                continue
            count = 0
            for j in in_lists[i]:
                if j in adv:
                    bit = _check_bit(strategy.report(j, i, t, k - 1), j, i, t, k - 1)
                    if bit < last_report.get((j, i), 0):
                        raise ProtocolViolation(
                            f"adversary {j} switched its activation report to {i} "
                            f"from 1 to 0 at t={t}, k={k - 1}",
                            adversary=j, receiver=i, t=t, k=k - 1)
                    last_report[(j, i)] = bit
                    count += bit
                else:
                    count += prev[j]
            if count >= r:
                q[i, k] = 1
    return ActivationRecord(q, f)
