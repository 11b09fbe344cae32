"""Convergent-set bounds and trace-level convergence classification.

The bounds replay percolation on each graph of a periodic schedule under the
two extreme adversary activation behaviours. A follower activated at some
period offset is activated infinitely often, which is what the convergence
guarantee needs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np

from .engine import ConsensusTrace
from .errors import UnsupportedSchedule
from .graph_core import GraphSchedule, PeriodicSchedule, RoleAssignment, StaticSchedule
from .percolation import AlwaysOne, AlwaysZero, run_bp
from .protocols import ConstantSignal

DEFAULT_TOLERANCE = 1e-6


def _period_graphs(schedule: GraphSchedule):
    if isinstance(schedule, (PeriodicSchedule, StaticSchedule)):
        return schedule.graphs
    raise UnsupportedSchedule(
        "convergent-set bounds need a periodic schedule; a finite timeline cannot "
        "certify that a follower is active infinitely often")


def _activations(schedule, roles, F, strategy) -> list[frozenset[int]]:
    out = []
    for offset, g in enumerate(_period_graphs(schedule)):
        final = run_bp(g, roles, 2 * F + 1, strategy, offset).active()
        out.append(final & roles.normal_followers)
    return out


@dataclass(frozen=True)
class ConvergentSetBounds:
    lower: frozenset[int]
    upper: frozenset[int]
    per_period_activations: dict[int, dict[str, frozenset[int]]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "lower": sorted(self.lower),
            "upper": sorted(self.upper),
            "per_offset": {
                str(off): {k: sorted(v) for k, v in acts.items()}
                for off, acts in sorted(self.per_period_activations.items())
            },
        }


def convergent_set_lower(schedule: GraphSchedule, roles: RoleAssignment, F: int) -> frozenset[int]:
    """Followers guaranteed to converge whatever the adversaries report."""
    return frozenset().union(*_activations(schedule, roles, F, AlwaysZero()))


def convergent_set_upper(schedule: GraphSchedule, roles: RoleAssignment, F: int) -> frozenset[int]:
    """Followers that can converge at all; adversaries reporting 1 act as leaders."""
    return frozenset().union(*_activations(schedule, roles, F, AlwaysOne()))


def convergent_set_bounds(schedule: GraphSchedule, roles: RoleAssignment, F: int) -> ConvergentSetBounds:
    low = _activations(schedule, roles, F, AlwaysZero())
    high = _activations(schedule, roles, F, AlwaysOne())
    detail = {off: {"always_zero": lo, "always_one": hi}
              for off, (lo, hi) in enumerate(zip(low, high))}
    return ConvergentSetBounds(frozenset().union(*low), frozenset().union(*high), detail)


@dataclass(frozen=True)
class ConvergenceReport:
    converged: frozenset[int]
    residuals: dict[int, float]
    tolerance: float
    horizon: int

    def to_dict(self) -> dict:
        return {
            "converged": sorted(self.converged),
            "residuals": {str(i): r for i, r in sorted(self.residuals.items())},
            "tolerance": self.tolerance,
            "horizon": self.horizon,
        }


def _constant_target(signal) -> float:
    if not isinstance(signal, ConstantSignal):
        raise ValueError("convergence is only classified against a constant reference")
    return signal.value


def classify_convergence(trace: ConsensusTrace, signal: ConstantSignal,
                         tolerance: float = DEFAULT_TOLERANCE,
                         roles: Optional[RoleAssignment] = None) -> ConvergenceReport:
    target = _constant_target(signal)
    roles = roles or trace.roles
    T = trace.horizon
    residuals = {i: float(abs(trace.x[i, T] - target)) for i in sorted(roles.normal_followers)}
    converged = frozenset(i for i, res in residuals.items() if res < tolerance)
    return ConvergenceReport(converged, residuals, tolerance, T)


def tracking_error(trace: ConsensusTrace, nodes: Iterable[int], target: float) -> np.ndarray:
    """``D[t] = max_i |x_i[t] - target|`` over ``nodes`` for every step."""
    idx = sorted(nodes)
    return np.abs(trace.x[idx, :] - target).max(axis=0)


def contraction_check(trace: ConsensusTrace, roles: RoleAssignment,
                      convergent_predicted: Iterable[int], t_start: int,
                      signal: Optional[ConstantSignal] = None,
                      tolerance: float = DEFAULT_TOLERANCE, slack: float = 1e-12) -> bool:
    """Tracking error over normal leaders plus the predicted set never grows
    after ``t_start`` and ends below ``tolerance``."""
    if signal is None:
        signal = trace.scenario.signal if trace.scenario is not None else None
    target = _constant_target(signal)
    d = tracking_error(trace, roles.normal_leaders | frozenset(convergent_predicted), target)
    tail = d[t_start:]
    if tail.size == 0:
        return False
    if np.any(np.diff(tail) > slack):
        return False
    return bool(tail[-1] < tolerance)
