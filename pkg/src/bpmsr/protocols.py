"""Consensus-layer behaviours: MSR filtering, follower/leader steps, signals.

All step functions are pure. A follower's inbox is a list of
``(sender, value)`` pairs holding only values it actually received.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Optional, Protocol, Sequence, Union

import numpy as np

from .errors import NonFiniteValueError, ProtocolViolation

Message = tuple[int, float]


# --- MSR filter ------------------------------------------------------------


@dataclass(frozen=True)
class FilterOutcome:
    """Result of MSR filtering. ``retained[0]`` is always the agent's own value."""

    retained: tuple[tuple[Optional[int], float], ...]
    discarded_high: tuple[Message, ...] = ()
    discarded_low: tuple[Message, ...] = ()

    @property
    def retained_values(self) -> list[float]:
        return [v for _, v in self.retained]


def msr_filter(own: float, received: Sequence[Message], F: int,
               self_id: Optional[int] = None) -> FilterOutcome:
    """Drop up to ``F`` values strictly above ``own`` (largest first) and up to
    ``F`` strictly below (smallest first). Values equal to ``own`` are kept.

    Ties are broken by ascending sender id. Retained messages keep their
    input order, after the own value.
    """
    if F < 0:
        raise ValueError("F must be non-negative")
    if not math.isfinite(own):
        raise NonFiniteValueError(self_id, own)
    for sender, value in received:
        if not math.isfinite(value):
            raise NonFiniteValueError(sender, value)

    received = [(s, float(v)) for s, v in received]
    idx = range(len(received))
    high = sorted((p for p in idx if received[p][1] > own),
                  key=lambda p: (-received[p][1], received[p][0]))[:F]
    low = sorted((p for p in idx if received[p][1] < own),
                 key=lambda p: (received[p][1], received[p][0]))[:F]
    dropped = set(high) | set(low)
    kept = tuple(received[p] for p in idx if p not in dropped)
    return FilterOutcome(((self_id, float(own)),) + kept,
                         tuple(received[p] for p in high),
                         tuple(received[p] for p in low))


# --- weights ---------------------------------------------------------------


@dataclass(frozen=True)
class Uniform:
    kind = "uniform"

    def weights(self, count: int) -> list[float]:
        return [1.0 / count] * count

    def alpha(self, n: int) -> float:
        return 1.0 / n


@dataclass(frozen=True)
class SelfBiased:
    """Own value gets ``self_weight``; the rest share the remainder evenly."""

    self_weight: float = 0.5
    kind = "self_biased"

    def __post_init__(self):
        if not 0.0 < self.self_weight < 1.0:
            raise ValueError("self_weight must lie in (0, 1)")

    def weights(self, count: int) -> list[float]:
        if count == 1:
            return [1.0]
        other = (1.0 - self.self_weight) / (count - 1)
        return [self.self_weight] + [other] * (count - 1)

    def alpha(self, n: int) -> float:
        if n <= 1:
            return 1.0
        return min(self.self_weight, (1.0 - self.self_weight) / (n - 1))


WeightRule = Union[Uniform, SelfBiased]
WEIGHT_RULES = {"uniform": Uniform, "self_biased": SelfBiased}


def wmsr_update(outcome: FilterOutcome, rule: WeightRule = Uniform()) -> float:
    values = outcome.retained_values
    w = rule.weights(len(values))
    mixed = math.fsum(wi * v for wi, v in zip(w, values))
    # rounding must not leak outside the convex hull
    return min(max(mixed, min(values)), max(values))


# --- follower steps --------------------------------------------------------


def bpmsr_follower_step(i: int, q_final: int, own: float, inbox: Sequence[Message],
                        F: int, rule: WeightRule = Uniform()) -> tuple[float, bool]:
    """Active followers transmit and MSR-update; inactive ones hold silently."""
    if not q_final:
        return own, False
    return wmsr_update(msr_filter(own, inbox, F, self_id=i), rule), True


def wmsr_baseline_step(i: int, own: float, inbox: Sequence[Message], F: int,
                       rule: WeightRule = Uniform()) -> tuple[float, bool]:
    return bpmsr_follower_step(i, 1, own, inbox, F, rule)


@dataclass(frozen=True)
class Window:
    """Most recent ``(time, value)`` per sender seen by an SW-MSR follower."""

    latest: tuple[tuple[int, int, float], ...] = ()  # (sender, time, value)

    def as_dict(self) -> dict[int, tuple[int, float]]:
        return {s: (t, v) for s, t, v in self.latest}


def update_window(window: Window, inbox: Sequence[Message], t: int, T: int) -> Window:
    latest = window.as_dict()
    for sender, value in inbox:
        latest[sender] = (t, value)
    kept = tuple((s, ts, v) for s, (ts, v) in sorted(latest.items()) if ts > t - T)
    return Window(kept)


def swmsr_baseline_step(i: int, own: float, window: Window, inbox: Sequence[Message],
                        T: int, F: int, rule: WeightRule = Uniform(),
                        t: int = 0) -> tuple[float, Window]:
    """MSR update over the freshest value of every sender heard in the last ``T`` steps."""
    if T < 1:
        raise ValueError("window length T must be at least 1")
    window = update_window(window, inbox, t, T)
    windowed = [(s, v) for s, _, v in window.latest]
    return wmsr_update(msr_filter(own, windowed, F, self_id=i), rule), window


# --- leaders and reference signals ----------------------------------------


@dataclass(frozen=True)
class PiecewiseRandomSignal:
    """Uniform draw on ``[low, high]``, redrawn every ``interval`` steps."""

    interval: int = 50
    low: float = -1000.0
    high: float = 1000.0
    seed: Optional[int] = None
    kind = "piecewise_random"

    def __call__(self, t: int) -> float:
        return _block_value(self.seed or 0, t // self.interval, self.low, self.high)


@lru_cache(maxsize=4096)
def _block_value(seed, block, low, high):
    return float(np.random.default_rng([seed, block]).uniform(low, high))


@dataclass(frozen=True)
class TableSignal:
    """Step function through ``(t, value)`` points; the last value holds."""

    points: tuple[tuple[int, float], ...]
    kind = "table"

    def __post_init__(self):
        pts = tuple((int(t), float(v)) for t, v in self.points)
        if not pts or pts[0][0] != 0:
            raise ValueError("table signal must define t=0")
        if any(b[0] <= a[0] for a, b in zip(pts, pts[1:])):
            raise ValueError("table signal times must be strictly increasing")
        object.__setattr__(self, "points", pts)

    def __call__(self, t: int) -> float:
        value = self.points[0][1]
        for start, v in self.points:
            if start > t:
                break
            value = v
        return value


@dataclass(frozen=True)
class ConstantSignal:
    """Constant ``value`` from ``from_time`` on; ``prior`` drives earlier steps."""

    value: float
    from_time: int = 0
    prior: Optional[Union[PiecewiseRandomSignal, TableSignal]] = None
    kind = "constant"

    def __call__(self, t: int) -> float:
        if t >= self.from_time or self.prior is None:
            return self.value
        return self.prior(t)

    @property
    def settle_time(self) -> int:
        """First step at which leader states equal the constant."""
        return self.from_time + 1 if self.from_time > 0 and self.prior is not None else 0


ReferenceSignal = Union[ConstantSignal, PiecewiseRandomSignal, TableSignal]
SIGNALS = {"constant": ConstantSignal, "piecewise_random": PiecewiseRandomSignal,
           "table": TableSignal}


def leader_step(t: int, signal: ReferenceSignal) -> float:
    return float(signal(t))


# --- adversary values ------------------------------------------------------


class ValueStrategy(Protocol):
    def emit(self, a: int, u: int, t: int) -> float: ...


@dataclass(frozen=True)
class Sinusoid:
    """``amplitude * sin((t + u) / divisor)``, different for every receiver."""

    amplitude: float = 1000.0
    divisor: float = 5.0
    kind = "sinusoid"

    def emit(self, a, u, t):
        return self.amplitude * math.sin((t + u) / self.divisor)


@dataclass(frozen=True)
class ConstantOutlier:
    value: float = 1e6
    kind = "constant"

    def emit(self, a, u, t):
        return self.value


@dataclass(frozen=True)
class Split:
    """``+bound`` to even receivers, ``-bound`` to odd ones."""

    bound: float = 1e3
    kind = "split"

    def emit(self, a, u, t):
        return self.bound if u % 2 == 0 else -self.bound


VALUE_STRATEGIES = {"sinusoid": Sinusoid, "constant": ConstantOutlier, "split": Split}


def adversary_value(a: int, u: int, t: int, strategy: ValueStrategy) -> float:
    value = strategy.emit(a, u, t)
    if not math.isfinite(value):
        raise ProtocolViolation(
            f"adversary {a} emitted non-finite value {value!r} to {u} at t={t}",
            adversary=a, receiver=u, t=t)
    return float(value)
