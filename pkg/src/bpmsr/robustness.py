"""Graph-robustness predicates: r-reachability and strong r-robustness.

Two independent routes are provided. ``is_strongly_r_robust_bruteforce``
enumerates every candidate subset and is the ground truth on small graphs;
``is_strongly_r_robust_bp`` runs truthful bootstrap percolation and is
cheap at any size.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Optional

from .errors import InstanceTooLarge
from .graph_core import Digraph, mask_of, nodes_of

#: Largest ``|V \ S1|`` the exact oracle accepts (2**25 subsets).
ENUMERATION_GUARD = 25


@dataclass(frozen=True)
class RobustnessVerdict:
    holds: bool
    witness: Optional[frozenset[int]] = None

    def __post_init__(self):
        if self.holds != (self.witness is None):
            raise ValueError("witness must be present exactly when holds is False")

    def __bool__(self):
        return self.holds


def _reachable_mask(in_masks, s_mask: int, r: int) -> bool:
    rest = ~s_mask
    m = s_mask
    i = 0
    while m:
        if m & 1 and (in_masks[i] & rest).bit_count() >= r:
            return True
        m >>= 1
        i += 1
    return False


def is_r_reachable(g: Digraph, S: Iterable[int], r: int) -> bool:
    """Some node of ``S`` has at least ``r`` in-neighbours outside ``S``."""
    s_mask = mask_of(S)
    if not s_mask:
        raise ValueError("r-reachability is defined for nonempty sets only")
    if r < 1:
        raise ValueError("r must be at least 1")
    return _reachable_mask(g.in_masks, s_mask, r)


def is_strongly_r_robust_bruteforce(g: Digraph, S1: Iterable[int], r: int) -> RobustnessVerdict:
    """Exact check by enumerating every nonempty subset of ``V \\ S1``.

    Subsets are visited by increasing size and lexicographically within a
    size, so the returned witness is the first failing set in that order.
    """
    s1 = frozenset(S1)
    if not s1:
        raise ValueError("S1 must be nonempty")
    if r < 1:
        raise ValueError("r must be at least 1")
    rest = sorted(g.vertex_set - s1)
    if len(rest) > ENUMERATION_GUARD:
        raise InstanceTooLarge(
            f"instance too large for exact oracle: |V \\ S1| = {len(rest)} > {ENUMERATION_GUARD}")
    in_masks = g.in_masks
    bits = [1 << v for v in rest]
    for size in range(1, len(rest) + 1):
        for combo in combinations(range(len(rest)), size):
            s2 = 0
            for c in combo:
                s2 |= bits[c]
            if not _reachable_mask(in_masks, s2, r):
                return RobustnessVerdict(False, frozenset(rest[c] for c in combo))
    return RobustnessVerdict(True)


def percolate(g: Digraph, initial: Iterable[int], r: int, iterations: Optional[int] = None) -> frozenset[int]:
    """Truthful synchronous bootstrap percolation; returns the final active set.

    Defaults to ``|V \\ initial|`` rounds, which is enough to reach the
    fixpoint since every non-final round activates at least one node.
    """
    active = mask_of(initial) & g.vertex_mask
    if iterations is None:
        iterations = (g.vertex_mask & ~active).bit_count()
    in_masks = g.in_masks
    verts = sorted(g.vertex_set)
    for _ in range(iterations):
        new = active
        for i in verts:
            if not active >> i & 1 and (in_masks[i] & active).bit_count() >= r:
                new |= 1 << i
        if new == active:
            break
        active = new
    return nodes_of(active)


def robust_follower_set(g: Digraph, S: Iterable[int], r: int) -> frozenset[int]:
    """Nodes outside ``S`` that end active under truthful percolation from ``S``.

    When nonempty, the subgraph induced on ``S`` plus the result is strongly
    ``r``-robust with respect to ``S``.
    """
    s = frozenset(S)
    if not s:
        raise ValueError("initial set must be nonempty")
    if r < 1:
        raise ValueError("r must be at least 1")
    return percolate(g, s, r) - s


def is_strongly_r_robust_bp(g: Digraph, S1: Iterable[int], r: int) -> bool:
    """Fast strong-robustness test; only valid for ``r >= 2``."""
    s1 = frozenset(S1)
    if r < 2:
        raise ValueError("percolation-based robustness check requires r >= 2")
    return robust_follower_set(g, s1, r) == g.vertex_set - s1
