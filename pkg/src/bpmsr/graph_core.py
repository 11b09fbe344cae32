"""Time-varying digraphs, role assignments and F-locality.

Node sets are exposed as ``frozenset[int]``. Internally every digraph keeps
per-node in/out neighbourhoods as integer bitmasks (Python ints, so any
``n`` works); the robustness oracle and the percolation loops operate on
those masks directly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Optional, Sequence, Union

from .errors import ScenarioError

NodeSet = frozenset


def mask_of(nodes: Iterable[int]) -> int:
    m = 0
    for v in nodes:
        m |= 1 << v
    return m


def nodes_of(mask: int) -> frozenset[int]:
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return frozenset(out)


@dataclass(frozen=True)
class Digraph:
    """Simple digraph on nodes ``0..n-1``; an edge ``(j, i)`` means i hears j."""

    n: int
    edges: frozenset[tuple[int, int]] = field(default_factory=frozenset)
    #: present vertices; ``None`` means all of ``0..n-1``. Induced subgraphs
    #: shrink this set but keep the global ids.
    vertices: Optional[frozenset[int]] = None

    def __post_init__(self):
        if self.n < 0:
            raise ScenarioError(f"node count must be non-negative, got {self.n}")
        if self.vertices is not None:
            verts = frozenset(int(v) for v in self.vertices)
            if any(not 0 <= v < self.n for v in verts):
                raise ScenarioError(f"vertex out of range for n={self.n}")
            object.__setattr__(self, "vertices", None if len(verts) == self.n else verts)
        edges = frozenset((int(u), int(v)) for u, v in self.edges)
        for u, v in edges:
            if u == v:
                raise ScenarioError(f"self-loop on node {u}")
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ScenarioError(f"edge ({u},{v}) out of range for n={self.n}")
            if self.vertices is not None and not (u in self.vertices and v in self.vertices):
                raise ScenarioError(f"edge ({u},{v}) touches a removed vertex")
        object.__setattr__(self, "edges", edges)

    @property
    def vertex_set(self) -> frozenset[int]:
        return frozenset(range(self.n)) if self.vertices is None else self.vertices

    @cached_property
    def vertex_mask(self) -> int:
        return (1 << self.n) - 1 if self.vertices is None else mask_of(self.vertices)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Digraph":
        edges = list(edges)
        if len(set(edges)) != len(edges):
            raise ScenarioError("duplicate edge in edge list")
        return cls(n, frozenset(edges))

    @classmethod
    def complete(cls, n: int) -> "Digraph":
        return cls(n, frozenset((u, v) for u in range(n) for v in range(n) if u != v))

    @cached_property
    def in_masks(self) -> tuple[int, ...]:
        masks = [0] * self.n
        for u, v in self.edges:
            masks[v] |= 1 << u
        return tuple(masks)

    @cached_property
    def out_masks(self) -> tuple[int, ...]:
        masks = [0] * self.n
        for u, v in self.edges:
            masks[u] |= 1 << v
        return tuple(masks)

    @cached_property
    def in_lists(self) -> tuple[tuple[int, ...], ...]:
        return tuple(tuple(sorted(nodes_of(m))) for m in self.in_masks)

    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    def __repr__(self):
        extra = "" if self.vertices is None else f", vertices={sorted(self.vertices)}"
        return f"Digraph(n={self.n}, edges={self.sorted_edges()}{extra})"


def in_neighbors(g: Digraph, i: int) -> frozenset[int]:
    return nodes_of(g.in_masks[i])


def out_neighbors(g: Digraph, i: int) -> frozenset[int]:
    return nodes_of(g.out_masks[i])


def induced_subgraph(g: Digraph, keep: Iterable[int]) -> Digraph:
    """Restrict to ``keep``; node ids are preserved (masking, not relabelling)."""
    keep = frozenset(keep)
    for v in keep:
        if v not in g.vertex_set:
            raise ScenarioError(f"node {v} is not a vertex of the graph")
    return Digraph(g.n, frozenset(e for e in g.edges if e[0] in keep and e[1] in keep), keep)


def union_graph(graphs: Sequence[Digraph]) -> Digraph:
    if not graphs:
        raise ScenarioError("cannot take the union of zero graphs")
    n = graphs[0].n
    if any(h.n != n for h in graphs):
        raise ScenarioError("graphs differ in node count")
    return Digraph(n, frozenset().union(*(h.edges for h in graphs)))


# --- schedules -------------------------------------------------------------


@dataclass(frozen=True)
class StaticSchedule:
    graph: Digraph

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def period(self) -> int:
        return 1

    @property
    def graphs(self) -> tuple[Digraph, ...]:
        return (self.graph,)

    def graph_at(self, t: int) -> Digraph:
        return self.graph


@dataclass(frozen=True)
class PeriodicSchedule:
    graphs: tuple[Digraph, ...]

    def __post_init__(self):
        graphs = tuple(self.graphs)
        if not graphs:
            raise ScenarioError("periodic schedule needs at least one graph")
        if any(g.n != graphs[0].n for g in graphs):
            raise ScenarioError("all graphs of a schedule must share the node count")
        object.__setattr__(self, "graphs", graphs)

    @property
    def n(self) -> int:
        return self.graphs[0].n

    @property
    def period(self) -> int:
        return len(self.graphs)

    def graph_at(self, t: int) -> Digraph:
        return self.graphs[t % len(self.graphs)]


@dataclass(frozen=True)
class TimelineSchedule:
    """Graph switches at the listed start times; the last graph holds forever."""

    entries: tuple[tuple[int, Digraph], ...]

    def __post_init__(self):
        entries = tuple((int(s), g) for s, g in self.entries)
        if not entries or entries[0][0] != 0:
            raise ScenarioError("timeline schedule must start at t=0")
        starts = [s for s, _ in entries]
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ScenarioError("timeline start times must be strictly increasing")
        if any(g.n != entries[0][1].n for _, g in entries):
            raise ScenarioError("all graphs of a schedule must share the node count")
        object.__setattr__(self, "entries", entries)

    @property
    def n(self) -> int:
        return self.entries[0][1].n

    @property
    def graphs(self) -> tuple[Digraph, ...]:
        return tuple(g for _, g in self.entries)

    def graph_at(self, t: int) -> Digraph:
        current = self.entries[0][1]
        for start, g in self.entries:
            if start > t:
                break
            current = g
        return current


GraphSchedule = Union[StaticSchedule, PeriodicSchedule, TimelineSchedule]


def graph_at(schedule: GraphSchedule, t: int) -> Digraph:
    if t < 0:
        raise ValueError(f"timestep must be non-negative, got {t}")
    return schedule.graph_at(t)


def schedule_graphs_until(schedule: GraphSchedule, horizon: int) -> tuple[Digraph, ...]:
    """Distinct graphs in force on ``[0, horizon)``; one period for periodic."""
    if isinstance(schedule, TimelineSchedule):
        return tuple(g for s, g in schedule.entries if s < max(horizon, 1))
    return schedule.graphs


def is_f_local(schedule: GraphSchedule, adversaries: Iterable[int], F: int,
               horizon: int = 1) -> bool:
    """True iff no non-adversary has more than ``F`` adversarial in-neighbours.

    Static and periodic schedules are checked over their graphs (``horizon``
    ignored); timelines over the graphs in force before ``horizon``.
    """
    if F < 0:
        raise ValueError("F must be non-negative")
    a_mask = mask_of(adversaries)
    if not a_mask:
        return True
    for g in schedule_graphs_until(schedule, horizon):
        for i in g.vertex_set:
            if a_mask >> i & 1:
                continue
            if (g.in_masks[i] & a_mask).bit_count() > F:
                return False
    return True


# --- roles -----------------------------------------------------------------


@dataclass(frozen=True)
class RoleAssignment:
    n: int
    leaders: frozenset[int]
    followers: frozenset[int]
    adversaries: frozenset[int] = frozenset()

    def __post_init__(self):
        leaders = frozenset(self.leaders)
        followers = frozenset(self.followers)
        adversaries = frozenset(self.adversaries)
        object.__setattr__(self, "leaders", leaders)
        object.__setattr__(self, "followers", followers)
        object.__setattr__(self, "adversaries", adversaries)
        every = frozenset(range(self.n))
        for name, s in (("leaders", leaders), ("followers", followers),
                        ("adversaries", adversaries)):
            bad = s - every
            if bad:
                raise ScenarioError(f"{name} reference out-of-range nodes {sorted(bad)}")
        both = leaders & followers
        if both:
            raise ScenarioError(f"nodes {sorted(both)} are both leader and follower")
        if leaders | followers != every:
            missing = sorted(every - leaders - followers)
            raise ScenarioError(f"nodes {missing} are neither leader nor follower")
        if not self.normal_followers:
            raise ScenarioError("there must be at least one normal follower")
        if not self.normal_leaders:
            raise ScenarioError("there must be at least one normal leader")

    @classmethod
    def from_leaders(cls, n: int, leaders: Iterable[int],
                     adversaries: Iterable[int] = ()) -> "RoleAssignment":
        leaders = frozenset(leaders)
        return cls(n, leaders, frozenset(range(n)) - leaders, frozenset(adversaries))

    @property
    def normal(self) -> frozenset[int]:
        return frozenset(range(self.n)) - self.adversaries

    @property
    def normal_leaders(self) -> frozenset[int]:
        return self.leaders - self.adversaries

    @property
    def normal_followers(self) -> frozenset[int]:
        return self.followers - self.adversaries

    def role_of(self, i: int) -> str:
        base = "leader" if i in self.leaders else "follower"
        return f"adversarial_{base}" if i in self.adversaries else base
