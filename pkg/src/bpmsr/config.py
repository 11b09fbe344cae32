"""Scenario file format: line-oriented ``key = value`` under ``[section]`` headers.

Example::

    [scenario]
    name = alternating
    nodes = 10
    F = 1
    horizon = 600
    seed = 2024
    protocol = BP-MSR

    [roles]
    leaders = 1 2 3
    adversaries = 0

    [schedule]
    periodic = true
    graph.0 = 1>0 0>4 1>4
    file.1 = g2.edges

    [signal]
    kind = constant
    value = 250.0

    [strategies]
    value = sinusoid
    value.amplitude = 1000.0
    activation = always_zero

Edges are ``u>v`` tokens (``v`` hears ``u``). Edge files hold the same
tokens, or ``u v`` pairs one per line; ``#`` starts a comment. ``graph.K``
is the period offset for periodic schedules and the start time for
timelines. Unknown sections and keys are rejected with their position.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .engine import PROTOCOLS, ExplicitInit, Scenario, UniformInit, parse_protocol
from .errors import ConfigError, ScenarioError
from .graph_core import (Digraph, PeriodicSchedule, RoleAssignment, StaticSchedule,
                         TimelineSchedule)
from .percolation import AlwaysOne, AlwaysZero, RandomMonotone
from .protocols import (ConstantOutlier, ConstantSignal, PiecewiseRandomSignal, SelfBiased,
                        Sinusoid, Split, TableSignal, Uniform)

SECTIONS = {
    "scenario": {"name", "nodes", "F", "horizon", "seed", "protocol", "window"},
    "roles": {"leaders", "followers", "adversaries"},
    "schedule": {"periodic", "graph.*", "file.*"},
    "signal": {"kind", "value", "from", "prior", "interval", "low", "high", "seed", "points"},
    "strategies": {"value", "value.amplitude", "value.divisor", "value.value", "value.bound",
                   "activation", "activation.seed", "activation.horizon_k"},
    "weights": {"rule", "self_weight"},
    "initial": {"kind", "low", "high", "x.*"},
    "output": {"trajectory", "summary", "plots"},
}
REQUIRED = {"scenario": ("nodes", "F", "horizon"), "roles": ("leaders",)}

_SECTION_RE = re.compile(r"^\[\s*([A-Za-z_]+)\s*\]\s*$")
_EDGE_RE = re.compile(r"^(\d+)>(\d+)$")


@dataclass
class Entry:
    value: str
    line: int
    column: int  # column of the value


@dataclass
class RawConfig:
    sections: dict[str, dict[str, Entry]] = field(default_factory=dict)
    path: Optional[Path] = None
    key_pos: dict[tuple[str, str], tuple[int, int]] = field(default_factory=dict)

    def get(self, section: str, key: str) -> Optional[Entry]:
        return self.sections.get(section, {}).get(key)

    def set(self, section: str, key: str, value: str):
        _check_key(section, key, 0, 0, self.path)
        self.sections.setdefault(section, {})[key] = Entry(value, 0, 0)


@dataclass(frozen=True)
class OutputPaths:
    trajectory: Optional[str] = None
    summary: Optional[str] = None
    plots: Optional[str] = None


def _key_allowed(section: str, key: str) -> bool:
    allowed = SECTIONS[section]
    if key in allowed:
        return True
    head, _, tail = key.partition(".")
    return bool(tail) and f"{head}.*" in allowed and tail.isdigit()


def _check_key(section, key, line, col, path):
    if section not in SECTIONS:
        raise ConfigError(f"unknown section [{section}]", line, col, path)
    if not _key_allowed(section, key):
        raise ConfigError(f"unknown key {key!r} in [{section}]", line, col, path)


def parse_text(text: str, path=None) -> RawConfig:
    raw = RawConfig(path=Path(path) if path else None)
    section = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].rstrip()
        if not stripped.strip():
            continue
        indent = len(stripped) - len(stripped.lstrip())
        m = _SECTION_RE.match(stripped.strip())
        if m:
            section = m.group(1)
            if section not in SECTIONS:
                raise ConfigError(f"unknown section [{section}]", lineno, indent + 1, path)
            if section in raw.sections:
                raise ConfigError(f"duplicate section [{section}]", lineno, indent + 1, path)
            raw.sections[section] = {}
            continue
        if "=" not in stripped:
            raise ConfigError("expected 'key = value' or '[section]'", lineno, indent + 1, path)
        if section is None:
            raise ConfigError("key outside of any section", lineno, indent + 1, path)
        key_part, value_part = stripped.split("=", 1)
        key = key_part.strip()
        _check_key(section, key, lineno, indent + 1, path)
        if key in raw.sections[section]:
            raise ConfigError(f"duplicate key {key!r}", lineno, indent + 1, path)
        value_col = len(key_part) + 2 + (len(value_part) - len(value_part.lstrip()))
        raw.sections[section][key] = Entry(value_part.strip(), lineno, value_col)
        raw.key_pos[(section, key)] = (lineno, indent + 1)
    for sec, keys in REQUIRED.items():
        for k in keys:
            if raw.get(sec, k) is None:
                raise ConfigError(f"missing required key {k!r} in [{sec}]", None, None, path)
    return raw


def parse_file(path) -> RawConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", path=path) from exc
    return parse_text(text, path)


# --- typed accessors -------------------------------------------------------


def _err(raw, entry, msg):
    return ConfigError(msg, entry.line or None, entry.column or None, raw.path)


def _int(raw, sec, key, default=None):
    e = raw.get(sec, key)
    if e is None:
        return default
    try:
        return int(e.value)
    except ValueError:
        raise _err(raw, e, f"{sec}.{key}: expected an integer, got {e.value!r}") from None


def _float(raw, sec, key, default=None):
    e = raw.get(sec, key)
    if e is None:
        return default
    try:
        v = float(e.value)
    except ValueError:
        raise _err(raw, e, f"{sec}.{key}: expected a number, got {e.value!r}") from None
    if not math.isfinite(v):
        raise _err(raw, e, f"{sec}.{key}: value must be finite")
    return v


def _str(raw, sec, key, default=None):
    e = raw.get(sec, key)
    return default if e is None else e.value


def _bool(raw, sec, key, default=None):
    e = raw.get(sec, key)
    if e is None:
        return default
    v = e.value.lower()
    if v in ("true", "yes", "1"):
        return True
    if v in ("false", "no", "0"):
        return False
    raise _err(raw, e, f"{sec}.{key}: expected true/false, got {e.value!r}")


def _nodes(raw, sec, key, n) -> Optional[frozenset[int]]:
    e = raw.get(sec, key)
    if e is None:
        return None
    out = []
    for tok in e.value.replace(",", " ").split():
        try:
            v = int(tok)
        except ValueError:
            raise _err(raw, e, f"{sec}.{key}: bad node id {tok!r}") from None
        if not 0 <= v < n:
            raise _err(raw, e, f"{sec}.{key}: node {v} out of range 0..{n - 1}")
        if v in out:
            raise _err(raw, e, f"{sec}.{key}: node {v} listed twice")
        out.append(v)
    return frozenset(out)


def _edges_from_tokens(raw, entry, text, n, where):
    edges = []
    for tok in text.replace(",", " ").split():
        m = _EDGE_RE.match(tok)
        if not m:
            raise _err(raw, entry, f"{where}: bad edge token {tok!r} (expected u>v)")
        u, v = int(m.group(1)), int(m.group(2))
        if not (0 <= u < n and 0 <= v < n):
            raise _err(raw, entry, f"{where}: edge {tok} out of range 0..{n - 1}")
        if u == v:
            raise _err(raw, entry, f"{where}: self-loop {tok}")
        if (u, v) in edges:
            raise _err(raw, entry, f"{where}: duplicate edge {tok}")
        edges.append((u, v))
    return Digraph(n, frozenset(edges))


def _edges_from_file(raw, entry, n, where):
    base = raw.path.parent if raw.path else Path.cwd()
    fpath = (base / entry.value).resolve()
    try:
        lines = fpath.read_text().splitlines()
    except OSError as exc:
        raise _err(raw, entry, f"{where}: cannot read edge file: {exc}") from None
    tokens = []
    for line in lines:
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) == 2 and all(p.isdigit() for p in parts):
            tokens.append(f"{parts[0]}>{parts[1]}")
        else:
            tokens.extend(parts)
    return _edges_from_tokens(raw, entry, " ".join(tokens), n, f"{where} ({fpath.name})")


def _schedule(raw, n):
    sec = raw.sections.get("schedule")
    if not sec:
        raise ConfigError("missing [schedule] section", path=raw.path)
    periodic = _bool(raw, "schedule", "periodic", True)
    graphs = {}
    for key, entry in sec.items():
        head, _, idx = key.partition(".")
        if head not in ("graph", "file"):
            continue
        k = int(idx)
        if k in graphs:
            raise _err(raw, entry, f"schedule: index {k} given twice")
        where = f"schedule.{key}"
        graphs[k] = (_edges_from_tokens(raw, entry, entry.value, n, where) if head == "graph"
                     else _edges_from_file(raw, entry, n, where))
    if not graphs:
        raise ConfigError("schedule defines no graphs", path=raw.path)
    keys = sorted(graphs)
    if periodic:
        if keys != list(range(len(keys))):
            raise ConfigError(f"periodic offsets must be 0..{len(keys) - 1}, got {keys}",
                              path=raw.path)
        if len(keys) == 1:
            return StaticSchedule(graphs[0])
        return PeriodicSchedule(tuple(graphs[k] for k in keys))
    if keys[0] != 0:
        raise ConfigError("timeline schedule must start at t=0", path=raw.path)
    return TimelineSchedule(tuple((k, graphs[k]) for k in keys))


def _signal(raw):
    kind = _str(raw, "signal", "kind", "constant")
    random_part = None
    if kind == "piecewise_random" or _str(raw, "signal", "prior") == "piecewise_random":
        random_part = PiecewiseRandomSignal(
            _int(raw, "signal", "interval", 50), _float(raw, "signal", "low", -1000.0),
            _float(raw, "signal", "high", 1000.0), _int(raw, "signal", "seed"))
        if random_part.interval < 1:
            raise _err(raw, raw.get("signal", "interval"), "signal.interval must be >= 1")
    if kind == "constant":
        value = _float(raw, "signal", "value")
        if value is None:
            raise ConfigError("constant signal needs signal.value", path=raw.path)
        prior = _str(raw, "signal", "prior")
        if prior not in (None, "piecewise_random"):
            raise _err(raw, raw.get("signal", "prior"), f"unsupported prior {prior!r}")
        return ConstantSignal(value, _int(raw, "signal", "from", 0), random_part)
    if kind == "piecewise_random":
        return random_part
    if kind == "table":
        e = raw.get("signal", "points")
        if e is None:
            raise ConfigError("table signal needs signal.points", path=raw.path)
        pts = []
        for tok in e.value.replace(",", " ").split():
            t, sep, v = tok.partition(":")
            try:
                pts.append((int(t), float(v)))
            except ValueError:
                raise _err(raw, e, f"signal.points: bad point {tok!r} (expected t:value)") from None
        try:
            return TableSignal(tuple(pts))
        except ValueError as exc:
            raise _err(raw, e, f"signal.points: {exc}") from None
    e = raw.get("signal", "kind")
    raise _err(raw, e, f"unknown signal kind {kind!r}")


def _value_strategy(raw):
    kind = _str(raw, "strategies", "value", "sinusoid")
    if kind == "sinusoid":
        return Sinusoid(_float(raw, "strategies", "value.amplitude", 1000.0),
                        _float(raw, "strategies", "value.divisor", 5.0))
    if kind == "constant":
        return ConstantOutlier(_float(raw, "strategies", "value.value", 1e6))
    if kind == "split":
        return Split(_float(raw, "strategies", "value.bound", 1e3))
    raise _err(raw, raw.get("strategies", "value"), f"unknown value strategy {kind!r}")


def _activation(raw):
    kind = _str(raw, "strategies", "activation", "always_zero")
    if kind == "always_zero":
        return AlwaysZero()
    if kind == "always_one":
        return AlwaysOne()
    if kind == "random_monotone":
        return RandomMonotone(_int(raw, "strategies", "activation.seed"),
                              _int(raw, "strategies", "activation.horizon_k", 16))
    raise _err(raw, raw.get("strategies", "activation"), f"unknown activation strategy {kind!r}")


def _weights(raw):
    rule = _str(raw, "weights", "rule", "uniform")
    if rule == "uniform":
        return Uniform()
    if rule == "self_biased":
        try:
            return SelfBiased(_float(raw, "weights", "self_weight", 0.5))
        except ValueError as exc:
            raise _err(raw, raw.get("weights", "self_weight"), str(exc)) from None
    raise _err(raw, raw.get("weights", "rule"), f"unknown weight rule {rule!r}")


def _initial(raw, n):
    kind = _str(raw, "initial", "kind", "uniform")
    if kind == "uniform":
        return UniformInit(_float(raw, "initial", "low", -1000.0),
                           _float(raw, "initial", "high", 1000.0))
    if kind == "explicit":
        values = {}
        for key in raw.sections.get("initial", {}):
            if key.startswith("x."):
                i = int(key[2:])
                if not 0 <= i < n:
                    raise _err(raw, raw.get("initial", key), f"initial.{key}: node out of range")
                values[i] = _float(raw, "initial", key)
        return ExplicitInit(tuple(values.items()))
    raise _err(raw, raw.get("initial", "kind"), f"unknown initial kind {kind!r}")


def build_scenario(raw: RawConfig) -> tuple[Scenario, OutputPaths]:
    n = _int(raw, "scenario", "nodes")
    if n is None or n < 1:
        raise _err(raw, raw.get("scenario", "nodes"), "scenario.nodes must be >= 1")
    leaders = _nodes(raw, "roles", "leaders", n)
    followers = _nodes(raw, "roles", "followers", n)
    adversaries = _nodes(raw, "roles", "adversaries", n) or frozenset()
    if followers is None:
        followers = frozenset(range(n)) - leaders
    both = leaders & followers
    if both:
        raise _err(raw, raw.get("roles", "followers"),
                   f"nodes {sorted(both)} appear in both leaders and followers")
    proto_entry = raw.get("scenario", "protocol")
    try:
        protocol, window = parse_protocol(_str(raw, "scenario", "protocol", "BP-MSR"),
                                          _int(raw, "scenario", "window", 2))
    except ScenarioError as exc:
        raise _err(raw, proto_entry, str(exc)) from None
    roles = RoleAssignment(n, leaders, followers, adversaries)
    scenario = Scenario(
        schedule=_schedule(raw, n), roles=roles, F=_int(raw, "scenario", "F"),
        signal=_signal(raw), value_strategy=_value_strategy(raw),
        activation_strategy=_activation(raw), weight_rule=_weights(raw),
        initial_states=_initial(raw, n), horizon=_int(raw, "scenario", "horizon"),
        protocol=protocol, window=window, seed=_int(raw, "scenario", "seed", 0),
        name=_str(raw, "scenario", "name", raw.path.stem if raw.path else "scenario"))
    outputs = OutputPaths(_str(raw, "output", "trajectory"), _str(raw, "output", "summary"),
                          _str(raw, "output", "plots"))
    return scenario, outputs


def load_scenario(path, overrides: Optional[dict[str, str]] = None) -> tuple[Scenario, OutputPaths]:
    """Parse ``path``; ``overrides`` maps ``section.key`` to a replacement value."""
    raw = parse_file(path)
    for dotted, value in (overrides or {}).items():
        section, _, key = dotted.partition(".")
        raw.set(section, key, value)
    return build_scenario(raw)


# --- serialization ---------------------------------------------------------


def _fmt(v: float) -> str:
    return repr(float(v))


def _nodes_str(s) -> str:
    return " ".join(str(v) for v in sorted(s))


def _edges_str(g: Digraph) -> str:
    return " ".join(f"{u}>{v}" for u, v in g.sorted_edges())


def dump_scenario(s: Scenario, outputs: Optional[OutputPaths] = None) -> str:
    """Canonical text form; ``parse -> build -> dump`` is a fixed point."""
    if s.protocol not in PROTOCOLS:
        raise ScenarioError(f"unknown protocol {s.protocol!r}")
    lines = ["[scenario]", f"name = {s.name}", f"nodes = {s.n}", f"F = {s.F}",
             f"horizon = {s.horizon}", f"seed = {s.seed}", f"protocol = {s.protocol}",
             f"window = {s.window}", "", "[roles]",
             f"leaders = {_nodes_str(s.roles.leaders)}",
             f"followers = {_nodes_str(s.roles.followers)}"]
    if s.roles.adversaries:
        lines.append(f"adversaries = {_nodes_str(s.roles.adversaries)}")

    lines += ["", "[schedule]"]
    sched = s.schedule
    if isinstance(sched, TimelineSchedule):
        lines.append("periodic = false")
        lines += [f"graph.{start} = {_edges_str(g)}" for start, g in sched.entries]
    else:
        lines.append("periodic = true")
        lines += [f"graph.{k} = {_edges_str(g)}" for k, g in enumerate(sched.graphs)]

    lines += ["", "[signal]"]
    sig = s.signal
    rand = None
    if isinstance(sig, ConstantSignal):
        lines += ["kind = constant", f"value = {_fmt(sig.value)}", f"from = {sig.from_time}"]
        if sig.prior is not None:
            if not isinstance(sig.prior, PiecewiseRandomSignal):
                raise ScenarioError("only piecewise_random priors can be serialized")
            lines.append("prior = piecewise_random")
            rand = sig.prior
    elif isinstance(sig, PiecewiseRandomSignal):
        lines.append("kind = piecewise_random")
        rand = sig
    elif isinstance(sig, TableSignal):
        lines += ["kind = table",
                  "points = " + " ".join(f"{t}:{_fmt(v)}" for t, v in sig.points)]
    if rand is not None:
        lines += [f"interval = {rand.interval}", f"low = {_fmt(rand.low)}",
                  f"high = {_fmt(rand.high)}"]
        if rand.seed is not None:
            lines.append(f"seed = {rand.seed}")

    lines += ["", "[strategies]"]
    vs = s.value_strategy
    if isinstance(vs, Sinusoid):
        lines += ["value = sinusoid", f"value.amplitude = {_fmt(vs.amplitude)}",
                  f"value.divisor = {_fmt(vs.divisor)}"]
    elif isinstance(vs, ConstantOutlier):
        lines += ["value = constant", f"value.value = {_fmt(vs.value)}"]
    elif isinstance(vs, Split):
        lines += ["value = split", f"value.bound = {_fmt(vs.bound)}"]
    else:
        raise ScenarioError(f"value strategy {vs!r} has no file representation")
    act = s.activation_strategy
    if isinstance(act, RandomMonotone):
        lines.append("activation = random_monotone")
        if act.seed is not None:
            lines.append(f"activation.seed = {act.seed}")
        lines.append(f"activation.horizon_k = {act.horizon_k}")
    elif isinstance(act, (AlwaysZero, AlwaysOne)):
        lines.append(f"activation = {act.kind}")
    else:
        raise ScenarioError(f"activation strategy {act!r} has no file representation")

    lines += ["", "[weights]", f"rule = {s.weight_rule.kind}"]
    if isinstance(s.weight_rule, SelfBiased):
        lines.append(f"self_weight = {_fmt(s.weight_rule.self_weight)}")

    lines += ["", "[initial]"]
    init = s.initial_states
    if isinstance(init, UniformInit):
        lines += ["kind = uniform", f"low = {_fmt(init.low)}", f"high = {_fmt(init.high)}"]
    else:
        lines.append("kind = explicit")
        lines += [f"x.{i} = {_fmt(v)}" for i, v in init.values]

    if outputs is not None and any((outputs.trajectory, outputs.summary, outputs.plots)):
        lines += ["", "[output]"]
        for key in ("trajectory", "summary", "plots"):
            val = getattr(outputs, key)
            if val:
                lines.append(f"{key} = {val}")
    return "\n".join(lines) + "\n"
