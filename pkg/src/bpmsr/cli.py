"""Command line interface.

Exit codes: 0 success, 1 usage/parse error, 2 scenario invariant violated,
3 runtime protocol violation (or an internal oracle disagreement).
Relative output paths resolve against ``$BPMSR_OUTPUT_DIR`` when set,
otherwise against ``./bpmsr_out``.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

from . import analysis
from .config import OutputPaths, load_scenario
from .engine import ConsensusTrace, Scenario, parse_protocol, run_simulation
from .errors import (ConfigError, InstanceTooLarge, ProtocolViolation, SafetyViolation,
                     ScenarioError, UnsupportedSchedule)
from .export import dumps_json, emit_plot_data, read_trajectory, write_summary, write_trajectory
from .graph_core import PeriodicSchedule, StaticSchedule
from .percolation import AlwaysOne
from .protocols import ConstantSignal
from .robustness import (is_strongly_r_robust_bp, is_strongly_r_robust_bruteforce,
                         robust_follower_set)

OUTPUT_ENV = "BPMSR_OUTPUT_DIR"
EXIT_OK, EXIT_USAGE, EXIT_SCENARIO, EXIT_RUNTIME = 0, 1, 2, 3


class OracleDisagreement(Exception):
    pass


def output_root(cli_value=None) -> Path:
    if cli_value:
        return Path(cli_value)
    return Path(os.environ.get(OUTPUT_ENV, "bpmsr_out"))


def _resolve(root: Path, value, default: str) -> Path:
    p = Path(value) if value else Path(default)
    return p if p.is_absolute() else root / p


def _overrides(args) -> dict[str, str]:
    out = {}
    for item in getattr(args, "set", None) or []:
        key, sep, value = item.partition("=")
        if not sep or "." not in key:
            raise ConfigError(f"--set expects section.key=value, got {item!r}")
        out[key.strip()] = value.strip()
    if getattr(args, "protocol", None):
        out["scenario.protocol"] = args.protocol
    if getattr(args, "seed", None) is not None:
        out["scenario.seed"] = str(args.seed)
    if getattr(args, "horizon", None) is not None:
        out["scenario.horizon"] = str(args.horizon)
    return out


def summarize(s: Scenario, trace: ConsensusTrace, tolerance: float) -> dict:
    data = {"scenario": s.name, "protocol": s.protocol, "F": s.F, "seed": s.seed,
            "horizon": s.horizon, "nodes": s.n,
            "leaders": sorted(s.roles.leaders), "adversaries": sorted(s.roles.adversaries),
            "f_local": not s.validate()}
    if isinstance(s.schedule, (PeriodicSchedule, StaticSchedule)):
        data["bounds"] = analysis.convergent_set_bounds(s.schedule, s.roles, s.F).to_dict()
    if isinstance(s.signal, ConstantSignal):
        report = analysis.classify_convergence(trace, s.signal, tolerance)
        data["convergence"] = report.to_dict()
        t0 = s.signal.settle_time
        if "bounds" in data:
            key = "upper" if isinstance(s.activation_strategy, AlwaysOne) else "lower"
            predicted = frozenset(data["bounds"][key])
            data["contraction"] = analysis.contraction_check(
                trace, s.roles, predicted, t0, s.signal, tolerance)
        lo, hi = trace.normal_hull(t0)
        data["safety_interval"] = [lo, hi]
        data["final_states"] = {str(i): float(trace.x[i, -1])
                                for i in sorted(s.roles.normal_followers)}
    return data


def _run_one(config: str, overrides: dict, out_dir, tolerance: float, check_safety: bool,
             plots: bool, subdir: str = "") -> dict:
    s, outputs = load_scenario(config, overrides)
    trace = run_simulation(s, check_safety=check_safety)
    root = output_root(out_dir) / subdir if subdir else output_root(out_dir)
    traj = write_trajectory(trace, _resolve(root, outputs.trajectory, f"{s.name}/trajectory.csv"))
    summary = summarize(s, trace, tolerance)
    summ = write_summary(summary, _resolve(root, outputs.summary, f"{s.name}/summary.json"))
    result = {"trajectory": str(traj), "summary": str(summ)}
    if plots or outputs.plots:
        conv = frozenset(summary.get("convergence", {}).get("converged", [])) \
            if "convergence" in summary else None
        pdir = _resolve(root, outputs.plots, f"{s.name}/plots")
        emit_plot_data(trace, pdir, conv)
        result["plots"] = str(pdir)
    return result


def cmd_run(args) -> int:
    overrides = _overrides(args)
    configs = args.config
    if len(configs) > 1 and not args.batch:
        raise ConfigError("several configs given; pass --batch to run them all")
    if args.batch:
        jobs = {}
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            for cfg in configs:
                jobs[cfg] = pool.submit(_run_one, cfg, overrides, args.output_dir,
                                        args.tolerance, args.check_safety, args.plots,
                                        Path(cfg).stem)
            results = {cfg: fut.result() for cfg, fut in jobs.items()}
        print(dumps_json(results), end="")
        return EXIT_OK
    print(dumps_json(_run_one(configs[0], overrides, args.output_dir, args.tolerance,
                              args.check_safety, args.plots)), end="")
    return EXIT_OK


def cmd_compare(args) -> int:
    overrides = _overrides(args)
    s, outputs = load_scenario(args.config, overrides)
    root = output_root(args.output_dir) / s.name / "compare"
    report = {}
    for name in args.protocols:
        proto, window = parse_protocol(name, s.window)
        variant = replace(s, protocol=proto, window=window)
        trace = run_simulation(variant)
        safe = name.replace("(", "_").replace(")", "")
        write_trajectory(trace, root / safe / "trajectory.csv")
        report[name] = summarize(variant, trace, args.tolerance)
        if args.plots:
            conv = frozenset(report[name].get("convergence", {}).get("converged", []))
            emit_plot_data(trace, root / safe / "plots", conv)
    write_summary(report, root / "comparison.json")
    print(dumps_json({name: r.get("convergence", {}).get("converged")
                      for name, r in report.items()}), end="")
    return EXIT_OK


def _parse_set(text, n):
    out = set()
    for tok in text.replace(",", " ").split():
        v = int(tok)
        if not 0 <= v < n:
            raise ConfigError(f"--set-nodes: node {v} out of range")
        out.add(v)
    if not out:
        raise ConfigError("--set-nodes must name at least one node")
    return frozenset(out)


def cmd_check_robustness(args) -> int:
    s, _ = load_scenario(args.config, _overrides(args))
    s1 = _parse_set(args.set_nodes, s.n) if args.set_nodes else s.roles.leaders
    r = args.r if args.r is not None else s.r
    graphs = s.schedule.graphs
    offsets = range(len(graphs)) if args.offset is None else [args.offset]
    out = {"S1": sorted(s1), "r": r, "graphs": {}}
    disagreement = False
    for k in offsets:
        g = graphs[k]
        entry = {}
        try:
            verdict = is_strongly_r_robust_bruteforce(g, s1, r)
            entry["robust"] = verdict.holds
            entry["witness"] = sorted(verdict.witness) if verdict.witness else None
        except InstanceTooLarge as exc:
            verdict = None
            entry["robust"] = None
            entry["oracle"] = str(exc)
        if r >= 2:
            bp = is_strongly_r_robust_bp(g, s1, r)
            entry["robust_bp"] = bp
            if verdict is not None and bp != verdict.holds:
                disagreement = True
        entry["activated"] = sorted(robust_follower_set(g, s1, r))
        bounds = analysis.convergent_set_bounds(PeriodicSchedule((g,)), s.roles, s.F)
        entry["activated_normal_only"] = sorted(bounds.lower)
        entry["activated_with_adversaries"] = sorted(bounds.upper)
        out["graphs"][str(k)] = entry
    print(dumps_json(out), end="")
    if disagreement:
        raise OracleDisagreement("brute-force and percolation verdicts disagree")
    return EXIT_OK


def cmd_bounds(args) -> int:
    s, _ = load_scenario(args.config, _overrides(args))
    bounds = analysis.convergent_set_bounds(s.schedule, s.roles, s.F)
    data = bounds.to_dict()
    data["strict"] = bounds.lower < bounds.upper
    print(dumps_json(data), end="")
    return EXIT_OK


def cmd_analyze(args) -> int:
    s, outputs = load_scenario(args.config, _overrides(args))
    if args.trajectory:
        trace = read_trajectory(args.trajectory, s.roles, s.protocol)
        if trace.horizon != s.horizon:
            raise ScenarioError(
                f"trajectory covers {trace.horizon} steps but the scenario says {s.horizon}")
    else:
        trace = run_simulation(s)
    data = summarize(s, trace, args.tolerance)
    if args.summary:
        write_summary(data, args.summary)
    print(dumps_json(data), end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="bpmsr", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, many=False):
        if many:
            sp.add_argument("config", nargs="+")
        else:
            sp.add_argument("config")
        sp.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE",
                        help="override a config entry (repeatable)")
        sp.add_argument("--protocol")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--horizon", type=int)
        sp.add_argument("--tolerance", type=float, default=analysis.DEFAULT_TOLERANCE)

    sp = sub.add_parser("run", help="simulate a scenario and export trajectory + summary")
    common(sp, many=True)
    sp.add_argument("--output-dir")
    sp.add_argument("--check-safety", action="store_true")
    sp.add_argument("--plots", action="store_true", help="also emit per-node plot data")
    sp.add_argument("--batch", action="store_true", help="run every config in parallel")
    sp.add_argument("-j", "--jobs", type=int, default=None)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("compare", help="run one scenario under several protocols")
    common(sp)
    sp.add_argument("--protocols", nargs="+", default=["W-MSR", "SW-MSR(2)", "BP-MSR"])
    sp.add_argument("--output-dir")
    sp.add_argument("--plots", action="store_true")
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("check-robustness", help="strong r-robustness of the schedule's graphs")
    common(sp)
    sp.add_argument("--set-nodes", help="S1 as a node list (default: leaders)")
    sp.add_argument("--r", type=int, help="threshold (default: 2F+1)")
    sp.add_argument("--offset", type=int, help="only this graph of the schedule")
    sp.set_defaults(func=cmd_check_robustness)

    sp = sub.add_parser("bounds", help="lower/upper convergent sets of a periodic schedule")
    common(sp)
    sp.set_defaults(func=cmd_bounds)

    sp = sub.add_parser("analyze", help="convergence report for a scenario or trajectory")
    common(sp)
    sp.add_argument("--trajectory", help="analyze an existing export instead of re-running")
    sp.add_argument("--summary", help="also write the report to this path")
    sp.set_defaults(func=cmd_analyze)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ScenarioError, UnsupportedSchedule, InstanceTooLarge) as exc:
        print(f"scenario error: {exc}", file=sys.stderr)
        return EXIT_SCENARIO
    except (ProtocolViolation, SafetyViolation, OracleDisagreement) as exc:
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
