"""Acceptance criteria, one test each.

Every test records a single ``[PASS]``/``[FAIL]`` line; pytest prints them
in the terminal summary. Running this file as a script prints the eight
lines without pytest.
"""

import filecmp
import random
import sys
from itertools import product
from pathlib import Path

import numpy as np
import pytest

from bpmsr import cli, gallery
from bpmsr.analysis import (classify_convergence, convergent_set_lower, convergent_set_upper)
from bpmsr.engine import run_comparison, run_simulation
from bpmsr.graph_core import induced_subgraph
from bpmsr.percolation import AlwaysOne, AlwaysZero, RandomMonotone, validate_strategy
from bpmsr.robustness import (is_strongly_r_robust_bp, is_strongly_r_robust_bruteforce,
                              robust_follower_set)

sys.path.insert(0, str(Path(__file__).resolve().parent))
from conftest import random_digraph, random_scenario  # noqa: E402

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"
TOL = 1e-6
SLACK = 1e-12
RESULTS: list[str] = []


def report(number, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
    RESULTS.append(line)
    if __name__ == "__main__":
        print(line, file=sys.stderr)
    return ok


def robustness_sweep(per_cell=40, seed=2024):
    """(g, S1, r) for every density x r cell; 3 * 2 * per_cell instances."""
    rng = random.Random(seed)
    out = []
    for density, r in product((0.3, 0.5, 0.8), (2, 3)):
        for _ in range(per_cell):
            n = rng.randint(4, 8)
            g = random_digraph(rng, n, density)
            s1 = frozenset(rng.sample(range(n), rng.randint(1, n)))
            out.append((g, s1, r))
    return out


def check_1():
    sweep = robustness_sweep()
    bad = [(g, s, r) for g, s, r in sweep
           if is_strongly_r_robust_bp(g, s, r) != is_strongly_r_robust_bruteforce(g, s, r).holds]
    holds = sum(is_strongly_r_robust_bruteforce(g, s, r).holds for g, s, r in sweep)
    ok = len(sweep) >= 200 and not bad
    return report(1, ok, f"BP check agrees with brute force on {len(sweep) - len(bad)}/"
                         f"{len(sweep)} digraphs ({holds} robust)")


def check_2():
    sweep = robustness_sweep()
    tested = failed = 0
    for g, s, r in sweep:
        res = robust_follower_set(g, s, r)
        if res:
            tested += 1
            if not is_strongly_r_robust_bruteforce(induced_subgraph(g, s | res), s, r).holds:
                failed += 1
    return report(2, tested > 0 and failed == 0,
                  f"induced subgraph on S plus follower set robust in {tested - failed}/{tested}"
                  " nonempty cases")


def check_3(count=50, horizon=150, seed=31):
    rng = random.Random(seed)
    worst = -np.inf
    breaches = 0
    for _ in range(count):
        s = random_scenario(rng, max_n=12, horizon=horizon)
        assert s.n <= 12 and s.F in (1, 2) and s.validate() == []
        act = s.resolved().activation_strategy
        for t in range(horizon):
            assert validate_strategy(act, s.schedule.graph_at(t), s.roles, t)
        tr = run_simulation(s)
        t_c = s.signal.settle_time
        lo, hi = tr.normal_hull(t_c)
        rows = tr.x[sorted(s.roles.normal), t_c:]
        excess = max(lo - rows.min(), rows.max() - hi)
        worst = max(worst, excess)
        breaches += excess > SLACK
    return report(3, breaches == 0,
                  f"{count - breaches}/{count} random scenarios stay in [m(tC), M(tC)] "
                  f"(worst excursion {max(worst, 0.0):.1e}, slack {SLACK:g})")


def check_4():
    s = gallery.alternating_scenario()
    predicted = convergent_set_lower(s.schedule, s.roles, s.F)
    traces = run_comparison(s, ["W-MSR", "BP-MSR"])
    bp = classify_convergence(traces["BP-MSR"], s.signal, TOL)
    w = classify_convergence(traces["W-MSR"], s.signal, TOL)
    bp_ok = bool(predicted) and all(bp.residuals[i] < TOL for i in predicted)
    w_worst = max(w.residuals.values())
    ok = bp_ok and w_worst > 1 and s.horizon - s.signal.settle_time <= 600
    return report(4, ok, f"BP-MSR residual max {max(bp.residuals[i] for i in predicted):.1e} on "
                         f"{sorted(predicted)}; W-MSR worst residual {w_worst:.3g}")


def check_5(runs=20):
    schedule, roles = gallery.three_periodic_scenario().schedule, gallery.roles()
    lower = convergent_set_lower(schedule, roles, gallery.F)
    upper = convergent_set_upper(schedule, roles, gallery.F)

    def converged(strategy):
        s = gallery.three_periodic_scenario(strategy)
        return classify_convergence(run_simulation(s), s.signal, TOL).converged

    zero, one = converged(AlwaysZero()), converged(AlwaysOne())
    mids = [converged(RandomMonotone(seed=k)) for k in range(runs)]
    sandwiched = sum(lower <= m <= upper for m in mids)
    ok = zero == lower and one == upper and lower < upper and sandwiched == runs
    return report(5, ok, f"lower {sorted(lower)} < upper {sorted(upper)}; always_zero "
                         f"{sorted(zero)}, always_one {sorted(one)}; {sandwiched}/{runs} random "
                         f"runs in between ({len({m for m in mids})} distinct sets)")


def check_6():
    s = gallery.full_consensus_scenario()
    traces = run_comparison(s, ["W-MSR", "BP-MSR"])
    same = np.array_equal(traces["W-MSR"].x, traces["BP-MSR"].x)
    conv = classify_convergence(traces["BP-MSR"], s.signal, TOL).converged
    ok = same and conv == s.roles.normal_followers
    return report(6, ok, f"traces bit-identical: {same}; converged {sorted(conv)} of "
                         f"{sorted(s.roles.normal_followers)}")


def check_7():
    s = gallery.alternating_scenario()
    tr = run_simulation(s)
    rep = classify_convergence(tr, s.signal, TOL)
    lo, hi = tr.normal_hull(s.signal.settle_time)
    stuck = sorted(s.roles.normal_followers - rep.converged)
    inside = [i for i in stuck if lo <= tr.x[i, -1] <= hi]
    ok = bool(stuck) and inside == stuck
    return report(7, ok, f"non-convergent followers {stuck} end inside [{lo:.4g}, {hi:.4g}]: "
                         f"{len(inside)}/{len(stuck)}")


def _tree_equal(a: Path, b: Path) -> tuple[int, list[str]]:
    files = sorted(p.relative_to(a) for p in a.rglob("*") if p.is_file())
    other = sorted(p.relative_to(b) for p in b.rglob("*") if p.is_file())
    if files != other:
        return len(files), ["file lists differ"]
    return len(files), [str(f) for f in files if not filecmp.cmp(a / f, b / f, shallow=False)]


def check_8(tmp):
    configs = sorted(str(p) for p in SCENARIOS.glob("*.scenario"))
    dirs = []
    for k in range(2):
        out = Path(tmp) / f"run{k}"
        for cfg in configs:
            code = cli.main(["run", cfg, "--plots", "--output-dir", str(out)])
            assert code == 0, cfg
        dirs.append(out)
    n_files, diffs = _tree_equal(*dirs)
    return report(8, n_files > 0 and not diffs,
                  f"{n_files} exported files across {len(configs)} scenarios, "
                  f"{len(diffs)} differ on re-run")


def test_criterion_1_bp_equals_bruteforce():
    assert check_1()


def test_criterion_2_follower_set_is_robust():
    assert check_2()


def test_criterion_3_safety_random_scenarios():
    assert check_3()


def test_criterion_4_partial_consensus_alternating():
    assert check_4()


def test_criterion_5_sandwich_three_periodic():
    assert check_5()


def test_criterion_6_full_consensus_reduces_to_wmsr():
    assert check_6()


def test_criterion_7_nonconvergent_stay_in_hull():
    assert check_7()


def test_criterion_8_byte_identical_exports(tmp_path, capsys):
    ok = check_8(tmp_path)
    capsys.readouterr()
    assert ok


if __name__ == "__main__":
    import tempfile
    results = [check_1(), check_2(), check_3(), check_4(), check_5(), check_6(), check_7()]
    with tempfile.TemporaryDirectory() as tmp:
        import contextlib, io
        with contextlib.redirect_stdout(io.StringIO()):
            results.append(check_8(tmp))
    sys.exit(0 if all(results) else 1)
