"""Converged sets on the three-periodic gallery scenario versus the bounds.

    python scripts/sandwich.py [--runs 20] [--horizon-k 16]

Runs always_zero, always_one and ``--runs`` random monotone activation
strategies and checks each converged set against the lower/upper bounds.
A small ``--horizon-k`` makes adversaries switch on early, a large one late.
"""

import argparse
from collections import Counter

from bpmsr import gallery
from bpmsr.analysis import classify_convergence, convergent_set_bounds
from bpmsr.engine import run_simulation
from bpmsr.percolation import AlwaysOne, AlwaysZero, RandomMonotone


def converged(strategy, horizon):
    s = gallery.three_periodic_scenario(strategy, horizon=horizon)
    return classify_convergence(run_simulation(s), s.signal).converged


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--runs", type=int, default=20)
    ap.add_argument("--horizon", type=int, default=900)
    ap.add_argument("--horizon-k", type=int, default=16)
    args = ap.parse_args()

    s = gallery.three_periodic_scenario()
    b = convergent_set_bounds(s.schedule, s.roles, s.F)
    print(f"lower bound {sorted(b.lower)}  upper bound {sorted(b.upper)}")
    for off, acts in sorted(b.per_period_activations.items()):
        print(f"  offset {off}: zero {sorted(acts['always_zero'])}  one {sorted(acts['always_one'])}")
    print(f"always_zero -> {sorted(converged(AlwaysZero(), args.horizon))}")
    print(f"always_one  -> {sorted(converged(AlwaysOne(), args.horizon))}")
    seen = Counter()
    outside = 0
    for k in range(args.runs):
        c = converged(RandomMonotone(seed=k, horizon_k=args.horizon_k), args.horizon)
        seen[tuple(sorted(c))] += 1
        outside += not (b.lower <= c <= b.upper)
    for sets, count in seen.most_common():
        print(f"random_monotone -> {list(sets)} x{count}")
    print(f"outside the bounds: {outside}/{args.runs}")
    return 1 if outside else 0


if __name__ == "__main__":
    raise SystemExit(main())
