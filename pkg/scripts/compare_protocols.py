"""Run the alternating gallery scenario under W-MSR, SW-MSR and BP-MSR.

    python scripts/compare_protocols.py [--horizon 600] [--plot out.png]

Prints the final residual of every normal follower per protocol. ``--plot``
draws one panel per protocol (needs matplotlib).
"""

import argparse

from bpmsr import gallery
from bpmsr.analysis import classify_convergence
from bpmsr.engine import run_comparison

PROTOCOLS = ["W-MSR", "SW-MSR(2)", "BP-MSR"]


def plot(traces, s, path):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(1, len(traces), figsize=(5 * len(traces), 3.5), sharey=True)
    for ax, (name, tr) in zip(axes, traces.items()):
        for i in sorted(s.roles.normal):
            style = "k--" if i in s.roles.leaders else "-"
            ax.plot(tr.x[i], style, lw=0.8, label=str(i))
        ax.set_title(name)
        ax.set_xlabel("t")
        ax.set_ylim(-1100, 1100)
    axes[0].set_ylabel("x_i[t]")
    axes[-1].legend(fontsize=6, ncol=2)
    fig.tight_layout()
    fig.savefig(path, dpi=150)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--horizon", type=int, default=600)
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--plot")
    args = ap.parse_args()
    kw = {"horizon": args.horizon}
    if args.seed is not None:
        kw["seed"] = args.seed
    s = gallery.alternating_scenario(**kw)
    traces = run_comparison(s, PROTOCOLS)
    followers = sorted(s.roles.normal_followers)
    print("protocol".ljust(10) + "".join(f"{i:>12}" for i in followers) + "   converged")
    for name, tr in traces.items():
        rep = classify_convergence(tr, s.signal)
        row = "".join(f"{rep.residuals[i]:12.3g}" for i in followers)
        print(name.ljust(10) + row + "   " + str(sorted(rep.converged)))
    if args.plot:
        plot(traces, s, args.plot)
        print(f"wrote {args.plot}")


if __name__ == "__main__":
    main()
