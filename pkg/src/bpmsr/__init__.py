"""Resilient leader-follower consensus with bootstrap-percolation gating (BP-MSR)."""

from .analysis import (ConvergenceReport, ConvergentSetBounds, classify_convergence,
                       contraction_check, convergent_set_bounds, convergent_set_lower,
                       convergent_set_upper)
from .engine import (ConsensusTrace, ExplicitInit, Scenario, UniformInit, run_comparison,
                     run_simulation)
from .graph_core import (Digraph, PeriodicSchedule, RoleAssignment, StaticSchedule,
                         TimelineSchedule, graph_at, in_neighbors, induced_subgraph,
                         is_f_local, out_neighbors)
from .percolation import AlwaysOne, AlwaysZero, RandomMonotone, run_bp, validate_strategy
from .protocols import (ConstantOutlier, ConstantSignal, PiecewiseRandomSignal, SelfBiased,
                        Sinusoid, Split, TableSignal, Uniform, msr_filter, wmsr_update)
from .robustness import (is_r_reachable, is_strongly_r_robust_bp,
                         is_strongly_r_robust_bruteforce, robust_follower_set)

__version__ = "0.1.0"
