"""The SFM engine behind every split: exhaustive sweep vs min-norm point.

Minimizing f(X) - lam*w(X) over subsets is the workhorse subproblem.  Small
blocks are swept exhaustively; large ones go through the Fujishige-Wolfe
minimum-norm-point algorithm, whose fractional output rounds to the same
lattice-extreme minimizers.
"""

import numpy as np

from swfair import (
    SolverConfig,
    WeightVector,
    add_modular,
    greedy_vertex,
    min_norm_point,
    solve_sfm,
)
from swfair.experiment import ExperimentConfig, generate_instance

cfg = ExperimentConfig(seed=42)
source = generate_instance(10, cfg, rep_index=1)
n = source.ground.n
w = WeightVector.ones(source.ground)

lam = source.value(source.ground_mask) / n
objective = add_modular(source, lam * np.ones(n))
print("instance: %d users, %d bits, H(V) = %.3f, lam = %.4f"
      % (n, len(source.bit_ids), source.value(source.ground_mask), lam))

exhaustive = solve_sfm(objective, method="exhaustive")
min_norm = solve_sfm(objective, method="min_norm_point")
for res in (exhaustive, min_norm):
    print("%-15s min=%.6f  minimal={%s}  maximal={%s}  (%d oracle evals)" % (
        res.solver_used, res.min_value,
        ",".join(sorted(res.minimal_minimizer)),
        ",".join(sorted(res.maximal_minimizer)), res.oracle_evals))
assert min_norm.maximal_minimizer == exhaustive.maximal_minimizer

# The fractional min-norm point itself: negative coordinates mark the
# minimal minimizer, nonpositive ones the maximal minimizer.
x = min_norm_point(objective, SolverConfig())
print("\nmin-norm point:", np.round(x, 4))
print("sum(x) = f(V) check: %.6f vs %.6f" % (x.sum(),
                                             objective.value(source.ground_mask)))

# Greedy vertices are the extreme points the solvers move along.
print("\ntwo greedy vertices of the base polyhedron of H:")
for order in ([int(i) for i in range(n)], [int(i) for i in range(n - 1, -1, -1)]):
    v = greedy_vertex(source, order)
    print("  order %s...: %s" % (order[:4], np.round(v, 3)))
