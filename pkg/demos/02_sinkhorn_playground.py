#!/usr/bin/env python3
"""Small transport problems, solved and inspected.

Shows the coupling for a hand-sized cost matrix, the zero-cost closed form,
how the entropy weight trades sharpness against smoothing, and what happens
to inactive classes.
"""

import numpy as np

from logo import ClassPrior, SinkhornConfig, assign_labels, sinkhorn_solve, transport_cost
from logo.transport import CostMatrix

np.set_printoptions(precision=4, suppress=True)

# four samples, two classes, an obvious best assignment
cost = CostMatrix(
    values=np.array([
        [0.1, 1.8],
        [0.2, 1.5],
        [1.7, 0.3],
        [1.9, 0.2],
    ]),
    column_active=np.array([True, True]),
)
prior = ClassPrior(np.array([0.5, 0.5]))
plan = sinkhorn_solve(cost, prior, SinkhornConfig(lam=0.05))
print("cost matrix:\n", cost.values)
print("coupling (rows sum to 1/4, columns to the prior):\n", plan.plan)
print("assigned labels:", assign_labels(plan).labels.tolist())
print("row sums:", plan.plan.sum(axis=1), " column sums:", plan.plan.sum(axis=0))

# zero cost: nothing to optimize, the coupling factorizes into r c^T
zero = CostMatrix(values=np.zeros((3, 2)), column_active=np.array([True, True]))
skewed = ClassPrior(np.array([0.8, 0.2]))
print("\nzero-cost coupling (outer product of the marginals):")
print(sinkhorn_solve(zero, skewed, SinkhornConfig()).plan)

# entropy weight: small lambda hugs the LP vertex, large lambda smooths
print("\nlambda sweep on a random 6x3 instance:")
rng = np.random.default_rng(0)
inst = CostMatrix(values=rng.uniform(0, 2, (6, 3)), column_active=np.ones(3, bool))
weights = rng.uniform(0.2, 1.0, 3)
inst_prior = ClassPrior(weights / weights.sum())
for lam in (0.005, 0.05, 0.5):
    p = sinkhorn_solve(inst, inst_prior, SinkhornConfig(lam=lam, max_iters=50_000, tol=1e-9))
    print(f"  lambda={lam:<6} transport cost {transport_cost(p, inst):.4f} "
          f"({p.iterations} iterations)")

# classes with zero prior weight are dropped from the solve entirely
print("\ninactive class (zero prior weight) never receives mass:")
partial = ClassPrior(np.array([0.6, 0.0, 0.4]))
wide = CostMatrix(values=rng.uniform(0, 2, (5, 3)), column_active=np.ones(3, bool))
p = sinkhorn_solve(wide, partial, SinkhornConfig())
print("  active columns:", p.active_classes.tolist(),
      " labels:", assign_labels(p).labels.tolist())
