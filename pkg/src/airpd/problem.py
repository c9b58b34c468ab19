"""Generic constrained convex problem container consumed by the solver.

A problem is

    minimize   f0(x)
    subject to f_i(x) <= 0,  i = 1..n_constraints
               x in X,

with X a simple set we can project onto. Each constraint is owned by one
device; the solver only ever needs all constraint values and all
constraint subgradients at the current iterate, so both are exposed
stacked (a vector and a Jacobian-like matrix of subgradients) rather
than as per-device callables.
"""

from dataclasses import dataclass, field
from typing import Callable

import numpy as np


@dataclass
class ProblemSpec:
    dimension: int
    n_constraints: int
    objective: Callable[[np.ndarray], float]
    objective_subgradient: Callable[[np.ndarray], np.ndarray]
    constraint_values: Callable[[np.ndarray], np.ndarray]      # (n_constraints,)
    constraint_subgradients: Callable[[np.ndarray], np.ndarray]  # (n_constraints, dimension)
    project: Callable[[np.ndarray], np.ndarray]
    init_lo: np.ndarray = None   # elementwise box the start point is drawn from
    init_hi: np.ndarray = None
    # optional reshaping of the box draw (e.g. tie one block of the start
    # to another); must return a point of X, it is applied after projection
    start_transform: Callable[[np.ndarray], np.ndarray] = None

    def __post_init__(self):
        if self.dimension <= 0 or self.n_constraints <= 0:
            raise ValueError("dimension and n_constraints must be positive")
        if self.init_lo is None:
            self.init_lo = np.zeros(self.dimension)
        if self.init_hi is None:
            self.init_hi = np.ones(self.dimension)
        self.init_lo = np.broadcast_to(np.asarray(self.init_lo, float), (self.dimension,)).copy()
        self.init_hi = np.broadcast_to(np.asarray(self.init_hi, float), (self.dimension,)).copy()
        if (self.init_hi < self.init_lo).any():
            raise ValueError("init box is empty (hi < lo somewhere)")

    def draw_start(self, rng):
        """Uniform draw from the init box, projected onto X."""
        x0 = self.project(rng.uniform(self.init_lo, self.init_hi))
        if self.start_transform is not None:
            x0 = self.start_transform(x0)
        return x0

    def violation(self, x):
        """Euclidean norm of the positive part of the constraint stack."""
        return float(np.linalg.norm(np.maximum(self.constraint_values(x), 0.0)))

    def drop_constraints(self, keep_mask):
        """Copy of the problem with only the masked constraints kept.

        Used when a device is excluded up front because it would almost
        never get its signal through the channel; its constraint simply
        leaves the problem.
        """
        keep_mask = np.asarray(keep_mask, dtype=bool)
        if keep_mask.shape != (self.n_constraints,):
            raise ValueError("keep mask has wrong shape")
        if keep_mask.all():
            return self
        if not keep_mask.any():
            raise ValueError("cannot drop every constraint")
        base_vals = self.constraint_values
        base_subg = self.constraint_subgradients
        return ProblemSpec(
            dimension=self.dimension,
            n_constraints=int(keep_mask.sum()),
            objective=self.objective,
            objective_subgradient=self.objective_subgradient,
            constraint_values=lambda x: base_vals(x)[keep_mask],
            constraint_subgradients=lambda x: base_subg(x)[keep_mask],
            project=self.project,
            init_lo=self.init_lo,
            init_hi=self.init_hi,
            start_transform=self.start_transform,
        )
