"""Step-size and dual-set radius schedules for the solver."""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class StepSchedule:
    """Diminishing step size a_k = c1 / (c2 + k).

    Square summable but not summable, which is what the averaged-iterate
    guarantees need. c1 > 0 and c2 >= 1 keep a_0 finite and positive.
    """

    c1: float
    c2: float

    def __post_init__(self):
        if self.c1 <= 0:
            raise ValueError(f"step c1 must be positive, got {self.c1}")
        if self.c2 < 1:
            raise ValueError(f"step c2 must be >= 1, got {self.c2}")

    def step(self, k):
        if k < 0:
            raise ValueError(f"round index must be nonnegative, got {k}")
        return self.c1 / (self.c2 + k)

    def steps(self, rounds):
        """Vector of a_0 .. a_{rounds-1}."""
        return self.c1 / (self.c2 + np.arange(rounds, dtype=float))


@dataclass(frozen=True)
class DualSetSchedule:
    """Radius of the box the dual iterates are clamped into.

    Two modes:

    * "practical": radius(Z) = zeta_prime + vartheta * sqrt(Z), a growing
      ceiling that needs no knowledge of the problem's optimal value. Z is
      the running sum of step sizes.
    * "optimal_r": radius(Z) = zeta + r*(zeta, delta, Z) with the
      closed-form radius increment; delta is supplied by the caller as a
      constant or a callable of Z (it is defined by the accumulated error
      terms, which only the bounds evaluator knows).
    """

    mode: str = "practical"
    zeta_prime: float = 2.0
    vartheta: float = 2.0
    zeta: float = 0.0
    delta: object = None  # float or callable Z -> delta, for optimal_r mode

    def __post_init__(self):
        if self.mode not in ("practical", "optimal_r"):
            raise ValueError(f"unknown dual schedule mode {self.mode!r}")
        if self.mode == "practical":
            if self.zeta_prime < 0 or self.vartheta < 0:
                raise ValueError("practical dual schedule needs zeta_prime >= 0 and vartheta >= 0")
        else:
            if self.zeta < 0:
                raise ValueError("optimal_r dual schedule needs zeta >= 0")
            if self.delta is None:
                raise ValueError("optimal_r dual schedule needs delta")

    def bound(self, step_sum):
        """Dual clamp value when the accumulated step mass is step_sum."""
        if step_sum < 0:
            raise ValueError("step sum must be nonnegative")
        if self.mode == "practical":
            return self.zeta_prime + self.vartheta * np.sqrt(step_sum)
        delta = self.delta(step_sum) if callable(self.delta) else float(self.delta)
        return self.zeta + optimal_radius(self.zeta, delta, step_sum)


def optimal_radius(zeta, delta, step_sum):
    """Closed-form dual-set radius increment r*.

    r* = (zeta + sqrt(2 zeta^2 + delta * Z)) / 2 with Z the accumulated
    step mass. Satisfies r* >= zeta / 2 and r* >= sqrt(delta * Z) / 2.
    """
    if delta < 0 or step_sum < 0:
        raise ValueError("delta and step sum must be nonnegative")
    return 0.5 * (zeta + np.sqrt(2.0 * zeta**2 + delta * step_sum))
