"""Translation-invariant boundary-law equations in reduced coordinates.

For a graph with self-loops at the hub 0 and at nonzero vertices i the
consistency system for a boundary law z (normalised so z_0 = 1) closes on
the loop components z_i and the aggregate A = sum over nonzero j of z_j:

    z_i = lambda_i * ((1 + z_i)/(1 + A))**k          (loop vertices)
    z_j = lambda_j / (1 + A)**k                      (every other vertex)
    A   = sum_i z_i + (Lambda - sum_i lambda_i)/(1 + A)**k

with Lambda the total activity.  Non-loop components are slaved to A, so
the reduced unknowns are (z_loops, A).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InputError
from .model import (
    ActivitySpec,
    AdmissibilityGraph,
    BoundaryLawSolution,
    check_spec_graph,
    require_finite,
)


@dataclass(frozen=True)
class ReducedSystem:
    """The closed (z_loops, A) system for one parameter point."""

    k: int
    loop_labels: tuple[int, ...]
    loop_lams: tuple[float, ...]
    Lambda: float

    @property
    def dim(self) -> int:
        return len(self.loop_labels) + 1

    @property
    def tail_lambda(self) -> float:
        """Aggregate activity of all non-loop vertices."""
        return self.Lambda - sum(self.loop_lams)

    def defect(self, z, A: float):
        """Residual vector (loop equations, then the aggregate identity)."""
        q = (1.0 + A) ** self.k
        out = [zi - lam * (1.0 + zi) ** self.k / q for zi, lam in zip(z, self.loop_lams)]
        out.append(A - math.fsum(z) - self.tail_lambda / q)
        return out

    def residual_at(self, z, A: float) -> float:
        return max(abs(r) for r in self.defect(z, A))

    def picard(self, z, A: float):
        """One step of the plain fixed-point map (z, A) -> F(z, A)."""
        q = (1.0 + A) ** self.k
        new_z = tuple(lam * (1.0 + zi) ** self.k / q for zi, lam in zip(z, self.loop_lams))
        new_A = math.fsum(z) + self.tail_lambda / q
        return new_z, new_A

    def jacobian(self, z, A: float) -> np.ndarray:
        """Analytic Jacobian of the defect with respect to (z_loops, A)."""
        m = len(self.loop_lams)
        k = self.k
        q = (1.0 + A) ** k
        J = np.zeros((m + 1, m + 1))
        for i, (zi, lam) in enumerate(zip(z, self.loop_lams)):
            J[i, i] = 1.0 - lam * k * (1.0 + zi) ** (k - 1) / q
            J[i, m] = lam * k * (1.0 + zi) ** k / (1.0 + A) ** (k + 1)
            J[m, i] = -1.0
        J[m, m] = 1.0 + k * self.tail_lambda / (1.0 + A) ** (k + 1)
        return J


def reduce(spec: ActivitySpec, graph: AdmissibilityGraph) -> ReducedSystem:
    """Collapse a spec onto the closed (z_loops, A) system.

    Raises DivergentActivities when the total activity is infinite.
    """
    check_spec_graph(spec, graph)
    Lambda = require_finite(spec)
    labels = graph.loops
    lams = tuple(spec.loop_activities[lab] for lab in labels)
    return ReducedSystem(k=spec.k, loop_labels=labels, loop_lams=lams, Lambda=Lambda)


def residual(spec: ActivitySpec, graph: AdmissibilityGraph, z: dict[int, float], A: float) -> float:
    """Max absolute defect of the full listed system at (z, A).

    z must contain every loop and every explicitly listed tail vertex.
    Unlisted vertices only enter through the aggregate identity.
    """
    system = reduce(spec, graph)
    if not (isinstance(A, (int, float)) and math.isfinite(A) and A > 0.0):
        raise InputError(f"aggregate A must be positive and finite, got {A!r}")
    missing = (set(graph.loops) | set(spec.explicit_tail)) - set(z)
    if missing:
        raise InputError(f"z is missing components for {sorted(missing)}")
    for lab, val in z.items():
        if not (isinstance(val, (int, float)) and math.isfinite(val) and val > 0.0):
            raise InputError(f"z[{lab}] must be positive and finite, got {val!r}")
    q = (1.0 + A) ** spec.k
    parts = [abs(r) for r in system.defect([z[lab] for lab in graph.loops], A)]
    for lab, lam in spec.explicit_tail.items():
        parts.append(abs(z[lab] - lam / q))
    return max(parts)


def expand(solution: BoundaryLawSolution, spec: ActivitySpec) -> tuple[dict[int, float], float]:
    """Recover every listed boundary-law component plus the unlisted tail mass.

    Returns (z, tail_z_mass): z covers loops and explicit tail vertices,
    tail_z_mass is the aggregate boundary-law mass of the unlisted states,
    tail_mass / (1 + A)**k.
    """
    require_finite(spec)
    if set(solution.loop_z) != set(spec.loop_activities):
        raise InputError(
            f"solution labels {sorted(solution.loop_z)} do not match spec loops "
            f"{sorted(spec.loop_activities)}"
        )
    q = (1.0 + solution.A) ** spec.k
    z = dict(solution.loop_z)
    for lab, lam in spec.explicit_tail.items():
        z[lab] = lam / q
    return z, spec.tail_mass / q


def normalisable(spec: ActivitySpec) -> bool:
    """Whether any translation-invariant Gibbs measure can exist at all."""
    return math.isfinite(spec.total_activity())
