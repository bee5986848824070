"""Domain types: activity specifications, admissibility graphs, solutions.

The model lives on the Cayley tree of order k.  Spin values are countable
(integers); the admissibility graph has a hub at 0 adjacent to every value,
a self-loop at 0, and self-loops at one or two nonzero values.  Activities
are positive reals; all but finitely many are unlisted and only enter
through their aggregate mass.

All types are frozen dataclasses and safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import DivergentActivities, InputError

_SCHEMA_KEYS = {"k", "loops", "tail", "tail_mass", "divergent"}


def _check_activity(label: int, value: float) -> float:
    if isinstance(label, bool) or not isinstance(label, int):
        raise InputError(f"spin label {label!r} is not an integer")
    if label == 0:
        raise InputError("spin label 0 carries the hub; it cannot be listed")
    value = float(value)
    if not math.isfinite(value) or value <= 0.0:
        raise InputError(f"activity at {label} must be positive and finite, got {value!r}")
    return value


@dataclass(frozen=True)
class ActivitySpec:
    """Activity assignment: loop activities, listed tail states, tail mass.

    loop_activities maps each self-loop vertex to its activity.
    explicit_tail maps individually listed non-loop vertices to activities.
    tail_mass is the aggregate activity of all remaining unlisted vertices.
    divergent=True declares an infinite total activity (the tail sum does
    not converge); finite fields are then ignored by the solvers.
    """

    loop_activities: dict[int, float]
    explicit_tail: dict[int, float] = field(default_factory=dict)
    tail_mass: float = 0.0
    k: int = 2
    divergent: bool = False

    def __post_init__(self) -> None:
        if isinstance(self.k, bool) or not isinstance(self.k, int) or self.k < 1:
            raise InputError(f"tree order k must be an integer >= 1, got {self.k!r}")
        loops = {lab: _check_activity(lab, val) for lab, val in self.loop_activities.items()}
        tail = {lab: _check_activity(lab, val) for lab, val in self.explicit_tail.items()}
        if not loops:
            raise InputError("at least one nonzero loop vertex is required")
        overlap = set(loops) & set(tail)
        if overlap:
            raise InputError(f"labels {sorted(overlap)} appear as both loop and tail states")
        mass = float(self.tail_mass)
        if not math.isfinite(mass) or mass < 0.0:
            raise InputError(f"tail_mass must be finite and >= 0, got {self.tail_mass!r}")
        if not isinstance(self.divergent, bool):
            raise InputError("divergent must be a boolean")
        object.__setattr__(self, "loop_activities", loops)
        object.__setattr__(self, "explicit_tail", tail)
        object.__setattr__(self, "tail_mass", mass)

    def listed(self) -> dict[int, float]:
        """All individually listed activities (loops first, then tail states)."""
        out = dict(self.loop_activities)
        out.update(self.explicit_tail)
        return out

    def total_activity(self) -> float:
        return total_activity(self)


def total_activity(spec: ActivitySpec) -> float:
    """Total activity over all nonzero spin values; +inf when divergent."""
    if spec.divergent:
        return math.inf
    return sum(spec.loop_activities.values()) + sum(spec.explicit_tail.values()) + spec.tail_mass


@dataclass(frozen=True)
class AdmissibilityGraph:
    """Which nonzero vertices carry self-loops.  The hub 0 is always adjacent
    to everything and always carries its own loop."""

    loops: tuple[int, ...]

    def __post_init__(self) -> None:
        loops = tuple(sorted(self.loops))
        if not 1 <= len(loops) <= 2:
            raise InputError(f"need one or two nonzero loop vertices, got {len(loops)}")
        if len(set(loops)) != len(loops):
            raise InputError("loop vertices must be distinct")
        for lab in loops:
            if isinstance(lab, bool) or not isinstance(lab, int) or lab == 0:
                raise InputError(f"loop vertex {lab!r} must be a nonzero integer")
        object.__setattr__(self, "loops", loops)

    def adjacency(self, i: int, j: int) -> int:
        """0/1 adjacency between spin values, self-loops on the diagonal."""
        if i == 0 or j == 0:
            return 1
        if i == j:
            return 1 if i in self.loops else 0
        return 0


def adjacency(graph: AdmissibilityGraph, i: int, j: int) -> int:
    return graph.adjacency(i, j)


def graph_from_spec(spec: ActivitySpec) -> AdmissibilityGraph:
    return AdmissibilityGraph(tuple(spec.loop_activities))


def check_spec_graph(spec: ActivitySpec, graph: AdmissibilityGraph) -> None:
    """Raise unless the spec's loop set and the graph's loop set agree."""
    if set(spec.loop_activities) != set(graph.loops):
        raise InputError(
            f"spec loops {sorted(spec.loop_activities)} do not match graph loops {sorted(graph.loops)}"
        )


@dataclass(frozen=True)
class BoundaryLawSolution:
    """One translation-invariant boundary law in reduced coordinates.

    A is the aggregate sum of the boundary law over nonzero values, loop_z
    holds the per-loop-vertex components, branch names the solution branch,
    and residual is the max absolute defect of the reduced consistency
    system at this point.
    """

    A: float
    loop_z: dict[int, float]
    branch: str
    residual: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "loop_z", dict(self.loop_z))

    def to_json_dict(self) -> dict:
        return {
            "A": self.A,
            "z": {str(lab): val for lab, val in sorted(self.loop_z.items())},
            "branch": self.branch,
            "residual": self.residual,
        }


def relabel_solution(solution: BoundaryLawSolution, graph: AdmissibilityGraph) -> BoundaryLawSolution:
    """Map canonical loop labels (1, or 1 and 2) onto the graph's actual labels.

    Solvers emit canonical labels; when the graph's loops sit elsewhere the
    i-th canonical label maps to the i-th smallest actual label.  A solution
    already carrying the graph's labels passes through unchanged.
    """
    if set(solution.loop_z) == set(graph.loops):
        return solution
    canonical = tuple(range(1, len(graph.loops) + 1))
    if set(solution.loop_z) != set(canonical):
        raise InputError(
            f"solution labels {sorted(solution.loop_z)} match neither the graph loops "
            f"{sorted(graph.loops)} nor the canonical labels {list(canonical)}"
        )
    mapping = dict(zip(canonical, graph.loops))
    z = {mapping[lab]: val for lab, val in solution.loop_z.items()}
    return BoundaryLawSolution(solution.A, z, solution.branch, solution.residual)


@dataclass(frozen=True)
class RegimeReport:
    """Classification of one parameter point: thresholds, solution count, case.

    Lambda1/Lambda2 are None when the regime has no such threshold (single
    nonzero loop, or divergent input).  count is the number of
    translation-invariant Gibbs measures; case_label names the regime.
    """

    lam: float | None
    Lambda: float | None
    Lambda1: float | None
    Lambda2: float | None
    count: int
    case_label: str

    def to_json_dict(self) -> dict:
        return {
            "lambda": self.lam,
            "Lambda": self.Lambda,
            "Lambda1": self.Lambda1,
            "Lambda2": self.Lambda2,
            "count": self.count,
            "case": self.case_label,
        }


def spec_from_json(data: dict) -> ActivitySpec:
    """Build an ActivitySpec from its JSON dict form.

    Schema: {"k": 2, "loops": {"1": 5.0}, "tail": {"3": 0.5}, "tail_mass": 0.5,
    "divergent": false}.  "loops" is required, everything else has defaults.
    Map keys are decimal integer strings.
    """
    if not isinstance(data, dict):
        raise InputError("activity spec must be a JSON object")
    unknown = set(data) - _SCHEMA_KEYS
    if unknown:
        raise InputError(f"unknown keys in activity spec: {sorted(unknown)}")
    if "loops" not in data:
        raise InputError('activity spec needs a "loops" map')

    def parse_map(obj, name: str) -> dict[int, float]:
        if not isinstance(obj, dict):
            raise InputError(f'"{name}" must be a map of integer strings to numbers')
        out: dict[int, float] = {}
        for key, val in obj.items():
            try:
                lab = int(key)
            except (TypeError, ValueError):
                raise InputError(f'"{name}" key {key!r} is not a decimal integer string')
            if not isinstance(val, (int, float)) or isinstance(val, bool):
                raise InputError(f'"{name}" value for {key!r} is not a number')
            out[lab] = float(val)
        return out

    k = data.get("k", 2)
    divergent = data.get("divergent", False)
    tail_mass = data.get("tail_mass", 0.0)
    if not isinstance(tail_mass, (int, float)) or isinstance(tail_mass, bool):
        raise InputError('"tail_mass" must be a number')
    return ActivitySpec(
        loop_activities=parse_map(data["loops"], "loops"),
        explicit_tail=parse_map(data.get("tail", {}), "tail"),
        tail_mass=float(tail_mass),
        k=k,
        divergent=divergent,
    )


def spec_to_json(spec: ActivitySpec) -> dict:
    return {
        "k": spec.k,
        "loops": {str(lab): val for lab, val in sorted(spec.loop_activities.items())},
        "tail": {str(lab): val for lab, val in sorted(spec.explicit_tail.items())},
        "tail_mass": spec.tail_mass,
        "divergent": spec.divergent,
    }


def require_finite(spec: ActivitySpec) -> float:
    """Total activity of a spec that must be finite; raises otherwise."""
    Lambda = total_activity(spec)
    if not math.isfinite(Lambda):
        raise DivergentActivities("total activity diverges: no translation-invariant Gibbs measure")
    return Lambda
