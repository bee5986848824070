"""Transition kernels and stationary distributions of the spin chain.

A boundary-law solution (z, A) turns the model into a Markov chain on spin
values: from spin i the next spin j is drawn with probability proportional
to adjacency(i, j) * lambda_j * z_j, with lambda_0 = z_0 = 1.  Rows for
non-loop spins collapse to a unit step back to the hub 0, loop rows keep a
self-transition, and row 0 spreads over everything.

Software needs a finite state set, so the countably many unlisted spins are
folded into one aggregate super-state "TAIL" with activity tail_mass and
boundary-law weight tail_mass / (1+A)^k.  The folded chain is exactly the
chain of the finite model obtained by replacing the unlisted family with a
single non-loop spin of that activity; it has the same reduced system, the
same A, and every stochasticity and stationarity identity holds exactly
rather than up to truncation error.

The finite state set is the window -M..M plus TAIL.  Window states that
carry no listed activity have zero weight: they are displayed but never
entered, and their rows are the unit vector at 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .boundary_law import expand, residual
from .errors import InputError, NumericalFailure, ShapeMismatch, WindowTooSmall
from .model import (
    ActivitySpec,
    AdmissibilityGraph,
    BoundaryLawSolution,
    check_spec_graph,
    relabel_solution,
)

TAIL = "TAIL"

# a solution must close its own consistency system this well before we
# build a kernel from it
RESIDUAL_PRE_TOL = 1e-8


def state_labels(window: int) -> tuple:
    """Labels of the finite state set: -M..M then the tail aggregate."""
    return tuple(range(-window, window + 1)) + (TAIL,)


@dataclass(frozen=True, eq=False)
class TransitionMatrix:
    """Row-stochastic kernel on the windowed state set.

    states lists the labels in row/column order (-M..M then TAIL); active
    flags the states the chain actually visits (the hub, every listed spin,
    and TAIL when the unlisted mass is positive).
    """

    window: int
    states: tuple
    matrix: np.ndarray
    active: tuple

    def index(self, label) -> int:
        if label == TAIL:
            return 2 * self.window + 1
        if isinstance(label, bool) or not isinstance(label, int):
            raise InputError(f"state label {label!r} is not an integer or {TAIL!r}")
        if abs(label) > self.window:
            raise InputError(f"state label {label} lies outside the window {self.window}")
        return label + self.window

    def entry(self, i, j) -> float:
        return float(self.matrix[self.index(i), self.index(j)])

    def to_json_dict(self) -> dict:
        return {
            "window": self.window,
            "states": list(self.states),
            "matrix": [[float(v) for v in row] for row in self.matrix],
        }


@dataclass(frozen=True, eq=False)
class StationaryDistribution:
    """Probability vector over the windowed state set, X * P = X."""

    window: int
    states: tuple
    probabilities: np.ndarray

    def index(self, label) -> int:
        if label == TAIL:
            return 2 * self.window + 1
        return label + self.window

    def probability(self, label) -> float:
        return float(self.probabilities[self.index(label)])

    def to_json_dict(self) -> dict:
        return {
            "window": self.window,
            "states": list(self.states),
            "probabilities": [float(v) for v in self.probabilities],
        }


@dataclass(frozen=True)
class StationaryReport:
    """Outcome of checking X * P = X and the normalization of X."""

    max_residual: float
    sum_error: float
    passed: bool


def _window_weights(
    solution: BoundaryLawSolution,
    spec: ActivitySpec,
    graph: AdmissibilityGraph,
    window: int,
) -> tuple[dict[int, float], float]:
    """Per-state weights lambda*z over the window, plus the tail weight.

    Validates the window, the spec/graph pairing, and that the solution
    closes the consistency system before any kernel is built from it.
    """
    if isinstance(window, bool) or not isinstance(window, int) or window < 0:
        raise InputError(f"window must be an integer >= 0, got {window!r}")
    check_spec_graph(spec, graph)
    solution = relabel_solution(solution, graph)
    z, tail_z = expand(solution, spec)
    res = residual(spec, graph, z, solution.A)
    if not res < RESIDUAL_PRE_TOL:
        raise InputError(
            f"solution residual {res:.3e} exceeds {RESIDUAL_PRE_TOL:.0e}; refusing to build a kernel"
        )
    listed = spec.listed()
    outside = sorted(lab for lab in listed if abs(lab) > window)
    if outside:
        raise WindowTooSmall(f"listed states {outside} lie outside the window {window}")
    weights = {lab: listed[lab] * z[lab] for lab in listed}
    return weights, spec.tail_mass * tail_z


def transition_matrix(
    solution: BoundaryLawSolution,
    spec: ActivitySpec,
    graph: AdmissibilityGraph,
    window: int,
) -> TransitionMatrix:
    """Build the windowed kernel for one boundary-law solution.

    Row 0 is proportional to (1, weights, tail weight); each loop row splits
    between staying put and returning to 0; every other row steps to 0 with
    probability one.  Each row sums to 1 to the last bit: row 0 is divided
    by its own sum and two-entry rows are completed by subtraction.
    """
    weights, w_tail = _window_weights(solution, spec, graph, window)
    n = 2 * window + 2
    hub = window  # row/column index of spin 0
    P = np.zeros((n, n))
    P[:, hub] = 1.0

    row0 = np.zeros(n)
    row0[hub] = 1.0
    for lab, w in weights.items():
        row0[lab + hub] = w
    row0[n - 1] = w_tail
    # summing in label order keeps the kernel bit-identical across windows
    # (np.sum would regroup the additions as the row length changes)
    P[hub] = row0 / (1.0 + sum(weights.values()) + w_tail)

    for lab in graph.loops:
        stay = weights[lab] / (1.0 + weights[lab])
        P[lab + hub, lab + hub] = stay
        P[lab + hub, hub] = 1.0 - stay

    active = np.zeros(n, dtype=bool)
    active[hub] = True
    for lab in weights:
        active[lab + hub] = True
    active[n - 1] = spec.tail_mass > 0.0
    return TransitionMatrix(window, state_labels(window), P, tuple(bool(a) for a in active))


def minimal_window(spec: ActivitySpec) -> int:
    """Smallest window covering every listed spin."""
    return max(abs(lab) for lab in spec.listed())


def stationary_closed_form(
    solution: BoundaryLawSolution,
    spec: ActivitySpec,
    graph: AdmissibilityGraph,
    window: int | None = None,
) -> StationaryDistribution:
    """Stationary vector of the windowed kernel, in closed form.

    With per-state weights w = lambda*z and S their sum over nonzero spins,
    the stationary mass is (1+S)/d at the hub, (w^2+w)/d at a loop spin and
    w/d elsewhere, where d = 1 + sum of loop w^2 + 2S.  The formulas do not
    depend on the window, so enlarging it only appends zero entries.
    """
    if window is None:
        window = minimal_window(spec)
    weights, w_tail = _window_weights(solution, spec, graph, window)
    S = sum(weights.values()) + w_tail
    denom = 1.0 + sum(weights[lab] ** 2 for lab in graph.loops) + 2.0 * S
    n = 2 * window + 2
    hub = window
    x = np.zeros(n)
    x[hub] = (1.0 + S) / denom
    for lab, w in weights.items():
        if lab in graph.loops:
            x[lab + hub] = (w * w + w) / denom
        else:
            x[lab + hub] = w / denom
    x[n - 1] = w_tail / denom
    return StationaryDistribution(window, state_labels(window), x)


def _as_matrix(P) -> np.ndarray:
    if isinstance(P, TransitionMatrix):
        return P.matrix
    arr = np.asarray(P, dtype=float)
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ShapeMismatch(f"transition matrix must be square, got shape {arr.shape}")
    return arr


def _as_vector(X) -> np.ndarray:
    if isinstance(X, StationaryDistribution):
        return X.probabilities
    arr = np.asarray(X, dtype=float)
    if arr.ndim != 1:
        raise ShapeMismatch(f"distribution must be a vector, got shape {arr.shape}")
    return arr


def verify_stationary(X, P, tol: float = 1e-10) -> StationaryReport:
    """Check that X is stationary for P and normalized, within tol.

    X may be a StationaryDistribution or a plain vector; P a
    TransitionMatrix or a plain square array.  When both carry state sets
    they must agree.
    """
    x = _as_vector(X)
    m = _as_matrix(P)
    if isinstance(X, StationaryDistribution) and isinstance(P, TransitionMatrix):
        if X.states != P.states:
            raise ShapeMismatch("distribution and matrix are on different state sets")
    if x.shape[0] != m.shape[0]:
        raise ShapeMismatch(
            f"distribution has {x.shape[0]} entries but the matrix has {m.shape[0]} states"
        )
    max_residual = float(np.max(np.abs(x @ m - x)))
    sum_error = float(abs(x.sum() - 1.0))
    passed = bool(max_residual <= tol and sum_error <= tol)
    return StationaryReport(max_residual, sum_error, passed)


def irreducible(P) -> bool:
    """Whether the chain restricted to its active states is one class.

    For a TransitionMatrix the active flags select the states the chain can
    occupy (dead window states are padding, not part of the chain); a plain
    array is taken at face value, every state counted.  True iff the
    directed graph of positive entries is strongly connected.
    """
    m = _as_matrix(P)
    if isinstance(P, TransitionMatrix):
        keep = np.asarray(P.active, dtype=bool)
        m = m[np.ix_(keep, keep)]
    if m.shape[0] == 0:
        raise InputError("empty state set")
    pattern = csr_matrix(m > 0.0)
    n_comp, _ = connected_components(pattern, directed=True, connection="strong")
    return bool(n_comp == 1)


def power_iteration(P, start=None, tol: float = 1e-12, max_iter: int = 10_000):
    """Iterate x <- x * P until successive total variation falls below tol.

    Returns (probabilities, iterations).  The default start is uniform; a
    supplied start is normalized.  Raises NumericalFailure when max_iter
    sweeps do not reach the tolerance.
    """
    m = _as_matrix(P)
    n = m.shape[0]
    if start is None:
        x = np.full(n, 1.0 / n)
    else:
        x = _as_vector(start).astype(float).copy()
        if x.shape[0] != n:
            raise ShapeMismatch(f"start has {x.shape[0]} entries for {n} states")
        if np.any(x < 0.0) or not x.sum() > 0.0:
            raise InputError("start vector must be nonnegative with positive mass")
        x /= x.sum()
    for it in range(1, max_iter + 1):
        y = x @ m
        if total_variation(y, x) < tol:
            return y, it
        x = y
    raise NumericalFailure(f"power iteration did not settle within {max_iter} sweeps")


def total_variation(u, v) -> float:
    """Total variation distance between two probability vectors."""
    a = _as_vector(u)
    b = _as_vector(v)
    if a.shape != b.shape:
        raise ShapeMismatch(f"vectors of length {a.shape[0]} and {b.shape[0]}")
    return float(0.5 * np.abs(a - b).sum())


def _fmt(value: float) -> str:
    return "%.17g" % value


def _label_str(label) -> str:
    return label if label == TAIL else str(label)


def matrix_to_csv(tm: TransitionMatrix) -> str:
    """CSV text: header of state labels, then one row per state."""
    lines = [",".join(_label_str(lab) for lab in tm.states)]
    for row in tm.matrix:
        lines.append(",".join(_fmt(v) for v in row))
    return "\n".join(lines) + "\n"


def distribution_to_csv(sd: StationaryDistribution) -> str:
    """CSV text: header of state labels, then the probability row."""
    lines = [",".join(_label_str(lab) for lab in sd.states)]
    lines.append(",".join(_fmt(v) for v in sd.probabilities))
    return "\n".join(lines) + "\n"
