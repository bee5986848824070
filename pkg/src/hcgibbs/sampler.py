"""Sampling of tree configurations driven by the windowed spin chain.

A configuration on the rooted Cayley tree is drawn top down: the root spin
comes from the stationary distribution, and every child spin from the
transition-matrix row of its parent's spin.  Because the root law is
stationary, the marginal at every vertex is the same distribution, which
gives a sharp statistical target for tests.

Randomness comes from a counter-based generator (Philox) keyed by the tree
seed.  The stream-split rule is: the vertex with breadth-first index v
consumes variate number v of the keyed stream.  Any worker can therefore
reproduce any subtree independently, and samples are bit-identical for a
fixed seed regardless of thread count.  The tail aggregate is sampled as
the literal symbol "TAIL" and kept unresolved; every unlisted spin behaves
identically, so statistics treat the aggregate as one state.

A brute-force finite-volume oracle enumerates all admissible configurations
on tiny trees and returns their exact probabilities, for cross-checking
conditionals and normalization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .chain import (
    TAIL,
    StationaryDistribution,
    TransitionMatrix,
    minimal_window,
    stationary_closed_form,
    transition_matrix,
)
from .errors import InputError, TooLarge
from .model import ActivitySpec, AdmissibilityGraph, BoundaryLawSolution

_KEY_SPACE = 1 << 128

# enumeration caps for the brute-force oracle
_MAX_SYMBOLS = 6
_MAX_DEPTH = 2
_MAX_VERTICES = 10


def num_vertices(k: int, depth: int) -> int:
    """Vertices of the rooted Cayley tree: root plus k+1 branches of depth n."""
    if isinstance(depth, bool) or not isinstance(depth, int) or depth < 0:
        raise InputError(f"depth must be an integer >= 0, got {depth!r}")
    if k == 1:
        return 1 + 2 * depth
    return 1 + (k + 1) * (k**depth - 1) // (k - 1)


def level_sizes(k: int, depth: int) -> list[int]:
    """Vertex counts per level: 1 at the root, then (k+1)*k**(d-1)."""
    sizes = [1]
    for d in range(1, depth + 1):
        sizes.append((k + 1) * k ** (d - 1))
    return sizes


def parent_array(k: int, depth: int) -> np.ndarray:
    """Breadth-first parent index of every vertex; the root gets -1.

    The root's children occupy indices 1..k+1; below that, the i-th vertex
    of a level (0-based) is the parent of positions k*i..k*i+k-1 of the
    next level.
    """
    sizes = level_sizes(k, depth)
    parents = np.full(num_vertices(k, depth), -1, dtype=np.int64)
    offset = 1
    prev_offset = 0
    for d in range(1, depth + 1):
        size = sizes[d]
        within = np.arange(size)
        parents[offset : offset + size] = prev_offset + (0 if d == 1 else within // k)
        prev_offset = offset
        offset += size
    return parents


def level_slices(k: int, depth: int) -> list[slice]:
    """Breadth-first index ranges of each level."""
    sizes = level_sizes(k, depth)
    out = []
    offset = 0
    for size in sizes:
        out.append(slice(offset, offset + size))
        offset += size
    return out


@dataclass(frozen=True)
class TreeSample:
    """One sampled configuration, spins in breadth-first vertex order."""

    depth: int
    seed: int
    spins: tuple
    k: int = 2

    def __post_init__(self) -> None:
        object.__setattr__(self, "spins", tuple(self.spins))
        want = num_vertices(self.k, self.depth)
        if len(self.spins) != want:
            raise InputError(
                f"depth {self.depth} on a tree of order {self.k} needs {want} spins, "
                f"got {len(self.spins)}"
            )
        for s in self.spins:
            if s != TAIL and (isinstance(s, bool) or not isinstance(s, int)):
                raise InputError(f"spin {s!r} is neither an integer nor {TAIL!r}")

    def to_json_dict(self) -> dict:
        return {"depth": self.depth, "seed": self.seed, "spins": list(self.spins)}


def tree_sample_from_json(data: dict, k: int = 2) -> TreeSample:
    if not isinstance(data, dict) or not {"depth", "seed", "spins"} <= set(data):
        raise InputError('tree sample JSON needs keys "depth", "seed", "spins"')
    return TreeSample(data["depth"], data["seed"], tuple(data["spins"]), k=k)


class _Kernel:
    """Cumulative-row form of (X, P) for inverse-CDF sampling."""

    def __init__(
        self,
        solution: BoundaryLawSolution,
        spec: ActivitySpec,
        graph: AdmissibilityGraph,
        window: int | None,
    ) -> None:
        if window is None:
            window = minimal_window(spec)
        self.matrix = transition_matrix(solution, spec, graph, window)
        self.stationary = stationary_closed_form(solution, spec, graph, window)
        self.states = self.matrix.states
        self.k = spec.k
        self.cum_rows = np.cumsum(self.matrix.matrix, axis=1)
        self.cum_root = np.cumsum(self.stationary.probabilities)

    def draw_root(self, u: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(self.cum_root, u, side="right")
        return np.minimum(idx, len(self.states) - 1)

    def draw_children(self, parent_idx: np.ndarray, u: np.ndarray) -> np.ndarray:
        rows = self.cum_rows[parent_idx]
        idx = (rows <= u[:, None]).sum(axis=1)
        return np.minimum(idx, len(self.states) - 1)


def _stream(seed, count: int) -> np.ndarray:
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)):
        raise InputError(f"seed must be an integer, got {seed!r}")
    gen = np.random.Generator(np.random.Philox(key=int(seed) % _KEY_SPACE))
    return gen.random(count)


def _sample_indices(kernel: _Kernel, depth: int, seed) -> np.ndarray:
    n = num_vertices(kernel.k, depth)
    u = _stream(seed, n)
    spins_idx = np.empty(n, dtype=np.int64)
    spins_idx[0] = kernel.draw_root(u[:1])[0]
    parents = parent_array(kernel.k, depth)
    for sl in level_slices(kernel.k, depth)[1:]:
        spins_idx[sl] = kernel.draw_children(spins_idx[parents[sl]], u[sl])
    return spins_idx


def sample_tree(
    solution: BoundaryLawSolution,
    spec: ActivitySpec,
    graph: AdmissibilityGraph,
    depth: int,
    seed: int,
    window: int | None = None,
) -> TreeSample:
    """Draw one configuration of the given depth, deterministically in seed."""
    kernel = _Kernel(solution, spec, graph, window)
    idx = _sample_indices(kernel, depth, seed)
    spins = tuple(kernel.states[i] for i in idx)
    return TreeSample(depth, int(seed), spins, k=kernel.k)


def sample_forest(
    solution: BoundaryLawSolution,
    spec: ActivitySpec,
    graph: AdmissibilityGraph,
    depth: int,
    trees: int,
    seed: int,
    window: int | None = None,
) -> tuple[TreeSample, ...]:
    """Draw independent trees; tree t is reproducible from its own seed.

    Per-tree seeds are spawned deterministically from the forest seed, so
    trees can be sampled concurrently without sharing generator state.
    """
    if isinstance(trees, bool) or not isinstance(trees, int) or trees < 1:
        raise InputError(f"need at least one tree, got {trees!r}")
    kernel = _Kernel(solution, spec, graph, window)
    tree_seeds = np.random.SeedSequence(int(seed) % _KEY_SPACE).generate_state(trees, np.uint64)
    out = []
    for t in range(trees):
        idx = _sample_indices(kernel, depth, int(tree_seeds[t]))
        spins = tuple(kernel.states[i] for i in idx)
        out.append(TreeSample(depth, int(tree_seeds[t]), spins, k=kernel.k))
    return tuple(out)


def _spin_adjacent(graph: AdmissibilityGraph, a, b) -> bool:
    """Adjacency extended to the tail symbol, which acts as a non-loop spin."""
    if a == 0 or b == 0:
        return True
    if a == b and a != TAIL and a in graph.loops:
        return True
    return False


def edge_admissibility(sample: TreeSample, graph: AdmissibilityGraph) -> float:
    """Fraction of tree edges whose endpoint spins are admissible."""
    parents = parent_array(sample.k, sample.depth)
    edges = len(parents) - 1
    if edges == 0:
        return 1.0
    good = sum(
        _spin_adjacent(graph, sample.spins[parents[v]], sample.spins[v])
        for v in range(1, len(parents))
    )
    return good / edges


def _count_spins(counter: dict, spins) -> None:
    for s in spins:
        counter[s] = counter.get(s, 0) + 1


def level_counts(samples, level: int) -> dict:
    """Spin counts over the vertices at one depth level of every sample."""
    if not samples:
        raise InputError("no samples")
    counts: dict = {}
    seen = 0
    for sample in samples:
        if level > sample.depth:
            continue
        sl = level_slices(sample.k, sample.depth)[level]
        _count_spins(counts, sample.spins[sl])
        seen += 1
    if seen == 0:
        raise InputError(f"no sample reaches level {level}")
    return counts


def empirical_marginal(samples) -> dict:
    """Relative spin frequencies over all vertices of all samples."""
    if not samples:
        raise InputError("no samples")
    counts: dict = {}
    for sample in samples:
        _count_spins(counts, sample.spins)
    total = sum(counts.values())
    return {lab: c / total for lab, c in counts.items()}


def _as_marginal(dist) -> dict:
    if isinstance(dist, StationaryDistribution):
        return {lab: float(p) for lab, p in zip(dist.states, dist.probabilities)}
    if isinstance(dist, dict):
        return dist
    raise InputError(f"expected a distribution or mapping, got {type(dist).__name__}")


def marginal_tv(empirical: dict, dist) -> float:
    """Total variation between a frequency mapping and a distribution."""
    target = _as_marginal(dist)
    labels = set(empirical) | set(target)
    return 0.5 * sum(abs(empirical.get(lab, 0.0) - target.get(lab, 0.0)) for lab in labels)


def _oracle_alphabet(spec: ActivitySpec) -> tuple[list, dict]:
    """Spin alphabet and activity table for brute-force enumeration."""
    activity = {0: 1.0}
    for lab, lam in sorted(spec.listed().items()):
        activity[lab] = lam
    alphabet = list(activity)
    if spec.tail_mass > 0.0:
        alphabet.append(TAIL)
        activity[TAIL] = spec.tail_mass
    if len(alphabet) > _MAX_SYMBOLS:
        raise TooLarge(f"alphabet of {len(alphabet)} symbols exceeds the cap of {_MAX_SYMBOLS}")
    return alphabet, activity


def finite_gibbs_oracle(
    spec: ActivitySpec,
    graph: AdmissibilityGraph,
    depth: int,
    boundary: dict | None = None,
) -> dict:
    """Exact configuration probabilities on a tiny tree, by enumeration.

    The alphabet is the hub plus every listed spin, plus the tail symbol
    when unlisted mass is present (one symbol of activity tail_mass).  The
    probability of an admissible configuration is proportional to the
    product of its activities; inadmissible ones are dropped.  boundary
    optionally pins leaf vertices (breadth-first indices at the last level)
    to fixed spins.  Raises TooLarge beyond the enumeration caps.
    """
    alphabet, activity = _oracle_alphabet(spec)
    if isinstance(depth, bool) or not isinstance(depth, int) or depth < 0:
        raise InputError(f"depth must be an integer >= 0, got {depth!r}")
    if depth > _MAX_DEPTH:
        raise TooLarge(f"depth {depth} exceeds the enumeration cap of {_MAX_DEPTH}")
    n = num_vertices(spec.k, depth)
    if n > _MAX_VERTICES:
        raise TooLarge(f"{n} vertices exceed the enumeration cap of {_MAX_VERTICES}")
    parents = parent_array(spec.k, depth)
    leaf_start = level_slices(spec.k, depth)[depth].start

    pinned: dict[int, object] = {}
    if boundary:
        for v, s in boundary.items():
            if not isinstance(v, int) or not leaf_start <= v < n:
                raise InputError(f"boundary vertex {v!r} is not a leaf index")
            if s not in alphabet:
                raise InputError(f"boundary spin {s!r} is not in the alphabet")
            pinned[v] = s

    table: dict[tuple, float] = {}
    config: list = [None] * n

    def assign(v: int, weight: float) -> None:
        if v == n:
            table[tuple(config)] = weight
            return
        options = (pinned[v],) if v in pinned else alphabet
        parent_spin = config[parents[v]] if v > 0 else None
        for s in options:
            if v > 0 and not _spin_adjacent(graph, parent_spin, s):
                continue
            config[v] = s
            assign(v + 1, weight * activity[s])
        config[v] = None

    assign(0, 1.0)
    total = sum(table.values())
    if not total > 0.0:
        raise InputError("no admissible configuration under the given boundary")
    return {cfg: w / total for cfg, w in table.items()}


def single_site_conditional(spec: ActivitySpec, graph: AdmissibilityGraph, neighbor_spins) -> dict:
    """Distribution of one spin given its neighbours' spins.

    The weight of candidate i is its activity times the product of
    adjacency indicators with each neighbour, renormalized.  The hub is
    adjacent to everything, so the conditional always exists.
    """
    alphabet, activity = _oracle_alphabet(spec)
    neighbors = list(neighbor_spins)
    for s in neighbors:
        if s not in alphabet:
            raise InputError(f"neighbour spin {s!r} is not in the alphabet")
    weights = {}
    for i in alphabet:
        if all(_spin_adjacent(graph, i, s) for s in neighbors):
            weights[i] = activity[i]
    total = sum(weights.values())
    return {i: w / total for i, w in weights.items()}


@dataclass(frozen=True)
class ConditionalRow:
    """TV gap for one observed neighbourhood pattern."""

    pattern: tuple
    count: int
    tv: float


@dataclass(frozen=True)
class ConditionalReport:
    """Sampled root-given-children conditionals versus the single-site law.

    One row per observed children pattern; tv is the total variation
    between the chain's empirical conditional and the activity-weighted
    single-site conditional.  Reported as-is, no pass/fail judgement.
    """

    trials: int
    rows: tuple

    def format(self) -> str:
        lines = [f"trials: {self.trials}"]
        for row in self.rows:
            pat = ",".join(str(s) for s in row.pattern)
            lines.append(f"children ({pat}): n={row.count} tv={row.tv:.3f}")
        return "\n".join(lines)

    def to_json_dict(self) -> dict:
        return {
            "trials": self.trials,
            "rows": [
                {"pattern": list(r.pattern), "count": r.count, "tv": r.tv} for r in self.rows
            ],
        }


def _pattern_key(spins) -> tuple:
    return tuple(sorted(spins, key=lambda s: (s == TAIL, s if s != TAIL else 0)))


def conditional_diagnostic(
    solution: BoundaryLawSolution,
    spec: ActivitySpec,
    graph: AdmissibilityGraph,
    trials: int = 10_000,
    seed: int = 0,
    window: int | None = None,
) -> ConditionalReport:
    """Measure how the chain's root conditional differs from the Gibbs one.

    Draws many depth-1 stars with a single batched stream (this diagnostic
    has no per-vertex reproducibility contract), groups them by the
    multiset of children spins, and reports one TV row per pattern.
    """
    if isinstance(trials, bool) or not isinstance(trials, int) or trials < 1:
        raise InputError(f"trials must be a positive integer, got {trials!r}")
    kernel = _Kernel(solution, spec, graph, window)
    fanout = kernel.k + 1
    u = _stream(seed, trials * (fanout + 1)).reshape(trials, fanout + 1)
    roots = kernel.draw_root(u[:, 0])
    children = np.empty((trials, fanout), dtype=np.int64)
    for c in range(fanout):
        children[:, c] = kernel.draw_children(roots, u[:, c + 1])

    by_pattern: dict[tuple, dict] = {}
    for t in range(trials):
        pat = _pattern_key(kernel.states[i] for i in children[t])
        root_counts = by_pattern.setdefault(pat, {})
        root_spin = kernel.states[roots[t]]
        root_counts[root_spin] = root_counts.get(root_spin, 0) + 1

    rows = []
    for pat, root_counts in by_pattern.items():
        count = sum(root_counts.values())
        empirical = {lab: c / count for lab, c in root_counts.items()}
        target = single_site_conditional(spec, graph, pat)
        rows.append(ConditionalRow(pat, count, marginal_tv(empirical, target)))
    rows.sort(key=lambda r: -r.count)
    return ConditionalReport(trials, tuple(rows))
