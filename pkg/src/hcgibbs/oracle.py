"""Independent numerical solver: damped fixed-point multistart with Newton
confirmation.

This module never touches the closed-form branch algebra.  It iterates the
reduced consistency map directly, so agreement with the explicit solvers is
a genuine cross-check.  Repelling fixed points are invisible to damped
Picard iteration for every damping value; the multistart therefore accepts
hint points (e.g. closed-form solutions) which it confirms or rejects by
Newton's method on the residual system.  Discovery stays hint-free,
verification is hint-driven.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .boundary_law import ReducedSystem, reduce
from .errors import InputError
from .model import ActivitySpec, AdmissibilityGraph, BoundaryLawSolution

DAMPING_SCHEDULE = (1.0, 0.5, 0.3, 0.1)
STALL_WINDOW = 1500
STALL_FACTOR = 0.5

# Distinctness resolution at a symmetric branch point.  Exactly where the
# asymmetric solution family is born from the symmetric one, the defect is
# only cubically flat along the symmetry-breaking direction (quartically
# at the tangency of the two thresholds), so points far from the diagonal
# still pass the residual gate and Newton's method cannot pull them in
# (the Jacobian is singular there and float noise dominates the step,
# drifting even an exact symmetric start off the diagonal).  Observed
# satellite distances reach ~1e-3 at cubic branch points and ~2.3e-2 at
# the quartic tangency, while genuinely distinct asymmetric pairs away
# from the thresholds sit at least ~0.28 apart.  All mutually close
# clusters within this relative radius of the diagonal are merged and
# counted once; asymmetry below this radius is not certifiable in double
# precision.
PITCHFORK_TOL = 5e-2


@dataclass(frozen=True)
class FixedPointResult:
    """Outcome of one damped-iteration run.

    Converged runs report the accepted point and its residual; failed runs
    report the final iterate so callers can inspect where the orbit went.
    """

    converged: bool
    z: dict[int, float]
    A: float
    iterations: int
    residual: float


@dataclass(frozen=True)
class ClusterPoint:
    """Representative of one cluster of numerically confirmed fixed points."""

    z: dict[int, float]
    A: float
    residual: float
    members: int
    source: str  # "picard" or "hint"


@dataclass(frozen=True)
class MultistartResult:
    count: int
    representatives: tuple[ClusterPoint, ...]


def _batch_iterate(system: ReducedSystem, Z0: np.ndarray, A0: np.ndarray, damping: float,
                   max_iter: int, tol: float):
    """Damped Picard iteration on a batch of starts.

    The residual of the map comes for free from the map evaluation itself
    (defect = point minus image), so each iteration costs one map apply.
    Diverging starts are left to churn non-finite values harmlessly; the
    loop exits once every start has either converged (residual < tol) or
    stalled (best residual failed to halve over a 1500-iteration window,
    the signature of bounded oscillation or blow-up).  Returns
    (Z, A, converged_mask, iteration_counts, residuals) where converged
    rows carry their accepted point and its residual and the rest carry
    the final iterate.
    """
    lams = np.asarray(system.loop_lams)
    k = system.k
    tail = system.tail_lambda
    m = lams.size
    Z, A = Z0.astype(float).copy(), A0.astype(float).copy()

    def apply_map(Z, A):
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            q = (1.0 + A) ** k
            FZ = lams * (1.0 + Z) ** k / q[:, None]
            Zsum = Z[:, 0] if m == 1 else Z.sum(axis=1)
            FA = Zsum + tail / q
        return FZ, FA

    def defect(Z, A, FZ, FA):
        # the residual is a free by-product of the map: defect = point - image
        with np.errstate(invalid="ignore"):
            dz = np.abs(Z - FZ)
            dz = dz[:, 0] if m == 1 else dz.max(axis=1)
            return np.maximum(dz, np.abs(A - FA))

    FZ, FA = apply_map(Z, A)
    res = defect(Z, A, FZ, FA)
    converged = res < tol
    when = np.where(converged, 0, max_iter)
    Z_out, A_out, res_out = Z.copy(), A.copy(), res.copy()
    best = res.copy()
    mark = best.copy()
    stalled = converged.copy()  # resolved-one-way-or-another mask
    it = 0
    check = 8  # bookkeeping stride; detection delayed a few steps at most
    while it < max_iter and not stalled.all():
        it += 1
        Z = (1.0 - damping) * Z + damping * FZ
        A = (1.0 - damping) * A + damping * FA
        FZ, FA = apply_map(Z, A)
        if it % check and it != max_iter:
            continue
        res = defect(Z, A, FZ, FA)
        with np.errstate(invalid="ignore"):
            np.minimum(best, res, out=best)
            newly = (res < tol) & ~converged
            # NaN residual means the orbit left the domain for good (inf-inf
            # or inf/inf); an inf residual can still pull back, a NaN cannot
            stalled |= np.isnan(res)
        if newly.any():
            converged |= newly
            stalled |= newly
            when[newly] = it
            Z_out[newly] = Z[newly]
            A_out[newly] = A[newly]
            res_out[newly] = res[newly]
        if it % STALL_WINDOW < check:
            with np.errstate(invalid="ignore"):
                no_gain = ~(best <= STALL_FACTOR * mark)  # NaN counts as stalled
            stalled |= no_gain
            mark = best.copy()
    live = ~converged
    when[live] = np.minimum(when[live], it)
    res = defect(Z, A, FZ, FA)
    Z_out[live] = Z[live]
    A_out[live] = A[live]
    res_out[live] = res[live]
    return Z_out, A_out, converged, when, res_out


def fixed_point_iterate(spec: ActivitySpec, graph: AdmissibilityGraph, init: dict[int, float],
                        A_init: float, damping: float = 0.5, max_iter: int = 100_000,
                        tol: float = 1e-11) -> FixedPointResult:
    """Damped Picard iteration (z, A) <- (1-theta)(z, A) + theta F(z, A).

    init maps each loop vertex to a positive starting value; A_init starts
    the aggregate.  Non-convergence (blow-up, bounded oscillation, or an
    exhausted budget) is reported in the result, never raised.  An init
    that already solves the system returns with iterations == 0.
    """
    system = reduce(spec, graph)
    if not 0.0 < damping <= 1.0:
        raise InputError(f"damping must lie in (0, 1], got {damping}")
    missing = set(system.loop_labels) - set(init)
    if missing:
        raise InputError(f"init is missing loop components {sorted(missing)}")
    z0 = [float(init[lab]) for lab in system.loop_labels]
    if any(not (math.isfinite(v) and v > 0.0) for v in z0) or not (
            math.isfinite(A_init) and A_init > 0.0):
        raise InputError("init values and A_init must be positive and finite")
    Z, A, conv, when, best = _batch_iterate(
        system, np.array([z0]), np.array([float(A_init)]), damping, max_iter, tol)
    z = {lab: float(v) for lab, v in zip(system.loop_labels, Z[0])}
    return FixedPointResult(converged=bool(conv[0]), z=z, A=float(A[0]),
                            iterations=int(when[0]), residual=float(best[0]))


def newton_refine(system: ReducedSystem, z0, A0: float, tol: float = 1e-11,
                  max_iter: int = 50):
    """Newton's method on the residual system from (z0, A0).

    Returns (z, A, residual, converged); steps are halved as needed to keep
    every coordinate positive, and a singular Jacobian falls back to least
    squares.  The best point seen is returned.
    """
    m = len(system.loop_labels)
    v = np.array([*z0, A0], dtype=float)
    best_v = v.copy()
    best_r = math.inf
    for _ in range(max_iter):
        R = np.array(system.defect(v[:m], v[m]))
        r = float(np.abs(R).max())
        improving = r < 0.5 * best_r
        if r < best_r:
            best_r, best_v = r, v.copy()
        if best_r < tol and not improving:
            # below target and no longer gaining: polished as far as the
            # arithmetic allows (double roots converge linearly, so keep
            # stepping while each iteration still halves the residual)
            return best_v[:m], float(best_v[m]), best_r, True
        J = system.jacobian(v[:m], v[m])
        try:
            step = np.linalg.solve(J, R)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(J, R, rcond=None)[0]
        if not np.isfinite(step).all():
            break
        v_new = v - step
        halvings = 0
        while ((v_new <= 0.0).any() or not np.isfinite(v_new).all()) and halvings < 40:
            step *= 0.5
            v_new = v - step
            halvings += 1
        if halvings >= 40:
            break
        v = v_new
    R = np.array(system.defect(v[:m], v[m]))
    r = float(np.abs(R).max())
    if r < best_r:
        best_r, best_v = r, v.copy()
    return best_v[:m], float(best_v[m]), best_r, best_r < tol


def _normalise_hint(hint, labels) -> tuple[np.ndarray, float]:
    if isinstance(hint, BoundaryLawSolution):
        z_map, A = hint.loop_z, hint.A
    else:
        z_map, A = hint
    missing = set(labels) - set(z_map)
    if missing:
        raise InputError(f"hint is missing loop components {sorted(missing)}")
    return np.array([float(z_map[lab]) for lab in labels]), float(A)


def multistart_count(spec: ActivitySpec, graph: AdmissibilityGraph, n_starts: int = 100,
                     seed: int = 0, tol: float = 1e-11, max_iter: int = 100_000,
                     cluster_tol: float = 1e-6, hints=None) -> MultistartResult:
    """Count distinct fixed points of the reduced system by damped multistart.

    Starts are log-uniform over [1e-3, 1e3] per coordinate; with two loop
    vertices half the starts are symmetrised (z1 = z2) because the Picard
    map preserves that diagonal and some symmetric fixed points only
    attract within it.  Each start walks the damping schedule 1, 0.5, 0.3,
    0.1 until it converges.  Converged points are Newton-polished, hint
    points are Newton-confirmed (or rejected), and everything is clustered
    at relative tolerance cluster_tol.  Mutually close near-diagonal
    clusters are merged and counted once (branch-point degeneracy, see
    PITCHFORK_TOL).
    """
    if n_starts < 50:
        raise InputError(f"n_starts must be at least 50, got {n_starts}")
    system = reduce(spec, graph)
    labels = system.loop_labels
    m = len(labels)
    rng = np.random.default_rng(seed)
    Z0 = 10.0 ** rng.uniform(-3.0, 3.0, size=(n_starts, m))
    A0 = 10.0 ** rng.uniform(-3.0, 3.0, size=n_starts)
    if m == 2:
        Z0[n_starts // 2:, 1] = Z0[n_starts // 2:, 0]

    points: list[tuple[np.ndarray, float, float, str]] = []  # (z, A, residual, source)
    unresolved = np.arange(n_starts)
    for damping in DAMPING_SCHEDULE:
        if unresolved.size == 0:
            break
        Z, A, conv, _when, best = _batch_iterate(
            system, Z0[unresolved], A0[unresolved], damping, max_iter, tol)
        for i in np.flatnonzero(conv):
            points.append((Z[i].copy(), float(A[i]), float(best[i]), "picard"))
        unresolved = unresolved[~conv]

    polished: list[tuple[np.ndarray, float, float, str]] = []
    for z, A, r, source in points:
        zp, Ap, rp, ok = newton_refine(system, z, A, tol=tol)
        if ok and rp <= r:
            polished.append((np.asarray(zp), Ap, rp, source))
        else:
            polished.append((z, A, r, source))

    for hint in hints or []:
        z_h, A_h = _normalise_hint(hint, labels)
        starts = [(z_h, A_h)]
        for _ in range(3):
            jitter = 1.0 + 1e-4 * rng.standard_normal(m + 1)
            starts.append((z_h * jitter[:m], A_h * abs(jitter[m])))
        for z_s, A_s in starts:
            if (z_s <= 0.0).any() or A_s <= 0.0:
                continue
            zp, Ap, rp, ok = newton_refine(system, z_s, A_s, tol=tol)
            if ok:
                polished.append((np.asarray(zp), Ap, rp, "hint"))

    polished.sort(key=lambda p: p[2])
    clusters: list[list[tuple[np.ndarray, float, float, str]]] = []
    for pt in polished:
        u = np.append(pt[0], pt[1])
        placed = False
        for cl in clusters:
            v = np.append(cl[0][0], cl[0][1])
            scale = max(1.0, float(np.abs(u).max()), float(np.abs(v).max()))
            if float(np.abs(u - v).max()) <= cluster_tol * scale:
                cl.append(pt)
                placed = True
                break
        if not placed:
            clusters.append([pt])

    if m == 2 and len(clusters) > 1:
        # pitchfork guard, see PITCHFORK_TOL: merge every group of mutually
        # close near-diagonal clusters into one, keeping its most diagonal
        # lowest-residual member as the representative
        pts = [np.append(cl[0][0], cl[0][1]) for cl in clusters]
        scales = [max(1.0, float(np.abs(u).max())) for u in pts]
        near = [abs(u[0] - u[1]) <= PITCHFORK_TOL * s for u, s in zip(pts, scales)]
        kept: list[list[tuple[np.ndarray, float, float, str]]] = []
        seeds: list[int] = []  # indices into pts for merged-group anchors
        grew: list[bool] = []
        for i, cl in enumerate(clusters):
            if near[i]:
                target = next(
                    (
                        g
                        for g, j in enumerate(seeds)
                        if j >= 0
                        and float(np.abs(pts[i] - pts[j]).max())
                        <= PITCHFORK_TOL * max(scales[i], scales[j])
                    ),
                    None,
                )
                if target is not None:
                    kept[target].extend(cl)
                    grew[target] = True
                    continue
                seeds.append(i)
            else:
                seeds.append(-1)
            kept.append(cl)
            grew.append(False)
        for g, did in enumerate(grew):
            if did:
                kept[g].sort(key=lambda p: (abs(float(p[0][0] - p[0][1])), p[2]))
        clusters = kept

    reps = tuple(
        ClusterPoint(z={lab: float(v) for lab, v in zip(labels, cl[0][0])},
                     A=cl[0][1], residual=cl[0][2], members=len(cl), source=cl[0][3])
        for cl in clusters
    )
    return MultistartResult(count=len(reps), representatives=reps)
