"""Closed-form solver for graphs with two nonzero self-loop vertices.

Both nonzero loop vertices carry the same activity lam (canonical labels 1
and 2); Lambda >= 2*lam is the total activity.  Solutions split into the
symmetric family z_1 = z_2, handled by the same aggregate-branch machinery
as the single-loop solver with multiplicity 2, and the asymmetric family
z_1 * z_2 = 1, whose aggregates are the roots of the quartic

    q(x) = (1+x)^4 - lam*(x+2)*(1+x)^2 + lam*Lambda - 2*lam^2

on the open ray x > 2*sqrt(lam) - 1.  The regime thresholds

    Lambda1 = 8*lam^(3/2) - 10*lam
    Lambda2 = ((9*lam^2+32*lam)^(3/2) + 27*lam^3 + 144*lam^2 + 1152*lam)/512

satisfy q(2*sqrt(lam)-1) = lam*(Lambda - Lambda1) and q(x3) = lam*(Lambda -
Lambda2) at the right critical point x3, identities this module uses to
decide root existence so the solvers and the classifier can never disagree
through rounding.  The solution count is 1, 3 or 5; the tangency
lam = 49/9 is where Lambda1 and Lambda2 meet.  All formulas assume k = 2.

h_curve and delta_curve are the symmetric-family branch conditions written
as functions of the aggregate x = A; they are kept as test instruments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .boundary_law import ReducedSystem
from .errors import DivergentActivities, DomainError, InputError
from .model import ActivitySpec, BoundaryLawSolution, RegimeReport
from .rootfind import refine, scan_right
from .two_loop import loop_z_branches, solve_loop_aggregate

LAMBDA_STAR = 49.0 / 9.0
THRESHOLD_RTOL = 1e-9


@dataclass(frozen=True)
class ThreeLoopProblem:
    """Parameters of a two-nonzero-loop instance with equal loop activities."""

    lam: float
    Lambda: float

    def __post_init__(self) -> None:
        lam = float(self.lam)
        Lambda = float(self.Lambda)
        if not (math.isfinite(lam) and lam > 0.0):
            raise InputError(f"loop activity must be positive and finite, got {self.lam!r}")
        if math.isnan(Lambda):
            raise InputError("total activity is NaN")
        if math.isinf(Lambda):
            raise DivergentActivities("total activity diverges: no translation-invariant Gibbs measure")
        if Lambda < 2.0 * lam:
            raise InputError(f"total activity {Lambda} must be >= twice the loop activity {lam}")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "Lambda", Lambda)

    @classmethod
    def from_spec(cls, spec: ActivitySpec) -> "ThreeLoopProblem":
        if spec.k != 2:
            raise InputError(f"closed-form solver requires tree order k = 2, got k = {spec.k}")
        if len(spec.loop_activities) != 2:
            raise InputError(
                f"two-nonzero-loop solver needs exactly two loops, got {len(spec.loop_activities)}"
            )
        if spec.divergent:
            raise DivergentActivities("total activity diverges: no translation-invariant Gibbs measure")
        lam_a, lam_b = spec.loop_activities.values()
        if lam_a != lam_b:
            raise InputError(
                f"closed-form solver needs equal loop activities, got {lam_a} and {lam_b}; "
                "the numerical oracle handles the general case"
            )
        return cls(lam=lam_a, Lambda=spec.total_activity())


def thresholds(lam: float) -> tuple[float, float]:
    """Regime thresholds (Lambda1, Lambda2) for shared loop activity lam."""
    if not (isinstance(lam, (int, float)) and math.isfinite(lam) and lam > 0.0):
        raise InputError(f"loop activity must be positive and finite, got {lam!r}")
    lam = float(lam)
    Lambda1 = 8.0 * lam ** 1.5 - 10.0 * lam
    w = 9.0 * lam * lam + 32.0 * lam
    Lambda2 = (w ** 1.5 + 27.0 * lam ** 3 + 144.0 * lam * lam + 1152.0 * lam) / 512.0
    return Lambda1, Lambda2


def h_curve(lam: float, x: float, Lambda: float) -> float:
    """Symmetric-family branch condition (plus branch) at aggregate x = A."""
    if not (lam > 0.0):
        raise DomainError(f"lambda must be positive, got {lam!r}")
    if not (x > 0.0):
        raise DomainError(f"x must be positive, got {x!r}")
    y = 1.0 + x
    r = y * y - 4.0 * lam
    if r < 0.0:
        raise DomainError(f"negative radicand: lambda = {lam} exceeds (1+x)^2/4 = {y * y / 4.0}")
    return y ** 4 + y ** 3 * math.sqrt(r) - lam * y * y * (x + 2.0) + lam * (Lambda - 2.0 * lam)


def delta_curve(lam: float, x: float, Lambda: float) -> float:
    """Symmetric-family branch condition (minus branch) at aggregate x = A."""
    if not (lam > 0.0):
        raise DomainError(f"lambda must be positive, got {lam!r}")
    if not (x > 0.0):
        raise DomainError(f"x must be positive, got {x!r}")
    y = 1.0 + x
    r = y * y - 4.0 * lam
    if r < 0.0:
        raise DomainError(f"negative radicand: lambda = {lam} exceeds (1+x)^2/4 = {y * y / 4.0}")
    return y ** 4 - y ** 3 * math.sqrt(r) - lam * y * y * (x + 2.0) + lam * (Lambda - 2.0 * lam)


def q_poly(lam: float, Lambda: float, x: float) -> float:
    """The asymmetric-family quartic in the aggregate x = A."""
    y = 1.0 + x
    return y ** 4 - lam * (x + 2.0) * y * y + lam * Lambda - 2.0 * lam * lam


def _q_derivative(lam: float, x: float) -> float:
    y = 1.0 + x
    return 4.0 * y ** 3 - lam * y * (3.0 * x + 5.0)


def q_critical_points(lam: float) -> tuple[float, float, float]:
    """The three critical points of the quartic, in increasing order.

    q'(x) = 4(x+1)(x - x2)(x - x3) with x2 < -1 < x3; only x3 can enter the
    admissible ray, and it does exactly when lam > 49/9.
    """
    if not (isinstance(lam, (int, float)) and math.isfinite(lam) and lam > 0.0):
        raise InputError(f"loop activity must be positive and finite, got {lam!r}")
    s = math.sqrt(9.0 * lam * lam + 32.0 * lam)
    x2 = (3.0 * lam - 8.0 - s) / 8.0
    x3 = (3.0 * lam - 8.0 + s) / 8.0
    return x2, -1.0, x3


def _near(value: float, target: float, rtol: float = THRESHOLD_RTOL) -> bool:
    return abs(value - target) <= rtol * max(1.0, abs(target))


def solve_asymmetric(problem: ThreeLoopProblem) -> list[float]:
    """Aggregate values of all asymmetric solutions, in increasing order.

    Roots of q on the open ray x > 2*sqrt(lam) - 1.  A double root at the
    critical point x3 (total activity on the upper threshold) is returned
    once.  Boundary-sign decisions go through the exact identities
    q(2*sqrt(lam)-1) = lam*(Lambda - Lambda1), q(x3) = lam*(Lambda - Lambda2).
    """
    lam, Lambda = problem.lam, problem.Lambda
    Lambda1, Lambda2 = thresholds(lam)
    lo = 2.0 * math.sqrt(lam) - 1.0

    def q(x):
        return q_poly(lam, Lambda, x)

    def dq(x):
        return _q_derivative(lam, x)

    if lam <= LAMBDA_STAR:
        # q is nondecreasing on the ray, so there is a root iff q(lo) < 0
        if Lambda >= Lambda1:
            return []
        q_lo = lam * (Lambda - Lambda1)
        a, b, fa, fb = scan_right(q, lo, f0=q_lo)
        return [refine(q, a, b, fa, fb, df=dq)]

    x3 = q_critical_points(lam)[2]
    if _near(Lambda, Lambda2):
        return [x3]
    if Lambda > Lambda2:
        return []
    q_x3 = lam * (Lambda - Lambda2)
    roots = []
    if Lambda > Lambda1:
        # q decreases from q(lo) > 0 to q(x3) < 0: one root inside (lo, x3)
        q_lo = lam * (Lambda - Lambda1)
        roots.append(refine(q, lo, x3, q_lo, q_x3, df=dq))
    # q increases without bound beyond x3: always one root out there
    a, b, fa, fb = scan_right(q, x3, f0=q_x3)
    roots.append(refine(q, a, b, fa, fb, df=dq))
    return sorted(roots)


def solve_symmetric(problem: ThreeLoopProblem) -> BoundaryLawSolution:
    """The unique symmetric (z_1 = z_2) translation-invariant boundary law."""
    A, z, _sign = solve_loop_aggregate(problem.lam, problem.Lambda, mult=2)
    system = ReducedSystem(k=2, loop_labels=(1, 2), loop_lams=(problem.lam, problem.lam),
                           Lambda=problem.Lambda)
    residual = system.residual_at((z, z), A)
    return BoundaryLawSolution(A=A, loop_z={1: z, 2: z}, branch="symmetric", residual=residual)


def enumerate_solutions(problem: ThreeLoopProblem) -> list[BoundaryLawSolution]:
    """Every translation-invariant boundary law: symmetric first, then the
    asymmetric pairs (each aggregate root contributes a solution and its
    label swap)."""
    system = ReducedSystem(k=2, loop_labels=(1, 2), loop_lams=(problem.lam, problem.lam),
                           Lambda=problem.Lambda)
    out = [solve_symmetric(problem)]
    for idx, A in enumerate(solve_asymmetric(problem), start=1):
        z_plus, z_minus = loop_z_branches(problem.lam, A)
        for tag, pair in ((f"asymmetric-A{idx}", (z_plus, z_minus)),
                          (f"asymmetric-A{idx}-swapped", (z_minus, z_plus))):
            residual = system.residual_at(pair, A)
            out.append(BoundaryLawSolution(A=A, loop_z={1: pair[0], 2: pair[1]},
                                           branch=tag, residual=residual))
    return out


def classify(problem: ThreeLoopProblem | None = None, *, divergent: bool = False) -> RegimeReport:
    """Solution count and regime case for a two-nonzero-loop instance.

    Cases: (i) lam <= 49/9, Lambda < Lambda1 -> 3; (ii) lam <= 49/9,
    Lambda >= Lambda1 -> 1; (iii) lam > 49/9, Lambda <= Lambda1 -> 3;
    (iv) lam > 49/9, Lambda1 < Lambda < Lambda2 -> 5; (v) lam > 49/9,
    Lambda = Lambda2 -> 3; (vi) lam > 49/9, Lambda > Lambda2 -> 1.
    Divergent input -> 0.
    """
    if divergent:
        lam = problem.lam if problem is not None else None
        return RegimeReport(lam=lam, Lambda=None, Lambda1=None, Lambda2=None,
                            count=0, case_label="divergent")
    if problem is None:
        raise InputError("classify needs a problem unless divergent=True")
    lam, Lambda = problem.lam, problem.Lambda
    Lambda1, Lambda2 = thresholds(lam)
    if lam <= LAMBDA_STAR:
        if Lambda < Lambda1:
            count, case = 3, "i"
        else:
            count, case = 1, "ii"
    elif _near(Lambda, Lambda2):
        count, case = 3, "v"
    elif Lambda <= Lambda1:
        count, case = 3, "iii"
    elif Lambda < Lambda2:
        count, case = 5, "iv"
    else:
        count, case = 1, "vi"
    return RegimeReport(lam=lam, Lambda=Lambda, Lambda1=Lambda1, Lambda2=Lambda2,
                        count=count, case_label=case)
