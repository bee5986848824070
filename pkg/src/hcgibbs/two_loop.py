"""Closed-form solver for graphs with a single nonzero self-loop vertex.

With one loop vertex (activity lam, canonical label 1) and total activity
Lambda, the loop equation at aggregate A has the two explicit branches

    z_pm(A) = ((1+A)^2 - 2 lam +- (1+A) sqrt((1+A)^2 - 4 lam)) / (2 lam)

whose product is exactly 1, and the aggregate identity becomes a scalar
equation psi(A) = 0 per branch.  Exactly one branch carries a root, and the
unique translation-invariant Gibbs measure sits there.  All formulas assume
tree order k = 2.

f_curve and g_curve are the same two branch conditions written as quartic
expressions in x = 1 + A; they are kept as test instruments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .boundary_law import ReducedSystem
from .errors import DivergentActivities, DomainError, InputError, NumericalFailure
from .model import ActivitySpec, AdmissibilityGraph, BoundaryLawSolution, RegimeReport
from .rootfind import refine, scan_right


@dataclass(frozen=True)
class TwoLoopProblem:
    """Parameters of a single-nonzero-loop instance: lam1 > 0, Lambda >= lam1."""

    lam1: float
    Lambda: float

    def __post_init__(self) -> None:
        lam1 = float(self.lam1)
        Lambda = float(self.Lambda)
        if not (math.isfinite(lam1) and lam1 > 0.0):
            raise InputError(f"loop activity must be positive and finite, got {self.lam1!r}")
        if math.isnan(Lambda):
            raise InputError("total activity is NaN")
        if math.isinf(Lambda):
            raise DivergentActivities("total activity diverges: no translation-invariant Gibbs measure")
        if Lambda < lam1:
            raise InputError(f"total activity {Lambda} must be >= the loop activity {lam1}")
        object.__setattr__(self, "lam1", lam1)
        object.__setattr__(self, "Lambda", Lambda)

    @classmethod
    def from_spec(cls, spec: ActivitySpec) -> "TwoLoopProblem":
        if spec.k != 2:
            raise InputError(f"closed-form solver requires tree order k = 2, got k = {spec.k}")
        if len(spec.loop_activities) != 1:
            raise InputError(
                f"single-loop solver needs exactly one nonzero loop, got {len(spec.loop_activities)}"
            )
        if spec.divergent:
            raise DivergentActivities("total activity diverges: no translation-invariant Gibbs measure")
        (lam1,) = spec.loop_activities.values()
        return cls(lam1=lam1, Lambda=spec.total_activity())


def _radicand(lam: float, x: float) -> float:
    r = x * x - 4.0 * lam
    if r < 0.0:
        raise DomainError(f"negative radicand: lambda = {lam} exceeds x^2/4 = {x * x / 4.0}")
    return r


def f_curve(lam: float, x: float, Lambda: float) -> float:
    """Branch condition of the z_plus branch as a function of x = 1 + A."""
    if not (lam > 0.0):
        raise DomainError(f"lambda must be positive, got {lam!r}")
    if not (x > 0.0):
        raise DomainError(f"x must be positive, got {x!r}")
    s = math.sqrt(_radicand(lam, x))
    return x ** 4 + x ** 3 * (s - 2.0 * lam) + 2.0 * lam * (Lambda - lam)


def g_curve(lam: float, x: float, Lambda: float) -> float:
    """Branch condition of the z_minus branch as a function of x = 1 + A."""
    if not (lam > 0.0):
        raise DomainError(f"lambda must be positive, got {lam!r}")
    if not (x > 0.0):
        raise DomainError(f"x must be positive, got {x!r}")
    s = math.sqrt(_radicand(lam, x))
    return x ** 4 - x ** 3 * (s + 2.0 * lam) + 2.0 * lam * (Lambda - lam)


def loop_z_branches(lam: float, A: float) -> tuple[float, float]:
    """Both loop-equation branches (z_plus, z_minus) at aggregate A.

    z_minus is computed through the exact product identity
    z_plus * z_minus = 1 to avoid cancellation at large A.
    """
    x = 1.0 + A
    s = math.sqrt(_radicand(lam, x))
    z_plus = (x * x - 2.0 * lam + x * s) / (2.0 * lam)
    return z_plus, 1.0 / z_plus


def _psi_and_z(lam: float, Lambda: float, mult: int, sign: int, A: float) -> tuple[float, float]:
    """Aggregate defect psi(A) on one branch, and the branch value z(A)."""
    x = 1.0 + A
    r = x * x - 4.0 * lam
    s = math.sqrt(r) if r > 0.0 else 0.0
    base = x * x - 2.0 * lam + x * s
    z = base / (2.0 * lam) if sign > 0 else 2.0 * lam / base
    return A * x * x - Lambda - mult * lam * z * (2.0 + z), z


def _psi_derivative(lam: float, Lambda: float, mult: int, sign: int, A: float) -> float:
    x = 1.0 + A
    r = x * x - 4.0 * lam
    if r <= 0.0:
        return math.inf
    s = math.sqrt(r)
    z_plus = (x * x - 2.0 * lam + x * s) / (2.0 * lam)
    dz_plus = (2.0 * x + s + x * x / s) / (2.0 * lam)
    if sign > 0:
        z, dz = z_plus, dz_plus
    else:
        z = 1.0 / z_plus
        dz = -dz_plus / (z_plus * z_plus)
    return x * x + 2.0 * A * x - 2.0 * mult * lam * (1.0 + z) * dz


def solve_loop_aggregate(lam: float, Lambda: float, mult: int) -> tuple[float, float, int]:
    """Unique root of the aggregate equation A(1+A)^2 = Lambda + mult*lam*z(2+z).

    mult is the number of identical nonzero loop vertices sharing activity
    lam (1 or 2).  Returns (A, z, sign) where sign is +1 for the z_plus
    branch and -1 for z_minus.  Exactly one branch carries the root; finding
    none or more than one is reported as NumericalFailure.
    """
    A_lo = max(0.0, 2.0 * math.sqrt(lam) - 1.0)
    found: list[tuple[float, float, int]] = []
    for sign in (1, -1):
        def psi(A, sign=sign):
            return _psi_and_z(lam, Lambda, mult, sign, A)[0]

        def dpsi(A, sign=sign):
            return _psi_derivative(lam, Lambda, mult, sign, A)

        try:
            a, b, fa, fb = scan_right(psi, A_lo, step=0.25)
        except NumericalFailure:
            continue
        A_root = refine(psi, a, b, fa, fb, df=dpsi)
        if A_root > 0.0:
            z_root = _psi_and_z(lam, Lambda, mult, sign, A_root)[1]
            found.append((A_root, z_root, sign))
    if not found:
        # the root can sit exactly on the branch meeting point A = A_lo
        # (radicand zero, z = 1), where psi touches zero without crossing
        # and no scan on either branch can bracket it; evaluate the
        # candidate with the radicand clamped to zero, because sqrt
        # amplifies the radicand's rounding noise to ~sqrt(eps) otherwise
        x = 1.0 + A_lo
        z_b = (x * x - 2.0 * lam) / (2.0 * lam)
        psi_b = A_lo * x * x - Lambda - mult * lam * z_b * (2.0 + z_b)
        scale = max(1.0, abs(Lambda), x ** 3)
        if A_lo > 0.0 and abs(psi_b) <= 1e-9 * scale:
            return A_lo, z_b, 1
        raise NumericalFailure(f"no aggregate root located for lam={lam}, Lambda={Lambda}")
    if len(found) == 2:
        # the branches meet where the radicand vanishes (z = 1); treat a
        # shared boundary root as one solution, anything else as a bug
        if abs(found[0][0] - found[1][0]) <= 1e-9 * max(1.0, abs(found[0][0])):
            found = found[:1]
        else:
            raise NumericalFailure(
                f"both branches carry aggregate roots for lam={lam}, Lambda={Lambda}: "
                f"{found[0][0]} and {found[1][0]}"
            )
    return found[0]


def solve_unique(problem: TwoLoopProblem) -> BoundaryLawSolution:
    """The unique translation-invariant boundary law of a single-loop instance."""
    A, z, sign = solve_loop_aggregate(problem.lam1, problem.Lambda, mult=1)
    system = ReducedSystem(k=2, loop_labels=(1,), loop_lams=(problem.lam1,), Lambda=problem.Lambda)
    residual = system.residual_at((z,), A)
    branch = "two-loop-f" if sign > 0 else "two-loop-g"
    return BoundaryLawSolution(A=A, loop_z={1: z}, branch=branch, residual=residual)


def classify(problem: TwoLoopProblem | None = None, *, divergent: bool = False) -> RegimeReport:
    """Solution count for the single-loop graph: 1 when finite, 0 when divergent."""
    if divergent:
        lam = problem.lam1 if problem is not None else None
        return RegimeReport(lam=lam, Lambda=None, Lambda1=None, Lambda2=None,
                            count=0, case_label="divergent")
    if problem is None:
        raise InputError("classify needs a problem unless divergent=True")
    return RegimeReport(lam=problem.lam1, Lambda=problem.Lambda, Lambda1=None, Lambda2=None,
                        count=1, case_label="unique")
