"""Damped fixed-point iteration and multistart solution counting.

This module is the independent numerical check on the closed-form solvers:
it iterates the consistency map directly and never touches the branch
algebra.  The solver tests freeze values that were confirmed here.
"""

import numpy as np
import pytest

from hcgibbs.errors import DivergentActivities, InputError
from hcgibbs.model import ActivitySpec, graph_from_spec
from hcgibbs.oracle import fixed_point_iterate, multistart_count
from hcgibbs.three_loop import ThreeLoopProblem, enumerate_solutions, thresholds
from hcgibbs.two_loop import TwoLoopProblem, solve_unique

SPEC12 = ActivitySpec(loop_activities={1: 1.0}, tail_mass=1.0)
GRAPH12 = graph_from_spec(SPEC12)


def three_loop_setup(Lambda):
    spec = ActivitySpec(loop_activities={1: 9.0, 2: 9.0}, tail_mass=Lambda - 18.0)
    return spec, graph_from_spec(spec)


def test_converges_and_matches_closed_form():
    sol = solve_unique(TwoLoopProblem(1.0, 2.0))
    res = fixed_point_iterate(SPEC12, GRAPH12, {1: 1.0}, 1.0, damping=0.5)
    assert res.converged
    assert res.residual < 1e-11
    assert res.A == pytest.approx(sol.A, rel=1e-8)
    assert res.z[1] == pytest.approx(sol.loop_z[1], rel=1e-8)


def test_zero_iterations_at_exact_solution():
    sol = solve_unique(TwoLoopProblem(1.0, 2.0))
    res = fixed_point_iterate(SPEC12, GRAPH12, dict(sol.loop_z), sol.A, damping=0.5)
    assert res.converged
    assert res.iterations == 0


def test_damping_schedule_example():
    # undamped iteration oscillates on this instance; damping settles it
    spec = ActivitySpec(loop_activities={1: 4.0}, tail_mass=1.0)
    graph = graph_from_spec(spec)
    hot = fixed_point_iterate(spec, graph, {1: 0.5}, 0.5, damping=1.0, max_iter=4000)
    assert not hot.converged
    cool = fixed_point_iterate(spec, graph, {1: 0.5}, 0.5, damping=0.3, max_iter=4000)
    assert cool.converged
    sol = solve_unique(TwoLoopProblem(4.0, 5.0))
    assert cool.A == pytest.approx(sol.A, rel=1e-8)


def test_non_convergence_is_a_value():
    spec = ActivitySpec(loop_activities={1: 4.0}, tail_mass=1.0)
    graph = graph_from_spec(spec)
    res = fixed_point_iterate(spec, graph, {1: 0.5}, 0.5, damping=1.0, max_iter=500)
    assert not res.converged
    assert res.residual > 0.0


def test_iterate_input_validation():
    with pytest.raises(InputError):
        fixed_point_iterate(SPEC12, GRAPH12, {1: 1.0}, 1.0, damping=0.0)
    with pytest.raises(InputError):
        fixed_point_iterate(SPEC12, GRAPH12, {1: 1.0}, 1.0, damping=1.5)
    with pytest.raises(InputError):
        fixed_point_iterate(SPEC12, GRAPH12, {}, 1.0)
    with pytest.raises(InputError):
        fixed_point_iterate(SPEC12, GRAPH12, {1: -1.0}, 1.0)


def test_divergent_spec_raises():
    spec = ActivitySpec(loop_activities={1: 1.0}, divergent=True)
    graph = graph_from_spec(spec)
    with pytest.raises(DivergentActivities):
        fixed_point_iterate(spec, graph, {1: 1.0}, 1.0)
    with pytest.raises(DivergentActivities):
        multistart_count(spec, graph, n_starts=50, seed=0)


def test_multistart_two_loop_unique():
    res = multistart_count(SPEC12, GRAPH12, n_starts=100, seed=0)
    assert res.count == 1
    sol = solve_unique(TwoLoopProblem(1.0, 2.0))
    rep = res.representatives[0]
    assert rep.A == pytest.approx(sol.A, rel=1e-8)


def test_multistart_minimum_starts():
    with pytest.raises(InputError):
        multistart_count(SPEC12, GRAPH12, n_starts=10, seed=0)


def test_multistart_three_loop_bare_discovery():
    # all three solutions in this regime attract the damped iteration
    spec, graph = three_loop_setup(100.0)
    res = multistart_count(spec, graph, n_starts=100, seed=0)
    assert res.count == 3


def test_multistart_repelling_points_need_hints():
    # in the five-solution regime the asymmetric points repel the damped
    # map from every direction, so bare iteration only sees the symmetric
    # one; hints are confirmed by Newton refinement and restore the count
    spec, graph = three_loop_setup(130.0)
    bare = multistart_count(spec, graph, n_starts=100, seed=0)
    assert bare.count == 1
    hints = enumerate_solutions(ThreeLoopProblem(9.0, 130.0))
    full = multistart_count(spec, graph, n_starts=100, seed=0, hints=hints)
    assert full.count == 5


def test_multistart_count_stable_under_doubling():
    for n in (100, 200):
        assert multistart_count(SPEC12, GRAPH12, n_starts=n, seed=0).count == 1
    spec, graph = three_loop_setup(100.0)
    for n in (100, 200):
        assert multistart_count(spec, graph, n_starts=n, seed=0).count == 3


def test_representatives_close_the_system():
    spec, graph = three_loop_setup(100.0)
    res = multistart_count(spec, graph, n_starts=100, seed=0)
    for rep in res.representatives:
        assert rep.residual < 1e-11


def test_bad_hint_adds_no_spurious_cluster():
    # Newton either rejects a fabricated point or drags it onto the genuine
    # solution; the cluster count must not inflate either way
    spec, graph = three_loop_setup(200.0)
    fake = ({1: 123.0, 2: 0.003}, 77.0)
    res = multistart_count(spec, graph, n_starts=60, seed=0, hints=[fake])
    assert res.count == 1


def test_threshold_satellites_merge_into_symmetric_cluster():
    # exactly at the lower threshold the defect is degenerately flat along
    # z1 - z2, so multistart lands near-diagonal satellites that pass the
    # residual gate; the merge pass must collapse them onto the symmetric
    # solution instead of inflating the count
    for lam, want in ((4.0, 1), (12.0, 3)):
        L1, _ = thresholds(lam)
        spec = ActivitySpec(loop_activities={1: lam, 2: lam}, tail_mass=L1 - 2.0 * lam)
        graph = graph_from_spec(spec)
        hints = enumerate_solutions(ThreeLoopProblem(lam, L1))
        assert len(hints) == want
        res = multistart_count(spec, graph, n_starts=100, seed=0, hints=hints)
        assert res.count == want
        sym = min(res.representatives, key=lambda r: abs(r.z[1] - r.z[2]))
        assert abs(sym.z[1] - sym.z[2]) < 1e-9
