import math
import random

import numpy as np
import pytest

from conftest import random_function, random_moreau_kernel
from galois_solve.engine import FunctionOnSpace, projector
from galois_solve.errors import NoSolutionError, ValidationError
from galois_solve.solver import (
    Problem,
    Status,
    oracle_check,
    solution_structure,
    solve,
    verify,
)

SQRT6 = math.sqrt(6.0)


def test_demo_solution_is_multiple(demo_kernel, demo_g):
    sol = solve(Problem(demo_kernel, demo_g))
    assert sol.status is Status.MULTIPLE
    assert np.allclose(sol.f_min.values, [-SQRT6, -4 / 3, -6], atol=1e-12)
    assert sol.witness_alt is not None
    assert np.array_equal(sol.witness_alt.values, [math.inf, math.inf, -6])
    assert sol.cover.is_cover and not sol.cover.is_minimal
    assert sol.caveats == ()


def test_demo_restricted_is_unique(demo_kernel, demo_g):
    sol = solve(Problem(demo_kernel.restrict(["y1", "y2"]), demo_g))
    assert sol.status is Status.UNIQUE
    assert np.allclose(sol.f_min.values, [-SQRT6, -4 / 3], atol=1e-12)
    assert sol.cover.is_minimal
    assert sol.cover.privately_covered == {"y1": "x2", "y2": "x1"}
    assert sol.witness_alt is None


def test_demo_bad_target_has_no_solution(demo_kernel, demo_g_bad):
    sol = solve(Problem(demo_kernel, demo_g_bad))
    assert sol.status is Status.NO_SOLUTION
    assert sol.cover.uncovered == ("x1",)
    g_val, p_val = sol.residual["x1"]
    assert float(p_val) - float(g_val) < 0  # strictly negative residual


def test_verify_known_solutions(demo_kernel, demo_g):
    prob = Problem(demo_kernel, demo_g)
    f1 = FunctionOnSpace(demo_kernel.y_labels, np.array([-SQRT6, -4 / 3, -6]))
    assert verify(prob, f1).is_solution
    f2 = FunctionOnSpace(demo_kernel.y_labels, np.array([math.inf, math.inf, -6]))
    assert verify(prob, f2).is_solution
    f3 = FunctionOnSpace.constant(demo_kernel.y_labels, 0)
    rep = verify(prob, f3)
    assert not rep.is_solution
    assert float(rep.transformed.value("x1")) == 4  # max(0, 4, 2)


def test_verify_respects_restriction(demo_kernel, demo_g):
    # equality required only at x2; at x1 the transform may fall below,
    # but never above
    prob = Problem(demo_kernel, demo_g, x_restrict=("x2",))
    f = FunctionOnSpace(demo_kernel.y_labels, np.array([-SQRT6, math.inf, math.inf]))
    rep = verify(prob, f)
    assert rep.is_solution
    assert float(rep.transformed.value("x1")) < 8
    assert not verify(Problem(demo_kernel, demo_g), f).is_solution
    # exceeding the target anywhere disqualifies, even off the restriction
    f_bad = FunctionOnSpace(demo_kernel.y_labels, np.array([math.inf, -3.0, math.inf]))
    rep_bad = verify(prob, f_bad)
    assert not rep_bad.is_solution
    assert float(rep_bad.transformed.value("x1")) > 8


def test_solution_structure_demo(demo_kernel, demo_g):
    rep = solution_structure(Problem(demo_kernel, demo_g))
    assert rep.forced == ()
    assert set(rep.minimal_active_sets) == {("y1", "y2"), ("y3",)}
    # exhaustive cross-check over all 8 subsets
    expected = {
        s for s in rep.admissible_active_sets
    }
    assert expected == {
        ("y1", "y2"), ("y3",), ("y1", "y3"), ("y2", "y3"), ("y1", "y2", "y3")
    }
    # admissible = up-closure of the minimal antichain
    for s in expected:
        assert any(set(m) <= set(s) for m in rep.minimal_active_sets)


def test_solution_structure_restricted(demo_kernel, demo_g):
    rep = solution_structure(Problem(demo_kernel.restrict(["y1", "y2"]), demo_g))
    assert rep.forced == ("y1", "y2")
    assert rep.admissible_active_sets == (("y1", "y2"),)


def test_solution_structure_requires_solvable(demo_kernel, demo_g_bad):
    with pytest.raises(NoSolutionError):
        solution_structure(Problem(demo_kernel, demo_g_bad))


def test_degenerate_bottom_target(demo_kernel):
    g = FunctionOnSpace.constant(demo_kernel.x_labels, -math.inf)
    sol = solve(Problem(demo_kernel, g))
    # the top function is forced at every index, hence uniqueness
    assert sol.status is Status.UNIQUE
    assert np.all(np.isposinf(sol.f_min.values))
    rep = solution_structure(Problem(demo_kernel, g))
    assert rep.degenerate is not None
    assert rep.admissible_active_sets == ((),)


def test_degenerate_top_target(demo_kernel):
    g = FunctionOnSpace.constant(demo_kernel.x_labels, math.inf)
    sol = solve(Problem(demo_kernel, g))
    assert sol.status is not Status.NO_SOLUTION
    assert np.all(np.isneginf(sol.f_min.values))
    assert verify(Problem(demo_kernel, g), sol.f_min).is_solution


def test_oracle_agreement_demo(demo_kernel, demo_g, demo_g_bad):
    assert oracle_check(Problem(demo_kernel, demo_g), trials=200, seed=1)
    assert oracle_check(Problem(demo_kernel.restrict(["y1", "y2"]), demo_g))
    assert oracle_check(Problem(demo_kernel, demo_g_bad))


def test_oracle_rejects_large_instances():
    from galois_solve import build_moreau

    big = build_moreau([[0] * 7 for _ in range(7)])
    prob = Problem(big, FunctionOnSpace.constant(big.x_labels, 0))
    with pytest.raises(ValidationError):
        oracle_check(prob)


def test_oracle_sweep_random():
    rng = random.Random(42)
    for _ in range(120):
        k = random_moreau_kernel(rng)
        g = random_function(rng, k.x_labels)
        assert oracle_check(Problem(k, g), trials=60, seed=rng.randrange(1 << 30))


def test_existence_iff_projector_fixed():
    rng = random.Random(23)
    for _ in range(80):
        k = random_moreau_kernel(rng)
        g = random_function(rng, k.x_labels)
        prob = Problem(k, g)
        sol = solve(prob)
        pg = projector(k, g)
        universe = [l for l, v in zip(g.labels, g.values) if v > -math.inf]
        fixed = all(
            float(pg.value(l)) == float(g.value(l)) for l in universe
        )
        assert (sol.status is not Status.NO_SOLUTION) == fixed


def test_minimal_solution_is_least():
    rng = random.Random(29)
    for _ in range(60):
        k = random_moreau_kernel(rng)
        g = random_function(rng, k.x_labels)
        prob = Problem(k, g)
        sol = solve(prob)
        if sol.status is Status.NO_SOLUTION:
            continue
        assert verify(prob, sol.f_min).is_solution
        if sol.witness_alt is not None:
            assert verify(prob, sol.witness_alt).is_solution
            assert not sol.witness_alt.approx_eq(sol.f_min)
            assert sol.f_min.leq(sol.witness_alt)
        # forced indices agree across solutions
        for y in sol.cover.essential:
            if sol.witness_alt is not None:
                assert float(sol.witness_alt.value(y)) == pytest.approx(
                    float(sol.f_min.value(y))
                )


def test_translation_equivariance():
    # additive kernels: shifting the coupling and the target by the same
    # constant leaves the minimal solution and the verdict unchanged
    rng = random.Random(31)
    from galois_solve import build_moreau

    for _ in range(40):
        n, m = rng.randint(1, 4), rng.randint(1, 4)
        bbar = [[rng.randint(-3, 3) for _ in range(m)] for _ in range(n)]
        gvals = [rng.randint(-3, 3) for _ in range(n)]
        c = rng.randint(-2, 2)
        k1 = build_moreau(bbar)
        k2 = build_moreau([[v + c for v in row] for row in bbar])
        g1 = FunctionOnSpace(k1.x_labels, np.array(gvals, dtype=float))
        g2 = FunctionOnSpace(k2.x_labels, np.array(gvals, dtype=float) + c)
        s1, s2 = solve(Problem(k1, g1)), solve(Problem(k2, g2))
        assert s1.status == s2.status
        assert np.array_equal(s1.f_min.values, s2.f_min.values)
        assert s1.family.sets == s2.family.sets
        assert s1.cover == s2.cover


def test_x_restrict_changes_verdict(demo_kernel, demo_g_bad):
    # restricted to the covered point the bad target becomes solvable
    sol = solve(Problem(demo_kernel, demo_g_bad, x_restrict=("x2",)))
    assert sol.status is not Status.NO_SOLUTION
    assert verify(
        Problem(demo_kernel, demo_g_bad, x_restrict=("x2",)), sol.f_min
    ).is_solution
