"""Lattice shapes, graded supports, geodesic plans and convexity."""

import itertools
import random
import warnings
from fractions import Fraction as Q
from math import ceil, floor

import pytest

from mptypes.apartment import (
    ApartmentPoint,
    GroupConfig,
    breakpoints,
    convexity_check,
    graded_support,
    mp_lattice,
    verify_plan,
)
from mptypes.errors import ValidationError


def cfg2(m=8):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return GroupConfig(n=2, q=5, m=m)


def cfg3(m=8):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return GroupConfig(n=3, q=5, m=m)


def pt(*coords):
    return ApartmentPoint.of([Q(c) for c in coords])


def test_small_q_warns_and_strict_rejects():
    with pytest.warns(UserWarning):
        GroupConfig(n=2, q=5, m=2)
    with pytest.raises(ValidationError):
        GroupConfig(n=2, q=5, m=2, strict_p=True)


def test_point_normalization():
    x = ApartmentPoint.of([Q(3, 8), Q(1, 4)])
    assert x.coords == (Q(1, 8), Q(0))
    with pytest.raises(ValidationError):
        ApartmentPoint((Q(1, 2), Q(1, 4)))


def test_mp_lattice_worked_values():
    cfg = cfg2()
    # hyperspecial point, integral level: gl_2(O)
    sh = mp_lattice(cfg, pt(0, 0), 0)
    assert sh.bounds == ((0, 0), (0, 0))
    # ceil(1/2 + x_j - x_i) entrywise
    sh = mp_lattice(cfg, pt(Q(1, 2), 0), Q(1, 2))
    assert sh.bounds == ((1, 0), (1, 1))
    # floor(-1/2 + x_j - x_i) + 1 entrywise
    sh = mp_lattice(cfg, pt(Q(1, 2), 0), Q(-1, 2), strict=True)
    assert sh.bounds == ((0, 0), (1, 0))


def test_mp_lattice_rejects_bad_denominator():
    cfg = cfg2(m=2)
    with pytest.raises(ValidationError):
        mp_lattice(cfg, pt(Q(1, 3), 0), 0)
    with pytest.raises(ValidationError):
        mp_lattice(cfg, pt(0, 0), Q(1, 3))


def test_strict_vs_nonstrict_equality_pattern():
    cfg = cfg2()
    x = pt(Q(1, 2), 0)
    s = Q(1, 2)
    st = mp_lattice(cfg, x, s, strict=True).bounds
    ns = mp_lattice(cfg, x, s, strict=False).bounds
    for i in range(2):
        for j in range(2):
            integral = (s + x[j] - x[i]).denominator == 1
            assert st[i][j] >= ns[i][j]
            assert (st[i][j] == ns[i][j]) == (not integral)


def test_graded_support_worked_values():
    cfg = cfg2()
    sup = graded_support(cfg, pt(0, 0), -1)
    assert dict(sup.entries) == {(0, 0): -1, (0, 1): -1, (1, 0): -1, (1, 1): -1}
    sup = graded_support(cfg, pt(Q(1, 2), 0), Q(-1, 2))
    assert dict(sup.entries) == {(0, 1): -1, (1, 0): 0}
    assert sup.dim == 2
    sup = graded_support(cfg, pt(Q(3, 8), 0), Q(-5, 8))
    assert dict(sup.entries) == {(0, 1): -1}
    assert sup.dim == 1


def test_lattice_periodicity_and_nesting():
    cfg = cfg3(m=4)
    rng = random.Random(1)
    denoms = [1, 2, 4]
    for _ in range(40):
        d = rng.choice(denoms)
        x = ApartmentPoint.of([Q(rng.randrange(-4, 5), d) for _ in range(3)])
        s = Q(rng.randrange(-8, 9), rng.choice(denoms))
        a = mp_lattice(cfg, x, s).bounds
        b = mp_lattice(cfg, x, s + 1).bounds
        assert all(b[i][j] == a[i][j] + 1 for i in range(3) for j in range(3))
    # exhaustive nesting over a small grid
    grid = [Q(k, 4) for k in range(0, 4)]
    for xc in itertools.product(grid, repeat=2):
        x = ApartmentPoint.of(list(xc) + [0])
        for snum in range(-4, 5):
            s = Q(snum, 4)
            ns = mp_lattice(cfg, x, s)
            st = mp_lattice(cfg, x, s, strict=True)
            finer = mp_lattice(cfg, x, s + Q(1, 4))
            assert ns.contains(st)
            assert st.contains(finer)


def test_graded_dimension_is_lattice_quotient_rank():
    cfg = cfg3(m=4)
    grid = [Q(k, 4) for k in range(0, 4)]
    for a in grid:
        x = ApartmentPoint.of([a, Q(1, 2), 0])
        for snum in range(-3, 4):
            s = Q(snum, 4)
            ns = mp_lattice(cfg, x, s)
            st = mp_lattice(cfg, x, s, strict=True)
            assert graded_support(cfg, x, s).dim == ns.dim_quotient_by(st)


def test_graded_dimension_additivity():
    cfg = cfg3(m=4)
    grid = [Q(k, 4) for k in range(0, 4)]
    for xc in itertools.product(grid, repeat=2):
        x = ApartmentPoint.of(list(xc) + [0])
        for snum in range(-2, 3):
            s = Q(snum, 2)
            total = sum(
                graded_support(cfg, x, s + Q(k, 4)).dim for k in range(4)
            )
            assert total == 9


def test_breakpoints_worked_examples():
    cfg = cfg2()
    plan = breakpoints(cfg, pt(0, 0), 1, pt(Q(1, 2), 0), Q(1, 2))
    assert plan.ts == (Q(0), Q(1))
    plan = breakpoints(cfg, pt(Q(1, 4), 0), Q(3, 4), pt(Q(1, 4), 0), Q(3, 4))
    assert plan.ts == (Q(0), Q(1))
    plan = breakpoints(cfg, pt(0, 0), 1, pt(Q(1, 2), 0), 1)
    assert plan.ts == (Q(0), Q(1))
    # the interval lattice strictly contains the endpoint lattice via t^-1 e_12
    interval_shape = plan.intervals[0].shapes[5]  # g_{y > -1}
    assert interval_shape.bounds[0][1] == -1
    endpoint = mp_lattice(cfg, pt(0, 0), -1, strict=True)
    assert endpoint.bounds[0][1] == 0
    assert endpoint.contains(interval_shape) is False
    assert interval_shape.contains(endpoint)


def test_breakpoints_catch_interior_crossing():
    cfg = cfg2()
    # from level 0 to level 1 at a fixed vertex the diagonal bound jumps at t=0,1
    # while a path crossing an alcove wall yields an interior breakpoint
    plan = breakpoints(cfg, pt(0, 0), Q(1, 2), pt(1, 0), Q(1, 2))
    assert Q(1, 2) in plan.ts


def test_convexity_worked_instance():
    cfg = cfg2()
    x0, x1 = pt(0, 0), pt(Q(1, 2), 0)
    assert convexity_check(cfg, x0, 1, x1, Q(1, 2), Q(1, 2))
    assert convexity_check(cfg, x0, 1, x1, Q(1, 2), 0)
    # an instance where the containment is strict at entry (2,1)
    y0, y1 = pt(Q(1, 8), 0), pt(Q(1, 4), 0)
    assert convexity_check(cfg, y0, 1, y1, 0, Q(1, 2))
    v0 = mp_lattice(cfg, y0, 1).bounds
    v1 = mp_lattice(cfg, y1, 0).bounds
    vt = mp_lattice(cfg, pt(Q(3, 16), 0), Q(1, 2), _checked=True).bounds
    assert max(v0[1][0], v1[1][0]) > vt[1][0]


def test_convexity_randomized():
    rng = random.Random(13)
    for n, cfg in ((2, cfg2()), (3, cfg3())):
        for _ in range(200):
            d0, d1 = rng.choice([1, 2, 4, 8]), rng.choice([1, 2, 4, 8])
            x0 = ApartmentPoint.of([Q(rng.randrange(-8, 9), d0) for _ in range(n)])
            x1 = ApartmentPoint.of([Q(rng.randrange(-8, 9), d1) for _ in range(n)])
            s0 = Q(rng.randrange(-16, 17), d0)
            s1 = Q(rng.randrange(-16, 17), d1)
            t = Q(rng.randrange(0, 9), 8)
            assert convexity_check(cfg, x0, s0, x1, s1, t)


def test_plans_verify_on_random_instances():
    rng = random.Random(5)
    cfg = cfg3()
    for _ in range(30):
        d = rng.choice([1, 2, 4, 8])
        x0 = ApartmentPoint.of([Q(rng.randrange(-4, 5), d) for _ in range(3)])
        x1 = ApartmentPoint.of([Q(rng.randrange(-4, 5), d) for _ in range(3)])
        s0 = Q(rng.randrange(0, 9), d)
        s1 = Q(rng.randrange(0, 9), d)
        plan = breakpoints(cfg, x0, s0, x1, s1)
        verify_plan(cfg, plan, samples_per_interval=2)
