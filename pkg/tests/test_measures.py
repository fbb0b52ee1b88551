"""Counting measures: membership ladder, worked values, triangularity."""

import warnings
from fractions import Fraction as Q

import pytest

from mptypes.apartment import ApartmentPoint, GroupConfig
from mptypes.graded import GradedElement, conjugate
from mptypes.laurent import Laurent, LMatrix
from mptypes.measures import (
    MeasureTable,
    ProbeSet,
    build_measure_table,
    clear_count_cache,
    count_measure,
    independence_check,
    measure_vector,
    pair_strict_bounds,
    relation_lattice,
    residue_membership,
    shared_lattice,
)
from mptypes.orbits import OrbitLabel, dominance_leq
from mptypes.refine import DMPPair, refine_relation, verify_relation


def make_cfg(n, q=5, m=16):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return GroupConfig(n=n, q=q, m=m)


CFG2 = make_cfg(2)
CFG3 = make_cfg(3)


def pt(*coords):
    return ApartmentPoint.of([Q(c) for c in coords])


X_HYP = pt(0, 0)
X_IWA = pt(Q(1, 2), 0)
ZERO_PAIR = DMPPair.make(CFG2, 1, X_HYP, GradedElement.zero(X_HYP, -1))
REG_PAIR = DMPPair.make(
    CFG2, Q(1, 2), X_IWA, GradedElement.make(CFG2, X_IWA, Q(-1, 2), {(0, 1): 1})
)
O11 = OrbitLabel.of((1, 1))
O2 = OrbitLabel.of((2,))


def series_matrix(q, entries):
    return LMatrix.from_rows(
        q, [[Laurent.from_dict(q, dict(e)) for e in row] for row in entries]
    )


def test_zero_orbit_membership():
    # O = (1,...,1): true iff the residue is zero and 0 lies in the coset
    y = series_matrix(5, [[{}, {}], [{}, {}]])
    assert residue_membership(CFG2, O11, ZERO_PAIR, 1, y)
    y2 = series_matrix(5, [[{}, {0: 1}], [{}, {}]])
    assert not residue_membership(CFG2, O11, ZERO_PAIR, 1, y2)


def test_trace_obstruction_membership():
    y = series_matrix(5, [[{0: 1}, {}], [{}, {}]])
    assert not residue_membership(CFG2, O2, ZERO_PAIR, 1, y)


def test_membership_closed_form_solution():
    # residue of [[a, t^-1+b], [-a^2 t (1+bt)^-1, -a]] in t^-1 e12 + gl2(O)
    # truncated mod t^K: an image of an exact nilpotent, so it passes
    a, b, K = 2, 3, 3
    q = 5
    pair = DMPPair.make(
        CFG2, 1, X_HYP, GradedElement.make(CFG2, X_HYP, -1, {(0, 1): 1})
    )
    # -a^2 t (1 - bt + b^2 t^2 - ...) truncated below K
    w_series = {}
    sign = 1
    for k in range(K):
        w_series[1 + k] = (-(a * a) * sign * pow(b, k)) % q
        sign = sign
    # geometric expansion: coefficients alternate via (-b)^k
    w_series = {1 + k: (-(a * a) * pow(-b, k, q)) % q for k in range(K - 1)}
    y = series_matrix(
        5,
        [
            [{0: a}, {-1: 1, 0: b}],
            [w_series, {0: -a % q}],
        ],
    )
    assert residue_membership(CFG2, O2, pair, K, y)
    # breaking the trace kills it
    y_bad = series_matrix(5, [[{0: a}, {-1: 1, 0: b}], [w_series, {0: a}]])
    assert not residue_membership(CFG2, O2, pair, K, y_bad)


def test_count_measure_worked_values():
    clear_count_cache()
    assert count_measure(CFG2, O11, ZERO_PAIR, 1) == 1
    # 2x2 nilpotent count over F_5 is q^2, normalized by q^(K dim) = 25
    assert count_measure(CFG2, O2, ZERO_PAIR, 1) == 1
    assert count_measure(CFG2, O11, REG_PAIR, 1) == 0
    assert count_measure(CFG2, O11, REG_PAIR, 2) == 0
    assert count_measure(CFG2, O2, REG_PAIR, 1) > 0


def test_count_additivity_over_refinement():
    # the measure half of the refinement relation at K = 2
    y = pt(Q(1, 4), 0)
    coarse = DMPPair.make(CFG2, 1, y, GradedElement.zero(y, -1))
    rec = refine_relation(CFG2, coarse, (X_HYP, Q(1)))
    lam = relation_lattice(CFG2, rec)
    for orbit in (O11, O2):
        comps = measure_vector(CFG2, orbit, rec.pairs(), 2, lam)
        assert verify_relation(CFG2, rec, comps)


def test_count_additivity_iwahori_family():
    yb = pt(Q(3, 8), 0)
    coarse = DMPPair.make(
        CFG2, Q(5, 8), yb, GradedElement.make(CFG2, yb, Q(-5, 8), {(0, 1): 1})
    )
    rec = refine_relation(CFG2, coarse, (X_IWA, Q(1, 2)))
    lam = relation_lattice(CFG2, rec)
    for orbit in (O11, O2):
        comps = measure_vector(CFG2, orbit, rec.pairs(), 2, lam)
        assert verify_relation(CFG2, rec, comps)


def test_triangularity_exhaustive_n2():
    # eq-triang dichotomy over every degenerate phi at the two standard
    # points and both levels (small-K zero/nonzero statuses)
    from mptypes.graded import enumerate_graded_elements, is_degenerate

    for x, s in [
        (X_HYP, Q(1)),
        (X_HYP, Q(1, 2)),
        (X_IWA, Q(1, 2)),
        (X_IWA, Q(1)),
    ]:
        for el in enumerate_graded_elements(CFG2, x, -s):
            if not is_degenerate(CFG2, el):
                continue
            pair = DMPPair.make(CFG2, s, x, el)
            for orbit in (O11, O2):
                val = count_measure(CFG2, orbit, pair, 1)
                assert (val != 0) == dominance_leq(pair.lift, orbit)


def test_monotone_refinement_zero_status():
    for pair in (ZERO_PAIR, REG_PAIR):
        for orbit in (O11, O2):
            v1 = count_measure(CFG2, orbit, pair, 1)
            v2 = count_measure(CFG2, orbit, pair, 2)
            assert (v1 == 0) == (v2 == 0)


def test_conjugation_invariance_of_counts():
    import random

    from mptypes.graded import enumerate_graded_elements, is_degenerate

    rng = random.Random(41)
    lam = pair_strict_bounds(CFG2, ZERO_PAIR)
    degenerate = [
        el for el in enumerate_graded_elements(CFG2, X_HYP, -1) if is_degenerate(CFG2, el)
    ]
    done = 0
    while done < 100:
        el = rng.choice(degenerate)
        c = rng.randrange(5)
        # integral unipotents stabilize gl_2(O)
        g = ((1, c), (0, 1)) if rng.random() < 0.5 else ((1, 0), (c, 1))
        pair = DMPPair.make(CFG2, 1, X_HYP, el)
        pair_c = DMPPair.make(CFG2, 1, X_HYP, conjugate(CFG2, el, g))
        for orbit in (O11, O2):
            assert count_measure(CFG2, orbit, pair, 1, lam) == count_measure(
                CFG2, orbit, pair_c, 1, lam
            )
        done += 1
    # a couple of deeper-truncation spot checks
    el = GradedElement.make(CFG2, X_HYP, -1, {(0, 1): 2})
    pair = DMPPair.make(CFG2, 1, X_HYP, el)
    pair_c = DMPPair.make(CFG2, 1, X_HYP, conjugate(CFG2, el, ((1, 3), (0, 1))))
    for orbit in (O11, O2):
        assert count_measure(CFG2, orbit, pair, 2, lam) == count_measure(
            CFG2, orbit, pair_c, 2, lam
        )


def test_monotone_refinement_exhaustive_iwahori_piece():
    from mptypes.graded import enumerate_graded_elements, is_degenerate

    for el in enumerate_graded_elements(CFG2, X_IWA, Q(-1, 2)):
        if not is_degenerate(CFG2, el):
            continue
        pair = DMPPair.make(CFG2, Q(1, 2), X_IWA, el)
        for orbit in (O11, O2):
            v1 = count_measure(CFG2, orbit, pair, 1)
            v2 = count_measure(CFG2, orbit, pair, 2)
            assert (v1 == 0) == (v2 == 0)


def test_empty_orbit_list_gives_empty_table():
    probes = ProbeSet.make(CFG2, [ZERO_PAIR], K=1)
    table = build_measure_table(CFG2, probes, [])
    assert table.entries == ((),)


def test_gl2_measure_table_and_independence():
    probes = ProbeSet.make(CFG2, [ZERO_PAIR, REG_PAIR], K=2)
    table = build_measure_table(CFG2, probes, [O11, O2])
    assert table.entry(O11, ZERO_PAIR) == 1
    assert table.entry(O11, REG_PAIR) == 0
    assert table.entry(O2, ZERO_PAIR) > 0
    assert table.entry(O2, REG_PAIR) > 0
    assert independence_check(table)
    # duplicated probe rows are dependent
    dup = MeasureTable(
        orbits=table.orbits,
        probes=(ZERO_PAIR, ZERO_PAIR),
        K=table.K,
        lam=table.lam,
        normalization=table.normalization,
        entries=(table.entries[0], table.entries[0]),
    )
    assert not independence_check(dup)


def test_gl3_measure_table():
    x3 = pt(0, 0, 0)
    zero3 = DMPPair.make(CFG3, 1, x3, GradedElement.zero(x3, -1))
    sub3 = DMPPair.make(
        CFG3, 1, x3, GradedElement.make(CFG3, x3, -1, {(0, 1): 1})
    )
    reg3 = DMPPair.make(
        CFG3, 1, x3, GradedElement.make(CFG3, x3, -1, {(0, 1): 1, (1, 2): 1})
    )
    orbits = [OrbitLabel.of((1, 1, 1)), OrbitLabel.of((2, 1)), OrbitLabel.of((3,))]
    probes = ProbeSet.make(CFG3, [zero3, sub3, reg3], K=1)
    table = build_measure_table(CFG3, probes, orbits)
    for i in range(3):
        for j in range(3):
            if j < i:
                assert table.entries[i][j] == 0
            if i == j:
                assert table.entries[i][j] > 0
    assert independence_check(table)


def test_single_regular_probe_row():
    # probe with regular lift: zero against every smaller orbit
    assert count_measure(CFG2, O11, REG_PAIR, 2) == 0
    x3 = pt(0, 0, 0)
    reg3 = DMPPair.make(
        CFG3, 1, x3, GradedElement.make(CFG3, x3, -1, {(0, 1): 1, (1, 2): 1})
    )
    lam3 = shared_lattice(CFG3, [reg3])
    assert count_measure(CFG3, OrbitLabel.of((1, 1, 1)), reg3, 1, lam3) == 0
    assert count_measure(CFG3, OrbitLabel.of((2, 1)), reg3, 1, lam3) == 0
    assert count_measure(CFG3, OrbitLabel.of((3,)), reg3, 1, lam3) > 0
