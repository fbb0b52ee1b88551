"""Exact Laurent arithmetic, ranks and characteristic polynomials."""

from mptypes.laurent import Laurent, LMatrix, commutator


def L(q, *terms):
    return Laurent.from_dict(q, {e: c for e, c in terms})


def test_laurent_ring_ops():
    q = 5
    a = L(q, (-1, 2), (0, 3))
    b = L(q, (-1, 3), (2, 1))
    assert (a + b) == L(q, (0, 3), (2, 1))  # 2+3 = 0 mod 5
    assert (a - a).is_zero()
    assert a * Laurent.zero(q) == Laurent.zero(q)
    prod = a * b
    # (2t^-1 + 3)(3t^-1 + t^2) = 6t^-2 + 9t^-1 + 2t + 3t^2
    assert prod == L(q, (-2, 1), (-1, 4), (1, 2), (2, 3))
    assert a.shift(2) == L(q, (1, 2), (2, 3))


def test_divexact_including_laurent_shifts():
    q = 5
    a = L(q, (0, 1), (1, 2))  # 1 + 2t
    b = L(q, (2, 3))  # 3t^2
    prod = a * b
    assert prod.divexact(b) == a
    assert prod.divexact(a) == b
    # quotient with negative exponents
    c = L(q, (-3, 2))
    assert (a * c).divexact(a) == c


def mat(q, entries):
    return LMatrix.from_rows(
        q, [[L(q, *e) if e else Laurent.zero(q) for e in row] for row in entries]
    )


def test_charpoly_and_nilpotency():
    q = 5
    # t^-1 e_12 is nilpotent
    m = mat(q, [[(), ((-1, 1),)], [(), ()]])
    assert m.is_nilpotent()
    # e_11 pattern at level 1: char poly X^2 - t^-1 X
    m2 = mat(q, [[((-1, 1),), ()], [(), ()]])
    w = m2.nilpotency_witness()
    assert w is not None
    k, coeff = w
    assert k == 1 and coeff == L(q, (-1, 4))  # -t^-1 = 4t^-1


def test_charpoly_off_diagonal_product():
    q = 5
    # [[0, b t^-1], [c, 0]] has char poly X^2 - bc t^-1
    for b in range(5):
        for c in range(5):
            m = mat(q, [[(), ((-1, b),) if b else ()], [((0, c),) if c else (), ()]])
            assert m.is_nilpotent() == (b * c % q == 0)


def test_rank_over_function_field():
    q = 5
    m = mat(q, [[((0, 1),), ((1, 1),)], [((2, 1),), ((3, 1),)]])
    # rows are (1, t), (t^2, t^3) = t^2 (1, t): rank 1
    assert m.rank() == 1
    m2 = mat(q, [[((0, 1),), ((1, 1),)], [((2, 1),), ((4, 1),)]])
    assert m2.rank() == 2
    assert LMatrix.zero(q, 3).rank() == 0
    assert LMatrix.identity(q, 3).rank() == 3


def test_rank_with_cancellation():
    q = 5
    # (1+t, 1), (1, 1): det = t: rank 2
    m = mat(q, [[((0, 1), (1, 1)), ((0, 1),)], [((0, 1),), ((0, 1),)]])
    assert m.rank() == 2
    # (1+t, 1+t), (2, 2): rank 1
    m2 = mat(q, [[((0, 1), (1, 1)), ((0, 1), (1, 1))], [((0, 2),), ((0, 2),)]])
    assert m2.rank() == 1


def test_regular_nilpotent_rank_profile():
    q = 5
    m = mat(q, [[(), ((-1, 1),), ()], [(), (), ((-1, 1),)], [(), (), ()]])
    assert m.is_nilpotent()
    assert m.rank() == 2
    assert (m @ m).rank() == 1
    assert (m @ m @ m).rank() == 0


def test_commutator():
    q = 7
    a = mat(q, [[(), ((0, 1),)], [(), ()]])
    b = mat(q, [[(), ()], [((0, 1),), ()]])
    h = commutator(a, b)
    assert h.entry(0, 0) == L(q, (0, 1))
    assert h.entry(1, 1) == L(q, (0, 6))
