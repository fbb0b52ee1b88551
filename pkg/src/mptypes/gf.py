"""Exact linear algebra over small finite fields.

Prime fields are plain integers modulo q.  The coefficient fields
F_{l^a} used for eigenspace computations are polynomial arithmetic
modulo a deterministically chosen irreducible polynomial, so repeated
runs agree bit for bit.
"""

from __future__ import annotations

from typing import Iterable, List, Sequence, Tuple

from .errors import InternalFault, ValidationError

Vec = Tuple[int, ...]
Mat = Tuple[Vec, ...]


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def inv_mod(a: int, q: int) -> int:
    a %= q
    if a == 0:
        raise ZeroDivisionError("inverse of 0 in F_q")
    return pow(a, q - 2, q)


def identity(n: int) -> Mat:
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def mat_mul(a: Sequence[Sequence[int]], b: Sequence[Sequence[int]], q: int) -> Mat:
    nb = len(b[0]) if b else 0
    return tuple(
        tuple(sum(ra[k] * b[k][j] for k in range(len(b))) % q for j in range(nb))
        for ra in a
    )


def mat_vec(a: Sequence[Sequence[int]], v: Sequence[int], q: int) -> Vec:
    return tuple(sum(r[k] * v[k] for k in range(len(v))) % q for r in a)


def rref(rows: Iterable[Sequence[int]], q: int) -> Tuple[List[List[int]], List[int]]:
    """Row-reduce over F_q; returns (reduced nonzero rows, pivot columns)."""
    work = [list(r) for r in rows]
    pivots: List[int] = []
    r = 0
    ncols = len(work[0]) if work else 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(work)) if work[i][c] % q), None)
        if piv is None:
            continue
        work[r], work[piv] = work[piv], work[r]
        inv = inv_mod(work[r][c], q)
        work[r] = [x * inv % q for x in work[r]]
        for i in range(len(work)):
            if i != r and work[i][c] % q:
                f = work[i][c]
                work[i] = [(x - f * y) % q for x, y in zip(work[i], work[r])]
        pivots.append(c)
        r += 1
        if r == len(work):
            break
    return [row for row in work[:r]], pivots


def rank(rows: Iterable[Sequence[int]], q: int) -> int:
    return len(rref(rows, q)[1])


def kernel(rows: Sequence[Sequence[int]], ncols: int, q: int) -> List[Vec]:
    """Basis of {v : M v = 0} for the matrix with the given rows."""
    reduced, pivots = rref(rows, q)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for f in free:
        v = [0] * ncols
        v[f] = 1
        for i, c in enumerate(pivots):
            v[c] = (-reduced[i][f]) % q
        basis.append(tuple(v))
    return basis


def mat_inv(rows: Sequence[Sequence[int]], q: int) -> Mat:
    n = len(rows)
    aug = [list(rows[i]) + [1 if j == i else 0 for j in range(n)] for i in range(n)]
    reduced, pivots = rref(aug, q)
    if pivots != list(range(n)):
        raise ValidationError("matrix is singular over F_q", where="gf.mat_inv")
    return tuple(tuple(reduced[i][n:]) for i in range(n))


def in_span(v: Sequence[int], basis_rows: Sequence[Sequence[int]], q: int) -> bool:
    if not basis_rows:
        return all(x % q == 0 for x in v)
    return rank(list(basis_rows) + [list(v)], q) == rank(basis_rows, q)


def complement_basis(
    sub: Sequence[Sequence[int]], whole: Sequence[Sequence[int]], q: int
) -> List[Vec]:
    """Vectors from `whole` extending span(sub) to span(sub)+span(whole)."""
    current = [list(v) for v in sub]
    out: List[Vec] = []
    base_rank = rank(current, q) if current else 0
    for v in whole:
        cand = current + [list(v)]
        r = rank(cand, q)
        if r > base_rank:
            current = cand
            base_rank = r
            out.append(tuple(x % q for x in v))
    return out


# ---------------------------------------------------------------------------
# extension fields F_{l^a}
# ---------------------------------------------------------------------------


def _poly_mul_mod(a: Vec, b: Vec, modulus: Vec, ell: int) -> Vec:
    deg = len(modulus) - 1
    prod = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                prod[i + j] = (prod[i + j] + ai * bj) % ell
    # reduce modulo the monic modulus
    for i in range(len(prod) - 1, deg - 1, -1):
        c = prod[i]
        if c:
            prod[i] = 0
            for j in range(deg):
                prod[i - deg + j] = (prod[i - deg + j] - c * modulus[j]) % ell
    out = prod[:deg] + [0] * max(0, deg - len(prod))
    return tuple(out[:deg])


def _poly_is_irreducible(modulus: Vec, ell: int) -> bool:
    # f (monic, degree a) is irreducible iff x^(ell^a) == x mod f and
    # gcd-style check x^(ell^(a/r)) != x for every prime r | a.
    a = len(modulus) - 1
    x = tuple([0, 1] + [0] * (a - 2)) if a >= 2 else (0,)

    def frob_pow(k: int) -> Vec:
        y = x
        for _ in range(k):
            y = _poly_pow(y, ell, modulus, ell)
        return y

    if frob_pow(a) != x:
        return False
    r = 2
    aa = a
    primes = set()
    while aa > 1:
        while aa % r == 0:
            primes.add(r)
            aa //= r
        r += 1
    for p in primes:
        if frob_pow(a // p) == x:
            return False
    return True


def _poly_pow(base: Vec, e: int, modulus: Vec, ell: int) -> Vec:
    deg = len(modulus) - 1
    result = tuple([1] + [0] * (deg - 1))
    b = base
    while e:
        if e & 1:
            result = _poly_mul_mod(result, b, modulus, ell)
        b = _poly_mul_mod(b, b, modulus, ell)
        e >>= 1
    return result


def _find_modulus(ell: int, a: int) -> Vec:
    if a == 1:
        return (0, 1)
    # smallest monic irreducible in lexicographic order on low coefficients
    for code in range(ell**a):
        coeffs = []
        c = code
        for _ in range(a):
            coeffs.append(c % ell)
            c //= ell
        modulus = tuple(coeffs + [1])
        if _poly_is_irreducible(modulus, ell):
            return modulus
    raise InternalFault(f"no irreducible polynomial of degree {a} over F_{ell}")


class ExtField:
    """F_{l^a} with elements stored as coefficient tuples of length a."""

    def __init__(self, ell: int, a: int):
        if not is_prime(ell):
            raise ValidationError(f"l = {ell} is not prime", where="gf.ExtField")
        if a < 1:
            raise ValidationError("degree must be >= 1", where="gf.ExtField")
        self.ell = ell
        self.deg = a
        self.order = ell**a
        self.modulus = _find_modulus(ell, a)
        self.zero = tuple([0] * a)
        self.one = tuple([1] + [0] * (a - 1))

    def __repr__(self) -> str:
        return f"ExtField({self.ell}^{self.deg})"

    def add(self, x: Vec, y: Vec) -> Vec:
        return tuple((a + b) % self.ell for a, b in zip(x, y))

    def sub(self, x: Vec, y: Vec) -> Vec:
        return tuple((a - b) % self.ell for a, b in zip(x, y))

    def neg(self, x: Vec) -> Vec:
        return tuple((-a) % self.ell for a in x)

    def mul(self, x: Vec, y: Vec) -> Vec:
        return _poly_mul_mod(x, y, self.modulus, self.ell)

    def pow(self, x: Vec, e: int) -> Vec:
        if e < 0:
            return self.pow(self.inv(x), -e)
        return _poly_pow(x, e, self.modulus, self.ell)

    def inv(self, x: Vec) -> Vec:
        if x == self.zero:
            raise ZeroDivisionError("inverse of 0 in extension field")
        return self.pow(x, self.order - 2)

    def from_int(self, k: int) -> Vec:
        return tuple([k % self.ell] + [0] * (self.deg - 1))

    def elements(self):
        for code in range(self.order):
            coeffs = []
            c = code
            for _ in range(self.deg):
                coeffs.append(c % self.ell)
                c //= self.ell
            yield tuple(coeffs)

    def multiplicative_generator(self) -> Vec:
        m = self.order - 1
        primes = []
        mm, r = m, 2
        while mm > 1:
            if mm % r == 0:
                primes.append(r)
                while mm % r == 0:
                    mm //= r
            r += 1
        for g in self.elements():
            if g == self.zero:
                continue
            if all(self.pow(g, m // p) != self.one for p in primes):
                return g
        raise InternalFault("no multiplicative generator found")

    def root_of_unity(self, p: int) -> Vec:
        """A fixed primitive p-th root of unity; requires p | l^a - 1."""
        if (self.order - 1) % p:
            raise ValidationError(
                f"p = {p} does not divide {self.ell}^{self.deg} - 1",
                where="gf.ExtField.root_of_unity",
            )
        g = self.multiplicative_generator()
        return self.pow(g, (self.order - 1) // p)


def f_identity(n: int, field: ExtField) -> List[List[Vec]]:
    return [[field.one if i == j else field.zero for j in range(n)] for i in range(n)]


def f_mat_mul(a, b, field: ExtField):
    nb = len(b[0]) if b else 0
    out = []
    for ra in a:
        row = []
        for j in range(nb):
            acc = field.zero
            for k in range(len(b)):
                acc = field.add(acc, field.mul(ra[k], b[k][j]))
            row.append(acc)
        out.append(row)
    return out


def f_rref(rows, field: ExtField):
    work = [list(r) for r in rows]
    pivots: List[int] = []
    r = 0
    ncols = len(work[0]) if work else 0
    for c in range(ncols):
        piv = next((i for i in range(r, len(work)) if work[i][c] != field.zero), None)
        if piv is None:
            continue
        work[r], work[piv] = work[piv], work[r]
        inv = field.inv(work[r][c])
        work[r] = [field.mul(inv, x) for x in work[r]]
        for i in range(len(work)):
            if i != r and work[i][c] != field.zero:
                f = work[i][c]
                work[i] = [field.sub(x, field.mul(f, y)) for x, y in zip(work[i], work[r])]
        pivots.append(c)
        r += 1
        if r == len(work):
            break
    return work[:r], pivots


def f_rank(rows, field: ExtField) -> int:
    return len(f_rref(rows, field)[1])


def f_kernel(rows, ncols: int, field: ExtField):
    reduced, pivots = f_rref(rows, field)
    free = [c for c in range(ncols) if c not in pivots]
    basis = []
    for fcol in free:
        v = [field.zero] * ncols
        v[fcol] = field.one
        for i, c in enumerate(pivots):
            v[c] = field.neg(reduced[i][fcol])
        basis.append(v)
    return basis
