"""Exact integer linear algebra: unit upper triangular matrices, canonical
Hermite-form lattices, integer kernels/preimages, and the terminating
log/exp pair for unipotent matrices.

Everything here is over Z (or Q via fractions.Fraction); no floating point.
"""

from __future__ import annotations

from fractions import Fraction


class DimensionError(ValueError):
    """Operands have incompatible dimensions."""


class LatticeError(ValueError):
    """A lattice query was made outside its precondition."""


def ext_gcd(a, b):
    """Return (g, s, t) with s*a + t*b = g = gcd(a, b) >= 0."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


# ---------------------------------------------------------------------------
# plain row-tuple matrix helpers (used for the non-unitriangular matrices
# that show up as A - I, stacked systems, etc.)

def mat_vec(rows, v):
    return tuple(sum(r[j] * v[j] for j in range(len(v))) for r in rows)


def mat_mul(a, b):
    bt = tuple(zip(*b))
    return tuple(tuple(sum(x * y for x, y in zip(row, col)) for col in bt) for row in a)


def mat_transpose(rows):
    return tuple(zip(*rows))


def mat_sub(a, b):
    return tuple(tuple(x - y for x, y in zip(ra, rb)) for ra, rb in zip(a, b))


def identity_rows(n, one=1, zero=0):
    return tuple(tuple(one if i == j else zero for j in range(n)) for i in range(n))


class UniMatrix:
    """Unit upper triangular matrix over Z: 1s on the diagonal, 0s below.

    Immutable and hashable; multiplication, inversion and integer powers stay
    inside the class by construction.
    """

    __slots__ = ("n", "rows")

    def __init__(self, rows):
        rows = tuple(tuple(int(x) for x in row) for row in rows)
        n = len(rows)
        for i, row in enumerate(rows):
            if len(row) != n:
                raise DimensionError("row %d has length %d, expected %d" % (i, len(row), n))
            if row[i] != 1:
                raise ValueError("diagonal entry (%d,%d) is %d, must be 1" % (i, i, row[i]))
            for j in range(i):
                if row[j] != 0:
                    raise ValueError("entry (%d,%d) below the diagonal is %d" % (i, j, row[j]))
        self.n = n
        self.rows = rows

    @classmethod
    def identity(cls, n):
        return cls(identity_rows(n))

    def __mul__(self, other):
        if not isinstance(other, UniMatrix):
            return NotImplemented
        if self.n != other.n:
            raise DimensionError("cannot multiply %dx%d by %dx%d" % (self.n, self.n, other.n, other.n))
        return UniMatrix(mat_mul(self.rows, other.rows))

    def inverse(self):
        # (I + N)^-1 = I - N + N^2 - ...; N = self - I is nilpotent of order <= n
        n = self.n
        nil = mat_sub(self.rows, identity_rows(n))
        acc = identity_rows(n)
        power = identity_rows(n)
        sign = 1
        for _ in range(1, n):
            power = mat_mul(power, nil)
            sign = -sign
            acc = tuple(tuple(x + sign * y for x, y in zip(ra, rb)) for ra, rb in zip(acc, power))
        return UniMatrix(acc)

    def __pow__(self, e):
        e = int(e)
        if e < 0:
            return self.inverse() ** (-e)
        result = UniMatrix.identity(self.n)
        base = self
        while e:
            if e & 1:
                result = result * base
            base = base * base
            e >>= 1
        return result

    def commutator(self, other):
        """[a, b] = a^-1 b^-1 a b."""
        return self.inverse() * other.inverse() * self * other

    def apply(self, v):
        if len(v) != self.n:
            raise DimensionError("vector length %d, matrix size %d" % (len(v), self.n))
        return mat_vec(self.rows, v)

    def is_identity(self):
        return all(self.rows[i][j] == (1 if i == j else 0)
                   for i in range(self.n) for j in range(i, self.n))

    def __eq__(self, other):
        return isinstance(other, UniMatrix) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        return "UniMatrix(%r)" % (self.rows,)


def _hnf_rows(rows, ambient, want_transform=False):
    """Row-style Hermite normal form.

    Walks the columns left to right; for each column the nonzero entries at or
    below the current pivot row are combined into a single positive pivot with
    unimodular 2x2 row blocks, and every entry above the pivot is reduced into
    [0, pivot).  The result is the unique canonical basis of the row span:
    pivot columns are determined by the rational row space, so two inputs with
    the same span reduce to identical bases.

    Returns (basis_rows, pivot_cols) or (basis_rows, pivot_cols, U, m) with U
    an m x m unimodular matrix satisfying U * input = echelon (zero rows last).
    """
    work = [list(map(int, r)) for r in rows]
    m = len(work)
    for r in work:
        if len(r) != ambient:
            raise DimensionError("row of length %d in ambient %d" % (len(r), ambient))
    U = [[1 if i == j else 0 for j in range(m)] for i in range(m)] if want_transform else None
    rank = 0
    pivot_cols = []
    for c in range(ambient):
        piv = None
        for i in range(rank, m):
            if work[i][c]:
                piv = i
                break
        if piv is None:
            continue
        if piv != rank:
            work[rank], work[piv] = work[piv], work[rank]
            if want_transform:
                U[rank], U[piv] = U[piv], U[rank]
        for i in range(rank + 1, m):
            if not work[i][c]:
                continue
            a, b = work[rank][c], work[i][c]
            g, s, t = ext_gcd(a, b)
            u, v = a // g, b // g
            row_r, row_i = work[rank], work[i]
            work[rank] = [s * x + t * y for x, y in zip(row_r, row_i)]
            work[i] = [u * y - v * x for x, y in zip(row_r, row_i)]
            if want_transform:
                ur, ui = U[rank], U[i]
                U[rank] = [s * x + t * y for x, y in zip(ur, ui)]
                U[i] = [u * y - v * x for x, y in zip(ur, ui)]
        if work[rank][c] < 0:
            work[rank] = [-x for x in work[rank]]
            if want_transform:
                U[rank] = [-x for x in U[rank]]
        p = work[rank][c]
        for i in range(rank):
            q = work[i][c] // p
            if q:
                work[i] = [x - q * y for x, y in zip(work[i], work[rank])]
                if want_transform:
                    U[i] = [x - q * y for x, y in zip(U[i], U[rank])]
        pivot_cols.append(c)
        rank += 1
    basis = tuple(tuple(r) for r in work[:rank])
    if want_transform:
        return basis, tuple(pivot_cols), tuple(tuple(r) for r in U), m
    return basis, tuple(pivot_cols)


class IntLattice:
    """Sublattice of Z^ambient held as its canonical row-HNF basis.

    Canonical form makes equality structural: two IntLattice values describe
    the same sublattice iff their stored bases are identical.
    """

    __slots__ = ("ambient", "basis", "pivot_cols")

    def __init__(self, ambient, basis, pivot_cols):
        self.ambient = ambient
        self.basis = basis
        self.pivot_cols = pivot_cols

    @classmethod
    def span(cls, rows, ambient):
        basis, pivots = _hnf_rows(rows, ambient)
        return cls(ambient, basis, pivots)

    @classmethod
    def zero(cls, ambient):
        return cls(ambient, (), ())

    @classmethod
    def full(cls, ambient):
        return cls.span(identity_rows(ambient), ambient)

    @property
    def rank(self):
        return len(self.basis)

    def is_full(self):
        # full means equal to Z^ambient, not merely full rank
        return self.rank == self.ambient and all(
            row[c] == 1 for row, c in zip(self.basis, self.pivot_cols))

    def is_zero(self):
        return self.rank == 0

    def contains(self, v):
        if len(v) != self.ambient:
            raise DimensionError("vector length %d, ambient %d" % (len(v), self.ambient))
        v = list(v)
        for row, c in zip(self.basis, self.pivot_cols):
            if v[c] % row[c]:
                return False
            q = v[c] // row[c]
            if q:
                v = [x - q * y for x, y in zip(v, row)]
        return not any(v)

    def contains_lattice(self, other):
        if self.ambient != other.ambient:
            raise DimensionError("ambients differ: %d vs %d" % (self.ambient, other.ambient))
        return all(self.contains(r) for r in other.basis)

    def __add__(self, other):
        if self.ambient != other.ambient:
            raise DimensionError("ambients differ")
        return IntLattice.span(self.basis + other.basis, self.ambient)

    def intersect(self, other):
        if self.ambient != other.ambient:
            raise DimensionError("ambients differ")
        if self.is_zero() or other.is_zero():
            return IntLattice.zero(self.ambient)
        # (u, w) with u*B1 + w*B2 = 0 pairs each intersection vector u*B1
        # with its negative in the other basis; kernel of the stacked map.
        stacked_cols = self.basis + other.basis  # rows of the transposed map
        kern = integer_kernel(mat_transpose(stacked_cols), len(stacked_cols))
        r1 = self.rank
        vecs = []
        for k in kern.basis:
            u = k[:r1]
            vec = [0] * self.ambient
            for coef, row in zip(u, self.basis):
                for j in range(self.ambient):
                    vec[j] += coef * row[j]
            vecs.append(tuple(vec))
        return IntLattice.span(vecs, self.ambient)

    def index_in(self, other):
        """[other : self] for self <= other; None means infinite index."""
        if not other.contains_lattice(self):
            raise LatticeError("index requested for a non-sublattice")
        if self.rank < other.rank:
            return None
        num = 1
        for row, c in zip(self.basis, self.pivot_cols):
            num *= row[c]
        den = 1
        for row, c in zip(other.basis, other.pivot_cols):
            den *= row[c]
        if num % den:
            raise LatticeError("pivot products not divisible; broken containment")
        return num // den

    def saturation(self):
        """Smallest lattice containing self whose quotient in Z^a is torsion-free."""
        if self.is_zero() or self.is_full():
            return self
        comp = integer_kernel(self.basis, self.ambient)
        return integer_kernel(comp.basis, self.ambient)

    def __eq__(self, other):
        return (isinstance(other, IntLattice) and self.ambient == other.ambient
                and self.basis == other.basis)

    def __hash__(self):
        return hash((self.ambient, self.basis))

    def __repr__(self):
        return "IntLattice(ambient=%d, basis=%r)" % (self.ambient, self.basis)


def hnf(rows, ambient):
    """Canonical HNF lattice spanned by the given rows of Z^ambient."""
    return IntLattice.span(rows, ambient)


def integer_kernel(rows, ncols=None):
    """All integer v with M v = 0, for M given by its rows."""
    rows = [tuple(r) for r in rows]
    if ncols is None:
        if not rows:
            raise ValueError("ncols required for an empty matrix")
        ncols = len(rows[0])
    if not rows:
        return IntLattice.full(ncols)
    p = len(rows)
    at = mat_transpose(rows)  # ncols rows of length p; u*At = M u
    basis, _, U, m = _hnf_rows(at, p, want_transform=True)
    kern_rows = U[len(basis):]
    return IntLattice.span(kern_rows, ncols)


def solve_integer(rows, target):
    """One integer solution x of M x = target, or None.

    Reduces the target against the HNF of the columns of M and maps the
    coefficients back through the recorded transform.
    """
    rows = [tuple(r) for r in rows]
    if not rows:
        return None if any(target) else ()
    p = len(rows)
    q = len(rows[0])
    if len(target) != p:
        raise DimensionError("target length %d, expected %d" % (len(target), p))
    cols = mat_transpose(rows)  # q rows: the columns of M
    basis, pivot_cols, U, m = _hnf_rows(cols, p, want_transform=True)
    t = list(target)
    coeffs = [0] * len(basis)
    for idx, (row, c) in enumerate(zip(basis, pivot_cols)):
        if t[c] % row[c]:
            return None
        k = t[c] // row[c]
        coeffs[idx] = k
        if k:
            t = [x - k * y for x, y in zip(t, row)]
    if any(t):
        return None
    x = [0] * q
    for k, urow in zip(coeffs, U):
        if k:
            for j in range(q):
                x[j] += k * urow[j]
    return tuple(x)


def preimage_lattice(rows, lat):
    """Canonical lattice {v : M v in lat}; always contains the kernel of M."""
    rows = [tuple(r) for r in rows]
    if not rows:
        raise ValueError("empty matrix has no well-defined domain; pass explicit rows")
    p = len(rows)
    q = len(rows[0])
    if lat.ambient != p:
        raise DimensionError("lattice ambient %d, matrix has %d rows" % (lat.ambient, p))
    if lat.is_full():
        return IntLattice.full(q)
    if lat.is_zero():
        return integer_kernel(rows, q)
    stacked = [rows[i] + tuple(-b[i] for b in lat.basis) for i in range(p)]
    kern = integer_kernel(stacked, q + lat.rank)
    return IntLattice.span([k[:q] for k in kern.basis], q)


def snf(rows, ncols=None):
    """Smith normal form: (invariants, U, V) with U * M * V diagonal, d1 | d2 | ...

    U and V are unimodular; invariants lists the nonzero diagonal entries.
    """
    rows = [list(map(int, r)) for r in rows]
    if ncols is None:
        if not rows:
            raise ValueError("ncols required for an empty matrix")
        ncols = len(rows[0])
    m, n = len(rows), ncols
    A = [list(r) for r in rows]
    U = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    V = [[1 if i == j else 0 for j in range(n)] for i in range(n)]

    def row_op(i, k, a, b, c, d):  # rows i,k <- (a*ri + b*rk, c*ri + d*rk)
        A[i], A[k] = ([a * x + b * y for x, y in zip(A[i], A[k])],
                      [c * x + d * y for x, y in zip(A[i], A[k])])
        U[i], U[k] = ([a * x + b * y for x, y in zip(U[i], U[k])],
                      [c * x + d * y for x, y in zip(U[i], U[k])])

    def col_op(j, k, a, b, c, d):
        for rowset in (A, V):
            for r in rowset:
                r[j], r[k] = a * r[j] + b * r[k], c * r[j] + d * r[k]

    def clear_pass(t):
        # One sweep clearing column t below and row t to the right.  Entries
        # divisible by the pivot fall to elementary operations (which leave
        # the pivot row and column alone); otherwise a gcd combine strictly
        # shrinks |pivot|, so the outer loop terminates.
        dirty = False
        for i in range(t + 1, m):
            x = A[i][t]
            if not x:
                continue
            p = A[t][t]
            if x % p == 0:
                row_op(t, i, 1, 0, -(x // p), 1)
            else:
                g, s, u = ext_gcd(p, x)
                row_op(t, i, s, u, -(x // g), p // g)
                dirty = True
        for j in range(t + 1, n):
            x = A[t][j]
            if not x:
                continue
            p = A[t][t]
            if x % p == 0:
                col_op(t, j, 1, 0, -(x // p), 1)
            else:
                g, s, u = ext_gcd(p, x)
                col_op(t, j, s, u, -(x // g), p // g)
                dirty = True
        return dirty

    t = 0
    while t < m and t < n:
        piv = next(((i, j) for i in range(t, m) for j in range(t, n) if A[i][j]), None)
        if piv is None:
            break
        i0, j0 = piv
        if i0 != t:
            row_op(t, i0, 0, 1, 1, 0)
        if j0 != t:
            col_op(t, j0, 0, 1, 1, 0)
        while True:
            while clear_pass(t):
                pass
            if any(A[i][t] for i in range(t + 1, m)) or \
               any(A[t][j] for j in range(t + 1, n)):
                continue
            bad = next(((i, j) for i in range(t + 1, m) for j in range(t + 1, n)
                        if A[i][j] % A[t][t]), None)
            if bad is None:
                break
            row_op(t, bad[0], 1, 1, 0, 1)  # pull the offending row in and redo
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            U[t] = [-x for x in U[t]]
        t += 1
    invariants = [A[i][i] for i in range(min(m, n)) if A[i][i]]
    return invariants, tuple(tuple(r) for r in U), tuple(tuple(r) for r in V)


def solve_rational(rows, target):
    """One exact rational solution of M x = target (free variables 0), or None."""
    if not rows:
        return None if any(target) else ()
    m = len(rows)
    n = len(rows[0])
    aug = [[Fraction(x) for x in rows[i]] + [Fraction(target[i])] for i in range(m)]
    pivots = []
    r = 0
    for c in range(n):
        piv = next((i for i in range(r, m) if aug[i][c]), None)
        if piv is None:
            continue
        aug[r], aug[piv] = aug[piv], aug[r]
        inv = 1 / aug[r][c]
        aug[r] = [x * inv for x in aug[r]]
        for i in range(m):
            if i != r and aug[i][c]:
                f = aug[i][c]
                aug[i] = [x - f * y for x, y in zip(aug[i], aug[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    for i in range(r, m):
        if aug[i][n]:
            return None
    x = [Fraction(0)] * n
    for i, c in enumerate(pivots):
        x[c] = aug[i][n]
    return tuple(x)


def rational_kernel(rows, ncols):
    """Integer-lattice kernel of a matrix with Fraction entries."""
    cleared = []
    for r in rows:
        r = [Fraction(x) for x in r]
        scale = 1
        for x in r:
            scale = scale * x.denominator // _gcd(scale, x.denominator)
        cleared.append(tuple(int(x * scale) for x in r))
    return integer_kernel(cleared, ncols)


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return abs(a)


class RationalNilMatrix:
    """Strictly upper triangular matrix with exact rational entries."""

    __slots__ = ("n", "rows")

    def __init__(self, rows):
        rows = tuple(tuple(Fraction(x) for x in row) for row in rows)
        n = len(rows)
        for i, row in enumerate(rows):
            if len(row) != n:
                raise DimensionError("row %d has length %d, expected %d" % (i, len(row), n))
            for j in range(i + 1):
                if row[j] != 0:
                    raise ValueError("entry (%d,%d) = %s not strictly upper" % (i, j, row[j]))
        self.n = n
        self.rows = rows

    @classmethod
    def zero(cls, n):
        return cls(tuple(tuple(0 for _ in range(n)) for _ in range(n)))

    def __add__(self, other):
        if self.n != other.n:
            raise DimensionError("sizes differ")
        return RationalNilMatrix(tuple(tuple(x + y for x, y in zip(a, b))
                                       for a, b in zip(self.rows, other.rows)))

    def scale(self, k):
        return RationalNilMatrix(tuple(tuple(Fraction(k) * x for x in row) for row in self.rows))

    def matmul(self, other):
        return RationalNilMatrix(mat_mul(self.rows, other.rows))

    def is_zero(self):
        return all(x == 0 for row in self.rows for x in row)

    def __eq__(self, other):
        return isinstance(other, RationalNilMatrix) and self.rows == other.rows

    def __hash__(self):
        return hash(self.rows)

    def __repr__(self):
        return "RationalNilMatrix(%r)" % (self.rows,)


def nil_log_rows(rows, n):
    """log(I + N) = N - N^2/2 + ... for N = rows - I nilpotent; exact, terminates."""
    ident = identity_rows(n, one=Fraction(1), zero=Fraction(0))
    nil = tuple(tuple(Fraction(x) - Fraction(e) for x, e in zip(r, i))
                for r, i in zip(rows, ident))
    acc = tuple(tuple(Fraction(0) for _ in range(n)) for _ in range(n))
    power = ident
    for k in range(1, n):
        power = mat_mul(power, nil)
        coef = Fraction((-1) ** (k + 1), k)
        acc = tuple(tuple(a + coef * p for a, p in zip(ra, rp)) for ra, rp in zip(acc, power))
    return acc


def nil_exp_rows(rows, n):
    """exp(N) = I + N + N^2/2! + ... for nilpotent N; exact, terminates."""
    ident = identity_rows(n, one=Fraction(1), zero=Fraction(0))
    acc = ident
    power = ident
    fact = 1
    for k in range(1, n):
        power = mat_mul(power, rows)
        fact *= k
        acc = tuple(tuple(a + p / fact for a, p in zip(ra, rp)) for ra, rp in zip(acc, power))
    return acc


def unipotent_log(u):
    """Exact logarithm of a unit upper triangular matrix (the series terminates)."""
    return RationalNilMatrix(nil_log_rows(u.rows, u.n))


def unipotent_exp(x):
    """Exact exponential of a strictly upper rational matrix; must land in UT(n, Z)."""
    rows = nil_exp_rows(x.rows, x.n)
    out = []
    for row in rows:
        ints = []
        for v in row:
            if v.denominator != 1:
                raise ValueError("exp has non-integer entry %s; not a UT(n,Z) element" % (v,))
            ints.append(int(v))
        out.append(tuple(ints))
    return UniMatrix(out)
