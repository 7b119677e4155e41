import random
from fractions import Fraction

import pytest

from nilwork.exact_linear import (DimensionError, IntLattice, LatticeError,
                                  RationalNilMatrix, UniMatrix, ext_gcd, hnf,
                                  identity_rows, integer_kernel, mat_sub,
                                  mat_transpose, mat_vec, preimage_lattice,
                                  snf, solve_integer, solve_rational,
                                  unipotent_exp, unipotent_log)


def rand_unitriangular(rng, n, lo=-9, hi=9):
    rows = [[1 if i == j else (rng.randint(lo, hi) if j > i else 0)
             for j in range(n)] for i in range(n)]
    return UniMatrix(rows)


def det_fraction(rows):
    """Independent determinant via fraction Gaussian elimination."""
    n = len(rows)
    work = [[Fraction(x) for x in r] for r in rows]
    det = Fraction(1)
    for c in range(n):
        piv = next((i for i in range(c, n) if work[i][c]), None)
        if piv is None:
            return Fraction(0)
        if piv != c:
            work[c], work[piv] = work[piv], work[c]
            det = -det
        det *= work[c][c]
        inv = 1 / work[c][c]
        for i in range(c + 1, n):
            f = work[i][c] * inv
            if f:
                work[i] = [x - f * y for x, y in zip(work[i], work[c])]
    return det


def test_ext_gcd():
    for a, b in [(12, 18), (-12, 18), (0, 5), (7, 0), (0, 0), (1, 1)]:
        g, s, t = ext_gcd(a, b)
        assert s * a + t * b == g >= 0


class TestUniMatrix:
    def test_identity_mul(self):
        x = UniMatrix([[1, 4, 2], [0, 1, -1], [0, 0, 1]])
        assert UniMatrix.identity(3) * x == x

    def test_shear_power(self):
        assert UniMatrix([[1, 1], [0, 1]]) ** 3 == UniMatrix([[1, 3], [0, 1]])

    def test_negative_power(self):
        a = UniMatrix([[1, 2, 6], [0, 1, 3], [0, 0, 1]])
        assert a ** -2 == (a.inverse()) ** 2
        assert (a ** -1) * a == UniMatrix.identity(3)

    def test_self_commutator(self):
        a = UniMatrix([[1, 2, 6], [0, 1, 3], [0, 0, 1]])
        assert a.commutator(a).is_identity()

    def test_rejects_bad_shape(self):
        with pytest.raises(ValueError):
            UniMatrix([[1, 0], [1, 1]])
        with pytest.raises(ValueError):
            UniMatrix([[2, 0], [0, 1]])
        with pytest.raises(DimensionError):
            UniMatrix([[1, 0, 0], [0, 1, 0]])

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            UniMatrix.identity(2) * UniMatrix.identity(3)

    def test_arith_preserves_unitriangular(self):
        # 10^4 random mul/inv/pow compositions; UniMatrix validates on build.
        # Reset every few steps so bigint entries stay desk-sized.
        rng = random.Random(7)
        cur = UniMatrix.identity(4)
        for step in range(10_000):
            op = rng.randrange(3)
            if op == 0:
                cur = cur * rand_unitriangular(rng, 4, -3, 3)
            elif op == 1:
                cur = cur.inverse()
            else:
                cur = cur ** rng.randint(-2, 2)
            if step % 8 == 7:
                cur = rand_unitriangular(rng, 4, -3, 3)
        assert cur.rows[1][0] == 0  # construction re-validated throughout


class TestHnf:
    def test_worked_example(self):
        assert hnf([(2, 0, 0), (6, 3, 0)], 3).basis == ((2, 0, 0), (0, 3, 0))

    def test_empty(self):
        lat = hnf([], 3)
        assert lat.rank == 0 and lat.is_zero()

    def test_standard_basis(self):
        lat = hnf(identity_rows(3), 3)
        assert lat.is_full() and lat.rank == 3

    def test_idempotent_and_order_independent(self):
        rng = random.Random(3)
        for _ in range(300):
            a = rng.randint(1, 5)
            rows = [tuple(rng.randint(-9, 9) for _ in range(a))
                    for _ in range(rng.randint(0, 6))]
            lat = hnf(rows, a)
            shuffled = list(rows)
            rng.shuffle(shuffled)
            assert hnf(shuffled, a) == lat
            assert hnf(lat.basis, a) == lat
            # every input row is a member
            for r in rows:
                assert lat.contains(r)

    def test_canonical_form(self):
        lat = hnf([(4, 7, 2), (0, 3, 9), (0, 0, 5)], 3)
        for row, c in zip(lat.basis, lat.pivot_cols):
            assert row[c] > 0
            for above in lat.basis:
                if above is row:
                    break
                assert 0 <= above[c] < row[c]


class TestLatticeQueries:
    def test_member(self):
        lat = hnf([(2, 0, 0), (0, 3, 0)], 3)
        assert lat.contains((2, 0, 0))
        assert not lat.contains((1, 0, 0))
        assert lat.contains((0, 0, 0))
        assert lat.contains((4, 9, 0))
        assert not lat.contains((0, 0, 1))

    def test_sum_and_intersect(self):
        a = hnf([(2, 0)], 2)
        b = hnf([(3, 0)], 2)
        assert (a + b) == hnf([(1, 0)], 2)
        assert a.intersect(b) == hnf([(6, 0)], 2)

    def test_intersect_fuzz(self):
        rng = random.Random(11)
        for _ in range(120):
            amb = rng.randint(1, 4)
            a = hnf([tuple(rng.randint(-6, 6) for _ in range(amb))
                     for _ in range(rng.randint(0, 3))], amb)
            b = hnf([tuple(rng.randint(-6, 6) for _ in range(amb))
                     for _ in range(rng.randint(0, 3))], amb)
            meet = a.intersect(b)
            for row in meet.basis:
                assert a.contains(row) and b.contains(row)
            join = a + b
            for row in a.basis + b.basis:
                assert join.contains(row)
            # the meet absorbs scaled members of both
            for row in a.basis:
                scaled = tuple(x * 6 for x in row)
                if b.contains(scaled):
                    assert meet.contains(scaled) or not a.contains(scaled)

    def test_index_examples(self):
        full2 = hnf([(1, 0, 0), (0, 1, 0)], 3)
        assert hnf([(2, 0, 0), (0, 3, 0)], 3).index_in(full2) == 6
        assert hnf([(2, 0, 0)], 3).index_in(full2) is None
        with pytest.raises(LatticeError):
            full2.index_in(hnf([(2, 0, 0), (0, 3, 0)], 3))

    def test_index_multiplicativity(self):
        # L <= M <= N of equal rank: index(L,N) = index(L,M) * index(M,N),
        # cross-checked against an independent fraction determinant.
        rng = random.Random(5)
        for _ in range(80):
            k = rng.randint(1, 3)
            amb = k + rng.randint(0, 2)
            base = None
            while base is None or len(hnf(base, amb).basis) != k:
                base = [tuple(rng.randint(-4, 4) for _ in range(amb))
                        for _ in range(k)]
            n_lat = hnf(base, amb)

            def scaled_sub(lat):
                t = [[rng.randint(-3, 3) for _ in range(k)] for _ in range(k)]
                while det_fraction(t) == 0:
                    t = [[rng.randint(-3, 3) for _ in range(k)] for _ in range(k)]
                rows = []
                for trow in t:
                    vec = [0] * amb
                    for coef, brow in zip(trow, lat.basis):
                        for i in range(amb):
                            vec[i] += coef * brow[i]
                    rows.append(tuple(vec))
                return hnf(rows, amb), abs(det_fraction(t))

            m_lat, det1 = scaled_sub(n_lat)
            l_lat, det2 = scaled_sub(m_lat)
            i_ln = l_lat.index_in(n_lat)
            i_lm = l_lat.index_in(m_lat)
            i_mn = m_lat.index_in(n_lat)
            assert i_ln == i_lm * i_mn
            assert i_mn == det1 and i_lm == det2


class TestKernelPreimage:
    def test_kernel_worked_example(self):
        a = UniMatrix([[1, 2, 6], [0, 1, 3], [0, 0, 1]])
        ami = mat_sub(a.rows, identity_rows(3))
        assert integer_kernel(ami, 3) == hnf([(1, 0, 0)], 3)

    def test_kernel_trivial_cases(self):
        assert integer_kernel([(0, 0, 0)], 3).is_full()
        assert integer_kernel(identity_rows(4), 4).is_zero()

    def test_preimage_worked_example(self):
        a = UniMatrix([[1, 2, 6], [0, 1, 3], [0, 0, 1]])
        ami = mat_sub(a.rows, identity_rows(3))
        pre = preimage_lattice(ami, hnf([(1, 0, 0)], 3))
        assert pre == hnf([(1, 0, 0), (0, 1, 0)], 3)

    def test_preimage_trivial_cases(self):
        m = [(1, 2), (3, 4)]
        assert preimage_lattice(m, IntLattice.full(2)).is_full()
        zero = [(0, 0), (0, 0)]
        assert preimage_lattice(zero, hnf([(5, 0)], 2)).is_full()

    def test_preimage_fuzz(self):
        rng = random.Random(17)
        for _ in range(150):
            p, q = rng.randint(1, 4), rng.randint(1, 4)
            m = [tuple(rng.randint(-5, 5) for _ in range(q)) for _ in range(p)]
            lat = hnf([tuple(rng.randint(-5, 5) for _ in range(p))
                       for _ in range(rng.randint(0, 3))], p)
            pre = preimage_lattice(m, lat)
            for b in pre.basis:
                assert lat.contains(mat_vec(m, b))
            ker = integer_kernel(m, q)
            assert pre.contains_lattice(ker)

    def test_solve_integer(self):
        rng = random.Random(23)
        for _ in range(200):
            p, q = rng.randint(1, 4), rng.randint(1, 4)
            m = [tuple(rng.randint(-5, 5) for _ in range(q)) for _ in range(p)]
            x = tuple(rng.randint(-4, 4) for _ in range(q))
            t = mat_vec(m, x)
            sol = solve_integer(m, t)
            assert sol is not None
            assert mat_vec(m, sol) == t
        assert solve_integer([(2, 0), (0, 2)], (1, 0)) is None

    def test_solve_rational(self):
        sol = solve_rational([(2, 0), (0, 4)], (1, 2))
        assert sol == (Fraction(1, 2), Fraction(1, 2))
        assert solve_rational([(1, 0), (1, 0)], (1, 2)) is None


def test_saturation():
    assert hnf([(2, 0, 0), (0, 3, 0)], 3).saturation() == hnf([(1, 0, 0), (0, 1, 0)], 3)
    assert hnf([(2, 4)], 2).saturation() == hnf([(1, 2)], 2)
    full = IntLattice.full(3)
    assert full.saturation() == full


def test_snf():
    inv, u, v = snf([[2, 0], [0, 3]])
    assert inv == [1, 6]
    rng = random.Random(29)
    for _ in range(60):
        m, n = rng.randint(1, 4), rng.randint(1, 4)
        a = [[rng.randint(-6, 6) for _ in range(n)] for _ in range(m)]
        inv, u, v = snf(a)
        prod = [[sum(u[i][k] * a[k][j] for k in range(m)) for j in range(n)]
                for i in range(m)]
        prod = [[sum(prod[i][k] * v[k][j] for k in range(n)) for j in range(n)]
                for i in range(m)]
        for i in range(m):
            for j in range(n):
                if i == j and i < len(inv):
                    assert prod[i][j] == inv[i]
                else:
                    assert prod[i][j] == 0
        for a_, b_ in zip(inv, inv[1:]):
            assert b_ % a_ == 0
        assert abs(det_fraction(u)) == 1
        assert abs(det_fraction(v)) == 1


class TestLogExp:
    def test_log_identity(self):
        assert unipotent_log(UniMatrix.identity(3)).is_zero()

    def test_log_shear(self):
        lg = unipotent_log(UniMatrix([[1, 1], [0, 1]]))
        assert lg == RationalNilMatrix([[0, 1], [0, 0]])

    def test_log_worked_example(self):
        lg = unipotent_log(UniMatrix([[1, 2, 6], [0, 1, 3], [0, 0, 1]]))
        assert lg == RationalNilMatrix([[0, 2, 3], [0, 0, 3], [0, 0, 0]])

    def test_exp_log_roundtrip(self):
        # 10^3 random unit upper triangular matrices of dimension <= 6
        rng = random.Random(41)
        for _ in range(1000):
            n = rng.randint(1, 6)
            u = rand_unitriangular(rng, n)
            assert unipotent_exp(unipotent_log(u)) == u

    def test_log_additive_on_commuting(self):
        rng = random.Random(43)
        for _ in range(50):
            n = rng.randint(2, 5)
            a = rand_unitriangular(rng, n, -4, 4)
            b = a ** rng.randint(-3, 3)
            la, lb, lab = unipotent_log(a), unipotent_log(b), unipotent_log(a * b)
            assert lab == la + lb

    def test_exp_rejects_non_integral(self):
        x = RationalNilMatrix([[0, Fraction(1, 2)], [0, 0]])
        with pytest.raises(ValueError):
            unipotent_exp(x)
