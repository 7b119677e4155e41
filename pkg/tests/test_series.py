import itertools
import random

from nilwork.exact_linear import (IntLattice, UniMatrix, hnf, identity_rows,
                                  mat_sub, mat_transpose)
from nilwork.matrix_model import MatrixGroup, ball
from nilwork.semidirect import SplitElement, build_split_group
from nilwork.series import (ball_series_report, coinciding_check,
                            in_upper_central_split, lcs, tightness_check_ball,
                            tightness_check_split, ucs_tower)
from nilwork.weights import WeightVector, template_matrix

SHEAR = UniMatrix([[1, 1], [0, 1]])


def heisenberg():
    return build_split_group(2, 1, [SHEAR])


def template23():
    return build_split_group(3, 1, [template_matrix(WeightVector(5, (2, 3)))])


def elem(n, i, j):
    rows = [[1 if a == b else 0 for b in range(n)] for a in range(n)]
    rows[i - 1][j - 1] = 1
    return UniMatrix(rows)


class TestLcs:
    def test_heisenberg(self):
        gam = lcs(heisenberg())
        assert gam[0] == hnf([(1, 0)], 2)
        assert gam[1].is_zero()

    def test_template23(self):
        gam = lcs(template23())
        assert gam[0] == hnf([(2, 0, 0), (0, 3, 0)], 3)
        assert gam[1] == hnf([(6, 0, 0)], 3)
        assert gam[2].is_zero()

    def test_trivial_action(self):
        g = build_split_group(2, 1, [UniMatrix.identity(2)])
        assert lcs(g)[0].is_zero()

    def test_descending(self):
        for g in (heisenberg(), template23()):
            gam = lcs(g)
            for a, b in zip(gam, gam[1:]):
                assert a.contains_lattice(b)


class TestUcs:
    def test_heisenberg(self):
        tow = ucs_tower(heisenberg())
        assert tow[0].lattice == hnf([(1, 0)], 2)
        assert tow[0].eps_lattice.is_zero()
        assert tow[1].lattice.is_full()
        assert tow[1].eps_lattice.is_full()
        assert all(l.status == "exact" for l in tow)

    def test_template23(self):
        tow = ucs_tower(template23())
        assert tow[0].lattice == hnf([(1, 0, 0)], 3)
        assert tow[1].lattice == hnf([(1, 0, 0), (0, 1, 0)], 3)
        assert tow[1].eps_lattice.is_zero()

    def test_trivial_action_is_abelian(self):
        tow = ucs_tower(build_split_group(2, 1, [UniMatrix.identity(2)]))
        assert len(tow) == 1
        assert tow[0].lattice.is_full() and tow[0].eps_lattice.is_full()

    def test_ascending(self):
        for g in (heisenberg(), template23()):
            tow = ucs_tower(g)
            for a, b in zip(tow, tow[1:]):
                assert b.lattice.contains_lattice(a.lattice)
                assert b.eps_lattice.contains_lattice(a.eps_lattice)

    def test_eps_lattice_is_exact_against_box_search(self):
        # E_k must be exactly the eps with (Phi(eps) - I) Z^d inside L_{k-1};
        # brute-force the biconditional over a box.
        for g in (heisenberg(), template23(),
                  build_split_group(3, 2, [template_matrix(WeightVector(5, (2, 3))),
                                           template_matrix(WeightVector(5, (4, 6)))])):
            tow = ucs_tower(g)
            prev = IntLattice.zero(g.d)
            for lev in tow:
                for eps in itertools.product(range(-2, 3), repeat=g.r):
                    diff = mat_sub(g.phi(eps).rows, identity_rows(g.d))
                    cond = all(prev.contains(tuple(col))
                               for col in mat_transpose(diff))
                    assert cond == lev.eps_lattice.contains(eps), (eps, prev)
                prev = lev.lattice


class TestCoinciding:
    def test_heisenberg_all_equal(self):
        rep = coinciding_check(heisenberg())
        assert rep.cls == 2
        assert rep.all_coincide
        assert rep.coincide[0]["relation"] == "equal"
        assert rep.gamma_c_in_L1

    def test_template23_strict_index_6(self):
        rep = coinciding_check(template23())
        assert rep.cls == 3
        assert not rep.all_coincide
        by_level = {v["gamma_level"]: v for v in rep.coincide}
        assert by_level[2]["relation"] == "strict"
        assert by_level[2]["index"] == 6
        assert by_level[3]["relation"] == "strict"
        assert by_level[3]["index"] == 6

    def test_abelian_single_level(self):
        rep = coinciding_check(build_split_group(2, 1, [UniMatrix.identity(2)]))
        assert rep.cls == 1
        assert rep.coincide == []
        assert rep.all_coincide

    def test_prop13_on_fixtures(self):
        for g in (heisenberg(), template23()):
            rep = coinciding_check(g)
            assert all(p["holds"] for p in rep.prop13)
            # the j = 1 rows re-derive the next term exactly
            for p in rep.prop13:
                if p["j"] == 1:
                    assert p["equals_next"]

    def test_class_agreement_fuzz(self):
        # random r = 2 commuting actions: powers of one random matrix
        rng = random.Random(31)
        for _ in range(25):
            d = rng.randint(2, 4)
            rows = [[1 if i == j else (rng.randint(-3, 3) if j > i else 0)
                     for j in range(d)] for i in range(d)]
            a = UniMatrix(rows)
            g = build_split_group(d, 2, [a, a ** rng.randint(-2, 3)])
            rep = coinciding_check(g)  # internally asserts LCS class == UCS class
            assert 1 <= rep.cls <= d + 1

    def test_split_membership_helper(self):
        g = heisenberg()
        rep = coinciding_check(g)
        assert in_upper_central_split(g, rep.ucs, 1, SplitElement((3, 0), (0,)))
        assert not in_upper_central_split(g, rep.ucs, 1, SplitElement((0, 1), (0,)))
        assert in_upper_central_split(g, rep.ucs, 2, SplitElement((0, 1), (2,)))


class TestTightness:
    def test_heisenberg_tight(self):
        res = tightness_check_split(heisenberg())
        assert res["tight"]
        assert [x["class"] for x in res["per_level"]] == [1, 2]

    def test_abelian_trivially_tight(self):
        res = tightness_check_split(build_split_group(2, 1, [UniMatrix.identity(2)]))
        assert res["tight"]
        assert [x["class"] for x in res["per_level"]] == [1]

    def test_template_models_not_tight(self):
        # fiber-only middle terms are abelian: class(Z_k) = 1 < k
        g = build_split_group(5, 1, [template_matrix(WeightVector(7, (2, 3, 5, 7)))])
        res = tightness_check_split(g)
        assert not res["tight"]
        assert res["per_level"][1]["class"] == 1


class TestBallSeries:
    def test_ut3_agrees(self):
        rep = ball_series_report(ball(MatrixGroup(3, [elem(3, 1, 2), elem(3, 2, 3)]), 3))
        assert rep["class_lcs"] == rep["class_ucs"] == 2
        assert rep["agree_within_ball"]

    def test_ut4_class3(self):
        rep = ball_series_report(ball(MatrixGroup(4, [elem(4, 1, 2), elem(4, 2, 3),
                                                      elem(4, 3, 4)]), 2))
        assert rep["class_lcs"] == rep["class_ucs"] == 3
        assert rep["agree_within_ball"]

    def test_ball_tightness_product(self):
        z1 = MatrixGroup(2, [elem(2, 1, 2)], ["s"])
        ut3 = MatrixGroup(3, [elem(3, 1, 2), elem(3, 2, 3)])
        from nilwork.matrix_model import direct_product
        res = tightness_check_ball(ball(direct_product([z1, ut3]), 3))
        assert res["tight"]
        assert [x["class_estimate"] for x in res["per_level"]] == [1, 2]
