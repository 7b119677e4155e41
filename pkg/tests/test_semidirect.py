import itertools
import random

import pytest

from nilwork.exact_linear import UniMatrix
from nilwork.semidirect import (NonCommutingActionError, SplitElement,
                                associativity_probe, build_split_group, sg_root)
from nilwork.weights import WeightVector, template_matrix

SHEAR = UniMatrix([[1, 1], [0, 1]])
E1 = UniMatrix([[1, 1, 0], [0, 1, 0], [0, 0, 1]])
E2 = UniMatrix([[1, 0, 0], [0, 1, 1], [0, 0, 1]])


def heisenberg():
    return build_split_group(2, 1, [SHEAR])


def rand_elem(rng, g, bound=3):
    return SplitElement(tuple(rng.randint(-bound, bound) for _ in range(g.d)),
                        tuple(rng.randint(-bound, bound) for _ in range(g.r)))


class TestBuild:
    def test_heisenberg_accepted(self):
        g = heisenberg()
        assert g.d == 2 and g.r == 1

    def test_single_template_accepted(self):
        build_split_group(3, 1, [template_matrix(WeightVector(5, (2, 3)))])

    def test_elementary_pair_rejected_with_witness(self):
        with pytest.raises(NonCommutingActionError) as exc:
            build_split_group(3, 2, [E1, E2])
        assert exc.value.witness.entry == (1, 3)
        assert exc.value.probe_witness is not None

    def test_wrong_count(self):
        with pytest.raises(ValueError):
            build_split_group(2, 2, [SHEAR])


class TestArithmetic:
    def test_identity_laws(self):
        g = heisenberg()
        x = SplitElement((3, -2), (4,))
        assert g.mul(x, g.identity()) == x
        assert g.mul(g.identity(), x) == x
        assert g.is_identity(g.mul(x, g.inv(x)))
        assert g.is_identity(g.mul(g.inv(x), x))

    def test_group_axioms_fuzz(self):
        # seeded triples: associativity, inverses, and power consistency
        rng = random.Random(11)
        groups = [heisenberg(),
                  build_split_group(3, 1, [template_matrix(WeightVector(5, (2, 3)))]),
                  build_split_group(3, 2, [template_matrix(WeightVector(5, (2, 3))),
                                           template_matrix(WeightVector(5, (4, 6)))])]
        for g in groups:
            for _ in range(3000):
                x, y, z = (rand_elem(rng, g) for _ in range(3))
                assert g.mul(g.mul(x, y), z) == g.mul(x, g.mul(y, z))
            for _ in range(200):
                x = rand_elem(rng, g)
                assert g.power(x, 3) == g.mul(g.mul(x, x), x)
                assert g.power(x, -2) == g.inv(g.mul(x, x))

    def test_worked_commutator(self):
        g = heisenberg()
        c = g.commutator(SplitElement((0, 0), (1,)), SplitElement((0, 1), (0,)))
        assert c == SplitElement((1, 0), (0,))

    def test_self_commutator(self):
        g = heisenberg()
        x = SplitElement((2, -1), (3,))
        assert g.is_identity(g.commutator(x, x))

    def test_commutator_closed_form_vs_literal(self):
        rng = random.Random(13)
        g = build_split_group(3, 2, [template_matrix(WeightVector(5, (2, 3))),
                                     template_matrix(WeightVector(5, (4, 6)))])
        for _ in range(500):
            x, y = rand_elem(rng, g), rand_elem(rng, g)
            lit = g.mul(g.mul(g.inv(x), g.inv(y)), g.mul(x, y))
            assert g.commutator(x, y) == lit

    def test_commutator_lands_in_fiber(self):
        rng = random.Random(17)
        g = heisenberg()
        for _ in range(500):
            c = g.commutator(rand_elem(rng, g), rand_elem(rng, g))
            assert c.eps == (0,)

    def test_conjugation_of_fiber(self):
        rng = random.Random(19)
        g = build_split_group(3, 1, [template_matrix(WeightVector(5, (2, 3)))])
        for _ in range(300):
            v = tuple(rng.randint(-4, 4) for _ in range(3))
            b = rand_elem(rng, g)
            conj = g.conj(SplitElement(v, (0,)), b)
            expect = g.phi(tuple(-e for e in b.eps)).apply(v)
            assert conj == SplitElement(expect, (0,))

    def test_commutes_matches_commutator(self):
        rng = random.Random(23)
        g = build_split_group(3, 2, [template_matrix(WeightVector(5, (2, 3))),
                                     template_matrix(WeightVector(5, (4, 6)))])
        agree = disagree = 0
        for _ in range(800):
            x, y = rand_elem(rng, g), rand_elem(rng, g)
            c = g.is_identity(g.commutator(x, y))
            assert c == g.commutes(x, y)
            agree += c
            disagree += not c
        assert agree and disagree

    def test_phi_kernel(self):
        g = build_split_group(2, 2, [SHEAR, SHEAR])  # A, A: kernel (1,-1)
        k = g.phi_kernel()
        assert k.rank == 1
        assert k.contains((1, -1))
        g2 = heisenberg()
        assert g2.phi_kernel().is_zero()


class TestRoots:
    def test_root_of_power_fuzz(self):
        rng = random.Random(29)
        groups = [heisenberg(),
                  build_split_group(3, 1, [template_matrix(WeightVector(5, (2, 3)))])]
        for g in groups:
            for n in (2, 3, 5):
                for _ in range(40):
                    x = rand_elem(rng, g)
                    assert sg_root(g, g.power(x, n), n) == x

    def test_heisenberg_central_non_square(self):
        g = heisenberg()
        target = SplitElement((1, 0), (0,))
        assert sg_root(g, target, 2) is None
        # cross-check by box enumeration
        for v in itertools.product(range(-3, 4), repeat=2):
            for e in range(-3, 4):
                assert g.power(SplitElement(v, (e,)), 2) != target

    def test_root_of_identity(self):
        g = heisenberg()
        assert sg_root(g, g.identity(), 7) == g.identity()

    def test_negative_exponent(self):
        g = heisenberg()
        x = SplitElement((2, 1), (-1,))
        assert sg_root(g, g.power(x, -3), -3) == x

    def test_zero_exponent_rejected(self):
        g = heisenberg()
        with pytest.raises(ValueError):
            sg_root(g, g.identity(), 0)


class TestAssociativityProbe:
    def test_commuting_action_passes(self):
        assert associativity_probe(2, 1, [SHEAR], samples=50, seed=1) is None
        a = template_matrix(WeightVector(5, (2, 3)))
        b = template_matrix(WeightVector(5, (4, 6)))
        assert associativity_probe(3, 2, [a, b], samples=50, seed=1) is None

    def test_elementary_pair_fails_fast(self):
        wit = associativity_probe(3, 2, [E1, E2], samples=100, seed=0)
        assert wit is not None
        x, y, z = wit["triple"]
        assert wit["left"] != wit["right"]
        assert wit["phi_mismatch"] is not None
        entry, lhs, rhs = wit["phi_mismatch"]
        assert entry == (1, 3) and lhs != rhs
