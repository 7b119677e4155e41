"""Split extensions Z^d x| Z^r with a commuting unit-upper-triangular action.

Elements are pairs (v, eps); multiplication is
    (v, eps) * (b, delta) = (v + Phi(eps) b, eps + delta)
with Phi(eps) = A_1^eps_1 ... A_r^eps_r.  Phi is a homomorphism exactly
because the action matrices are required to commute pairwise; the builder
rejects anything else with a witness and an associativity-probe result.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .exact_linear import (DimensionError, UniMatrix, rational_kernel,
                           solve_rational, unipotent_log)
from .weights import action_well_defined


class NonCommutingActionError(ValueError):
    """Action matrices do not commute; carries the commutation witness and,
    when available, a failing associativity triple for the ordered-product map."""

    def __init__(self, witness, probe_witness=None):
        self.witness = witness
        self.probe_witness = probe_witness
        msg = ("action matrices %d and %d do not commute: entry %r is %d vs %d"
               % (witness.i, witness.j, witness.entry, witness.left, witness.right))
        if probe_witness is not None:
            msg += "; ordered-product map breaks associativity on %r" % (probe_witness,)
        super().__init__(msg)


@dataclass(frozen=True)
class SplitElement:
    v: tuple
    eps: tuple

    def __repr__(self):
        return "(%s | %s)" % (",".join(map(str, self.v)), ",".join(map(str, self.eps)))


class SplitGroup:
    """The group Z^d x|_Phi Z^r for pairwise commuting unitriangular A_i."""

    def __init__(self, d, r, action):
        d, r = int(d), int(r)
        action = tuple(action)
        if len(action) != r:
            raise ValueError("expected %d action matrices, got %d" % (r, len(action)))
        for idx, a in enumerate(action):
            if not isinstance(a, UniMatrix) or a.n != d:
                raise ValueError("action matrix %d is not unit upper triangular of size %d" % (idx, d))
        witness = action_well_defined(action)
        if witness is not None:
            probe = associativity_probe(d, r, action, samples=100, seed=0)
            raise NonCommutingActionError(witness, probe)
        self.d = d
        self.r = r
        self.action = action
        self._phi_cache = {tuple([0] * r): UniMatrix.identity(d)}
        self._pow_cache = {}
        self._logs = None

    # -- structure ---------------------------------------------------------

    def identity(self):
        return SplitElement((0,) * self.d, (0,) * self.r)

    def fiber_gen(self, i):
        return SplitElement(tuple(1 if k == i else 0 for k in range(self.d)), (0,) * self.r)

    def base_gen(self, j):
        return SplitElement((0,) * self.d, tuple(1 if k == j else 0 for k in range(self.r)))

    def generators(self):
        return [self.fiber_gen(i) for i in range(self.d)] + \
               [self.base_gen(j) for j in range(self.r)]

    def _gen_power(self, j, e):
        key = (j, e)
        m = self._pow_cache.get(key)
        if m is None:
            m = self.action[j] ** e
            self._pow_cache[key] = m
        return m

    def phi(self, eps):
        """Phi(eps) = A_1^eps_1 ... A_r^eps_r, memoized."""
        eps = tuple(eps)
        m = self._phi_cache.get(eps)
        if m is None:
            m = UniMatrix.identity(self.d)
            for j, e in enumerate(eps):
                if e:
                    m = m * self._gen_power(j, e)
            self._phi_cache[eps] = m
        return m

    def action_logs(self):
        if self._logs is None:
            self._logs = tuple(unipotent_log(a) for a in self.action)
        return self._logs

    def phi_kernel(self):
        """Lattice of eps with Phi(eps) = I, via the terminating logarithm:
        for commuting unipotent matrices Phi(eps) = exp(sum eps_j log A_j)."""
        logs = self.action_logs()
        rows = []
        for i in range(self.d):
            for j in range(i + 1, self.d):
                rows.append(tuple(logs[k].rows[i][j] for k in range(self.r)))
        return rational_kernel(rows, self.r)

    # -- element arithmetic --------------------------------------------------

    def _check(self, x):
        if len(x.v) != self.d or len(x.eps) != self.r:
            raise DimensionError("element %r does not fit d=%d, r=%d" % (x, self.d, self.r))

    def mul(self, x, y):
        self._check(x)
        self._check(y)
        tv = self.phi(x.eps).apply(y.v)
        return SplitElement(tuple(a + b for a, b in zip(x.v, tv)),
                            tuple(a + b for a, b in zip(x.eps, y.eps)))

    def inv(self, x):
        self._check(x)
        neg = tuple(-e for e in x.eps)
        w = self.phi(neg).apply(x.v)
        return SplitElement(tuple(-a for a in w), neg)

    def power(self, x, n):
        n = int(n)
        if n < 0:
            return self.power(self.inv(x), -n)
        acc = self.identity()
        base = x
        while n:
            if n & 1:
                acc = self.mul(acc, base)
            base = self.mul(base, base)
            n >>= 1
        return acc

    def conj(self, x, g):
        """x^g = g^-1 x g."""
        return self.mul(self.mul(self.inv(g), x), g)

    def commutator(self, x, y):
        """[x, y] = x^-1 y^-1 x y, via the closed fiber formula.

        The closed form is re-checked against the literal composition on every
        call in debug mode (assert); the base component is always zero.
        """
        self._check(x)
        self._check(y)
        pe = self.phi(tuple(-e for e in x.eps))
        pd = self.phi(tuple(-e for e in y.eps))
        t1 = pe.apply(tuple(a - b for a, b in zip(pd.apply(x.v), x.v)))
        w = pd.apply(y.v)
        t2 = tuple(a - b for a, b in zip(w, pe.apply(w)))
        out = SplitElement(tuple(a + b for a, b in zip(t1, t2)), (0,) * self.r)
        assert out == self.mul(self.mul(self.inv(x), self.inv(y)), self.mul(x, y))
        return out

    def commutes(self, x, y):
        """[x, y] = 1, decided from the multiplied membership equation
        (Phi(-delta) - I) v = (I - Phi(eps)) Phi(-delta) b without building
        the commutator element."""
        pd = self.phi(tuple(-e for e in y.eps))
        lhs = tuple(a - b for a, b in zip(pd.apply(x.v), x.v))
        w = pd.apply(y.v)
        rhs = tuple(a - b for a, b in zip(w, self.phi(x.eps).apply(w)))
        return lhs == rhs

    def is_identity(self, x):
        return not any(x.v) and not any(x.eps)


def build_split_group(d, r, action):
    """Construct the split model; rejects non-commuting actions with a witness."""
    return SplitGroup(d, r, action)


def sg_root(group, target, n):
    """The unique y with y^n = target, or None.

    The base part forces eps = target.eps / n componentwise; the fiber part
    solves (I + Phi(eps) + ... + Phi((n-1) eps)) v = target.v, whose matrix is
    upper triangular with diagonal n, hence invertible over Q.  The root exists
    iff both solutions are integral; uniqueness is structural.
    """
    n = int(n)
    if n == 0:
        raise ValueError("root exponent must be nonzero")
    if n < 0:
        return sg_root(group, group.inv(target), -n)
    if n == 1:
        return target
    if any(e % n for e in target.eps):
        return None
    eps = tuple(e // n for e in target.eps)
    d = group.d
    s = [[0] * d for _ in range(d)]
    for k in range(n):
        m = group.phi(tuple(k * e for e in eps))
        for i in range(d):
            row = m.rows[i]
            si = s[i]
            for j in range(d):
                si[j] += row[j]
    sol = solve_rational(s, target.v)
    if sol is None:
        return None
    if any(x.denominator != 1 for x in sol):
        return None
    root = SplitElement(tuple(int(x) for x in sol), eps)
    assert group.power(root, n) == target
    return root


def _ordered_phi(action, d, eps, cache):
    eps = tuple(eps)
    m = cache.get(eps)
    if m is None:
        m = UniMatrix.identity(d)
        for j, e in enumerate(eps):
            if e:
                m = m * (action[j] ** e)
        cache[eps] = m
    return m


def associativity_probe(d, r, ordered_action, samples=100, seed=0):
    """Probe whether the ordered-product map eps -> A_1^eps_1 ... A_r^eps_r
    gives an associative multiplication on pairs (v, eps).

    Returns None when all sampled triples associate; otherwise a dict carrying
    the first failing triple and the entry where Phi(eps+delta) differs from
    Phi(eps)Phi(delta).  For a commuting action this always passes.
    """
    ordered_action = tuple(ordered_action)
    rng = random.Random(seed)
    cache = {}

    def rand_elem():
        return SplitElement(tuple(rng.randint(-3, 3) for _ in range(d)),
                            tuple(rng.randint(-3, 3) for _ in range(r)))

    def mul(x, y):
        tv = _ordered_phi(ordered_action, d, x.eps, cache).apply(y.v)
        return SplitElement(tuple(a + b for a, b in zip(x.v, tv)),
                            tuple(a + b for a, b in zip(x.eps, y.eps)))

    for _ in range(samples):
        x, y, z = rand_elem(), rand_elem(), rand_elem()
        left = mul(mul(x, y), z)
        right = mul(x, mul(y, z))
        if left != right:
            eps_sum = tuple(a + b for a, b in zip(x.eps, y.eps))
            m_sum = _ordered_phi(ordered_action, d, eps_sum, cache)
            m_prod = _ordered_phi(ordered_action, d, x.eps, cache) * \
                _ordered_phi(ordered_action, d, y.eps, cache)
            entry = None
            for p in range(d):
                for q in range(p + 1, d):
                    if m_sum.rows[p][q] != m_prod.rows[p][q]:
                        entry = ((p + 1, q + 1), m_sum.rows[p][q], m_prod.rows[p][q])
                        break
                if entry:
                    break
            return {"triple": (x, y, z), "left": left, "right": right,
                    "phi_mismatch": entry}
    return None
