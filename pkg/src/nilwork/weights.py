"""Integral weight data: per-generator weight vectors, the derived
multiplicative table, the generator-matrix template, and well-definedness
of a candidate action."""

from __future__ import annotations

from collections import namedtuple

from .exact_linear import UniMatrix


class DegenerateWeightError(ValueError):
    """A weight (or superdiagonal entry) is zero where a nonzero integer is required."""


class NotWeightTemplatedError(ValueError):
    """Matrix entry violates the consecutive-product rule; carries the offending position."""

    def __init__(self, position, found, expected):
        self.position = position
        self.found = found
        self.expected = expected
        super().__init__("entry %r is %d, consecutive product requires %d"
                         % (position, found, expected))


class WeightVector:
    """Nonzero integers (k_{34}, ..., k_{c-1,c}) for a class parameter c >= 4."""

    __slots__ = ("c", "weights")

    def __init__(self, c, weights):
        c = int(c)
        if c < 4:
            raise ValueError("class parameter must be at least 4, got %d" % c)
        weights = tuple(int(w) for w in weights)
        if len(weights) != c - 3:
            raise ValueError("expected %d weights for c=%d, got %d" % (c - 3, c, len(weights)))
        for idx, w in enumerate(weights):
            if w == 0:
                raise DegenerateWeightError("weight k_{%d,%d} is zero" % (idx + 3, idx + 4))
        self.c = c
        self.weights = weights

    def __eq__(self, other):
        return isinstance(other, WeightVector) and (self.c, self.weights) == (other.c, other.weights)

    def __hash__(self):
        return hash((self.c, self.weights))

    def __repr__(self):
        return "WeightVector(c=%d, weights=%r)" % (self.c, self.weights)


class WeightTable:
    """Full table k_{ij} for 3 <= i < j <= c, closed under k_ij * k_jt = k_it."""

    __slots__ = ("c", "table")

    def __init__(self, c, table):
        self.c = c
        self.table = dict(table)
        for i in range(3, c + 1):
            for j in range(i + 1, c + 1):
                for t in range(j + 1, c + 1):
                    if self.table[(i, j)] * self.table[(j, t)] != self.table[(i, t)]:
                        raise ValueError("multiplicative relation fails at (%d,%d,%d)" % (i, j, t))

    def __getitem__(self, key):
        return self.table[key]

    def __eq__(self, other):
        return isinstance(other, WeightTable) and (self.c, self.table) == (other.c, other.table)

    def __repr__(self):
        return "WeightTable(c=%d, table=%r)" % (self.c, self.table)


def pascal_table(w):
    """Expand consecutive weights into the full k_{ij} table by products."""
    table = {}
    for i in range(3, w.c):
        prod = 1
        for j in range(i + 1, w.c + 1):
            prod *= w.weights[j - 4]  # k_{j-1,j}
            table[(i, j)] = prod
    return WeightTable(w.c, table)


def template_matrix(w):
    """Generator matrix of dimension c-2: entry (p,q) above the diagonal is the
    consecutive product k_{p+2,p+3} ... k_{q+1,q+2}."""
    n = w.c - 2
    tab = pascal_table(w)
    rows = []
    for p in range(1, n + 1):
        row = []
        for q in range(1, n + 1):
            if p == q:
                row.append(1)
            elif p < q:
                row.append(tab[(p + 2, q + 2)])
            else:
                row.append(0)
        rows.append(row)
    return UniMatrix(rows)


def extract_weights(m):
    """Read the weight vector back off a matrix, verifying the template shape.

    The superdiagonal provides the candidate weights; every other entry above
    the diagonal must equal the corresponding consecutive product.  A zero
    superdiagonal entry raises DegenerateWeightError; any product violation
    raises NotWeightTemplatedError carrying the first offending (row, col)
    position (1-indexed).
    """
    n = m.n
    if n < 2:
        raise DegenerateWeightError("matrix of dimension %d carries no weights" % n)
    super_diag = [m.rows[i][i + 1] for i in range(n - 1)]
    if any(x == 0 for x in super_diag):
        raise DegenerateWeightError("zero superdiagonal entry: %r" % (super_diag,))
    for p in range(n):
        prod = 1
        for q in range(p + 1, n):
            prod *= super_diag[q - 1]
            if m.rows[p][q] != prod:
                raise NotWeightTemplatedError((p + 1, q + 1), m.rows[p][q], prod)
    return WeightVector(n + 2, super_diag)


CommutationWitness = namedtuple("CommutationWitness", ["i", "j", "entry", "left", "right"])


def action_well_defined(mats):
    """None when all matrices pairwise commute; otherwise the first witness.

    The witness records the indices (i, j), the first entry where the two
    products differ, and both product values at that entry.
    """
    for i in range(len(mats)):
        for j in range(i + 1, len(mats)):
            ab = mats[i] * mats[j]
            ba = mats[j] * mats[i]
            if ab != ba:
                for p in range(ab.n):
                    for q in range(p + 1, ab.n):
                        if ab.rows[p][q] != ba.rows[p][q]:
                            return CommutationWitness(i, j, (p + 1, q + 1),
                                                      ab.rows[p][q], ba.rows[p][q])
    return None
