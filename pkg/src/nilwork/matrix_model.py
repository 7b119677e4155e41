"""Subgroups of UT(n, Z) given by generator matrices, with breadth-first
word-ball enumeration as a desk-scale brute-force oracle."""

from __future__ import annotations

import os
from dataclasses import dataclass
from fractions import Fraction

from .exact_linear import DimensionError, UniMatrix, unipotent_log

DEFAULT_BALL_CAP = 200_000


def _ball_cap_default():
    env = os.environ.get("WORKBENCH_BALL_CAP")
    if env:
        return int(env)
    return DEFAULT_BALL_CAP


class MatrixGroup:
    """Subgroup of UT(n, Z) described by its generating matrices."""

    def __init__(self, n, generators, labels=None):
        generators = tuple(generators)
        for g in generators:
            if not isinstance(g, UniMatrix) or g.n != n:
                raise ValueError("generator is not unit upper triangular of size %d" % n)
        if labels is None:
            labels = tuple("g%d" % i for i in range(len(generators)))
        self.n = n
        self.generators = generators
        self.labels = tuple(labels)

    def __repr__(self):
        return "MatrixGroup(n=%d, generators=%d)" % (self.n, len(self.generators))


@dataclass
class Ball:
    """Radius-R word ball: inverse-closed, contains the identity, deduplicated
    by exact entry comparison.  `truncated` is set when the element cap was hit;
    downstream probes must surface that as approximate/lower-bound scope."""

    group: MatrixGroup
    radius: int
    elements: tuple
    words: dict
    truncated: bool = False

    def word_of(self, m):
        """One shortest word for m, as a tuple of signed generator labels."""
        toks = self.words[m]
        out = []
        for t in toks:
            lab = self.group.labels[t // 2]
            out.append(lab if t % 2 == 0 else lab + "^-1")
        return tuple(out)

    def __contains__(self, m):
        return m in self.words


def ball(group, radius, cap=None):
    """Breadth-first closure of words of length <= radius in the generators
    and their inverses.

    Deterministic: each level expands elements in lexicographic entry order,
    generators in token order, and ties between equal-length words are broken
    by the lexicographically smaller token tuple.  Exceeding the cap flags the
    ball as truncated (never silent).
    """
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if cap is None:
        cap = _ball_cap_default()
    steps = []
    for i, g in enumerate(group.generators):
        steps.append((2 * i, g))
        steps.append((2 * i + 1, g.inverse()))
    ident = UniMatrix.identity(group.n)
    words = {ident: ()}
    frontier = [ident]
    truncated = False
    for _ in range(radius):
        if truncated or not frontier:
            break
        candidates = {}
        for m in sorted(frontier, key=lambda u: u.rows):
            base = words[m]
            for tok, g in steps:
                nm = m * g
                if nm in words:
                    continue
                w = base + (tok,)
                old = candidates.get(nm)
                if old is None or w < old:
                    candidates[nm] = w
        for nm in sorted(candidates, key=lambda u: u.rows):
            if len(words) >= cap:
                truncated = True
                break
            words[nm] = candidates[nm]
        frontier = [m for m in candidates if m in words]
    elements = tuple(sorted(words, key=lambda u: u.rows))
    return Ball(group=group, radius=radius, elements=elements, words=words,
                truncated=truncated)


def embed_J(m, k):
    """Top-left block embedding UT(n) -> UT(k); a homomorphism."""
    if k < m.n:
        raise DimensionError("cannot embed size %d into size %d" % (m.n, k))
    rows = []
    for i in range(k):
        row = []
        for j in range(k):
            if i < m.n and j < m.n:
                row.append(m.rows[i][j])
            else:
                row.append(1 if i == j else 0)
        rows.append(row)
    return UniMatrix(rows)


def embed_group(group, k):
    return MatrixGroup(k, [embed_J(g, k) for g in group.generators], group.labels)


def direct_product(groups):
    """Block-diagonal product; generators act on their own block only."""
    total = sum(g.n for g in groups)
    gens = []
    labels = []
    offset = 0
    for idx, g in enumerate(groups):
        for gen, lab in zip(g.generators, g.labels):
            rows = []
            for i in range(total):
                row = []
                for j in range(total):
                    if offset <= i < offset + g.n and offset <= j < offset + g.n:
                        row.append(gen.rows[i - offset][j - offset])
                    else:
                        row.append(1 if i == j else 0)
                rows.append(row)
            gens.append(UniMatrix(rows))
            labels.append("f%d.%s" % (idx, lab))
        offset += g.n
    return MatrixGroup(total, gens, labels)


# -- probes -----------------------------------------------------------------
# Results are exact subsets of (true subgroup) intersect (ball): one-sided,
# except in_upper_central which is an exact membership test.

def center_probe(b):
    """Ball elements commuting with every generator (= Z_1 intersect ball)."""
    gens = b.group.generators
    return tuple(m for m in b.elements
                 if all(m * g == g * m for g in gens))


def centralizer_probe(b, x):
    """Ball elements commuting with x."""
    return tuple(m for m in b.elements if m * x == x * m)


def derived_set(b):
    """All commutators of ball pairs (the matrices may leave the ball)."""
    out = set()
    elems = b.elements
    inverses = {m: m.inverse() for m in elems}
    for p in elems:
        pi = inverses[p]
        for q in elems:
            out.add(pi * inverses[q] * p * q)
    return tuple(sorted(out, key=lambda u: u.rows))


def lcs_level_sets(b, max_level=None):
    """Iterated commutator sets: level 1 is the ball, level i+1 the commutators
    of level i with the ball.  Stops at the first level equal to {I}."""
    ident = UniMatrix.identity(b.group.n)
    levels = [tuple(b.elements)]
    if max_level is None:
        max_level = b.group.n + 1
    inverses = {m: m.inverse() for m in b.elements}
    while len(levels) < max_level:
        cur = levels[-1]
        nxt = set()
        for m in cur:
            mi = m.inverse()
            for p in b.elements:
                nxt.add(mi * inverses[p] * m * p)
        nxt = tuple(sorted(nxt, key=lambda u: u.rows))
        levels.append(nxt)
        if nxt == (ident,):
            break
    return levels


def in_upper_central(group, k, m):
    """Exact membership test m in Z_k: [m, g] in Z_{k-1} for every generator.

    Checking generators suffices: modulo Z_{k-1} the map g -> [m, g] is a
    homomorphism, so commutators with arbitrary words inherit membership.
    """
    if k <= 0:
        return m.is_identity()
    if k == 1:
        return all(m * g == g * m for g in group.generators)
    return all(in_upper_central(group, k - 1, m.commutator(g))
               for g in group.generators)


def ucs_probe(b, k):
    """Z_k intersect ball (exact on each element)."""
    return tuple(m for m in b.elements if in_upper_central(b.group, k, m))


def log_rank(mats):
    """Rank over Q of the span of {log m}; a lower bound on the rank of the
    subgroup the matrices generate."""
    if not mats:
        return 0
    n = mats[0].n
    rows = []
    for m in mats:
        lg = unipotent_log(m)
        rows.append([lg.rows[i][j] for i in range(n) for j in range(i + 1, n)])
    # exact Gaussian elimination over Q
    rank = 0
    cols = len(rows[0]) if rows else 0
    work = [[Fraction(x) for x in r] for r in rows]
    r = 0
    for c in range(cols):
        piv = next((i for i in range(r, len(work)) if work[i][c]), None)
        if piv is None:
            continue
        work[r], work[piv] = work[piv], work[r]
        inv = 1 / work[r][c]
        work[r] = [x * inv for x in work[r]]
        for i in range(len(work)):
            if i != r and work[i][c]:
                f = work[i][c]
                work[i] = [x - f * y for x, y in zip(work[i], work[r])]
        r += 1
        rank = r
    return rank


def first_superdiagonal(m):
    """Image of m under the homomorphism UT(n) -> Z^{n-1} reading the first
    superdiagonal; its kernel contains the derived subgroup, so a nonzero
    image certifies a non-derived element."""
    return tuple(m.rows[i][i + 1] for i in range(m.n - 1))
