"""Lower and upper central series as exact lattice towers for split models,
with coinciding-series verdicts, tightness, and ball-scoped analogues for
matrix groups."""

from __future__ import annotations

from dataclasses import dataclass

from .exact_linear import (IntLattice, UniMatrix, identity_rows, integer_kernel,
                           mat_mul, mat_sub, mat_transpose, mat_vec, nil_log_rows,
                           preimage_lattice, rational_kernel, solve_integer,
                           solve_rational)
from . import matrix_model as mm


@dataclass
class UcsLevel:
    lattice: IntLattice        # Z_k intersect Z^d
    eps_lattice: IntLattice    # base directions present in Z_k
    status: str                # "exact" or "bounded-search"


@dataclass
class SeriesReport:
    model_id: str
    lcs: list                  # [gamma_2, gamma_3, ..., first zero lattice]
    ucs: list                  # [UcsLevel for Z_1, Z_2, ...]
    cls: int
    coincide: list             # per-level verdict dicts
    all_coincide: bool
    prop13: list               # commutator-calculus containment checks
    gamma_c_in_L1: bool


# -- generic lattice machinery over a commuting unipotent action -------------

def _unipotent_inverse_rows(rows):
    n = len(rows)
    nil = mat_sub(rows, identity_rows(n))
    power = identity_rows(n)
    acc = identity_rows(n)
    sign = 1
    for _ in range(1, n):
        power = mat_mul(power, nil)
        if not any(any(r) for r in power):
            break
        sign = -sign
        acc = tuple(tuple(x + sign * y for x, y in zip(ra, rb)) for ra, rb in zip(acc, power))
    return acc


def _assert_unipotent(rows):
    n = len(rows)
    nil = mat_sub(rows, identity_rows(n))
    power = nil
    for _ in range(n):
        if not any(any(r) for r in power):
            return
        power = mat_mul(power, nil)
    raise RuntimeError("restricted action is not unipotent; implementation bug")


def _closure_under(lat, mats_with_inverses, cap):
    """Smallest lattice containing lat and invariant under every listed matrix.

    The cap is justified by unipotency degree: (A - I)^d = 0 bounds how many
    new directions a closure step can add; exceeding it signals a bug, not bad
    input."""
    cur = lat
    for _ in range(cap):
        rows = list(cur.basis)
        for m in mats_with_inverses:
            for b in cur.basis:
                rows.append(mat_vec(m, b))
        nxt = IntLattice.span(rows, lat.ambient)
        if nxt == cur:
            return cur
    raise RuntimeError("lattice closure failed to stabilise within %d steps" % cap)


def lcs_from_action(action_rows, d):
    """LCS fiber lattices [gamma_2, ..., first zero] for commuting unipotent
    integer matrices acting on Z^d.

    gamma_2 is the invariant closure of the columns of (A_j^-1 - I); each later
    term is the span of the (A_j^-1 - I)-images of the previous one, which is
    already invariant because the action commutes."""
    for m in action_rows:
        _assert_unipotent(m)
    mats = []
    diffs = []
    for m in action_rows:
        minv = _unipotent_inverse_rows(m)
        mats.extend([m, minv])
        diffs.append(mat_sub(minv, identity_rows(d)))
    gens = []
    for df in diffs:
        for col in mat_transpose(df):
            gens.append(tuple(col))
    gamma = _closure_under(IntLattice.span(gens, d), mats, d + 2)
    out = [gamma]
    while not out[-1].is_zero():
        prev = out[-1]
        rows = []
        for df in diffs:
            for b in prev.basis:
                rows.append(mat_vec(df, b))
        out.append(IntLattice.span(rows, d))
        if len(out) > d + 2:
            raise RuntimeError("LCS failed to terminate; implementation bug")
    return out


def lcs(group):
    """LCS of a split group as fiber lattices [gamma_2, ..., first zero]."""
    return lcs_from_action([a.rows for a in group.action], group.d)


def _induced_action_rows(comp_rows, action_rows):
    """Matrix of the action induced on the projection v -> comp * v (the
    quotient by a saturated invariant lattice): solves Abar * comp = comp * A."""
    s = len(comp_rows)
    target = mat_mul(comp_rows, action_rows)
    comp_t = mat_transpose(comp_rows)
    out = []
    for i in range(s):
        x = solve_rational(comp_t, target[i])
        if x is None:
            raise RuntimeError("induced action does not exist; lattice not invariant?")
        out.append(tuple(x))
    return tuple(out)


def _eps_lattice_for(group, fiber_lat):
    """Exact lattice of eps with (Phi(eps) - I) Z^d inside fiber_lat.

    fiber_lat is a kernel or an iterated preimage, hence saturated, so the
    quotient action is by commuting unipotent rational matrices and triviality
    is the vanishing of sum eps_j log(Abar_j) -- a linear condition."""
    d, r = group.d, group.r
    if fiber_lat.is_full():
        return IntLattice.full(r)
    if fiber_lat.is_zero():
        comp = identity_rows(d)
    else:
        sat = fiber_lat.saturation()
        if sat != fiber_lat:
            raise RuntimeError("UCS fiber lattice unexpectedly unsaturated")
        comp = integer_kernel(fiber_lat.basis, d).basis
    logs = []
    s = len(comp)
    for a in group.action:
        induced = _induced_action_rows(comp, a.rows)
        logs.append(nil_log_rows(induced, s))
    rows = []
    for i in range(s):
        for j in range(s):
            rows.append(tuple(logs[k][i][j] for k in range(r)))
    lat = rational_kernel(rows, r)
    for eps in lat.basis:  # re-check the defining condition on each generator
        m = group.phi(eps)
        for col in mat_transpose(mat_sub(m.rows, identity_rows(d))):
            if not fiber_lat.contains(tuple(col)):
                raise RuntimeError("eps-part candidate fails its defining condition")
    return lat


def ucs_tower(group):
    """Upper central levels [(L_k, E_k)] up to Z_c = G.

    L_1 is the common fixed lattice of the action; L_{k+1} pulls L_k back
    through each (A_j^-1 - I).  The paper gives no algorithm for the upper
    series; the eps-parts here are resolved exactly by log-linearising the
    induced action on the (always saturated) quotient, and the status field
    records that."""
    d, r = group.d, group.r
    diffs = [mat_sub(a.rows, identity_rows(d)) for a in group.action]
    inv_diffs = [mat_sub(_unipotent_inverse_rows(a.rows), identity_rows(d))
                 for a in group.action]
    lat = None
    for df in diffs:
        k = integer_kernel(df, d)
        lat = k if lat is None else lat.intersect(k)
    if lat is None:
        lat = IntLattice.full(d)
    levels = [UcsLevel(lat, _eps_lattice_for(group, IntLattice.zero(d)), "exact")]
    while not (levels[-1].lattice.is_full() and levels[-1].eps_lattice.is_full()):
        prev = levels[-1].lattice
        nxt = None
        for df in inv_diffs:
            p = preimage_lattice(df, prev)
            nxt = p if nxt is None else nxt.intersect(p)
        eps = _eps_lattice_for(group, prev)
        levels.append(UcsLevel(nxt, eps, "exact"))
        if len(levels) > d + 2:
            raise RuntimeError("UCS tower failed to terminate; implementation bug")
    return levels


def split_class(lcs_lattices, tower):
    cls_l = sum(1 for lat in lcs_lattices if not lat.is_zero()) + 1
    cls_u = next(i + 1 for i, lev in enumerate(tower)
                 if lev.lattice.is_full() and lev.eps_lattice.is_full())
    if cls_l != cls_u:
        raise RuntimeError("LCS class %d != UCS class %d; implementation bug" % (cls_l, cls_u))
    return cls_l


def in_upper_central_split(group, tower, k, x):
    """Exact Z_k membership for a split element (product structure of Z_k)."""
    if k <= 0:
        return group.is_identity(x)
    if k > len(tower):
        return True
    lev = tower[k - 1]
    return lev.lattice.contains(x.v) and lev.eps_lattice.contains(x.eps)


def coinciding_check(group, model_id="split"):
    """Both towers, the class, per-level coincidence verdicts, and the
    commutator-calculus containments; no verdict assumes the paper's theorems."""
    gammas = lcs(group)
    tower = ucs_tower(group)
    cls = split_class(gammas, tower)
    verdicts = []
    all_eq = True
    for i in range(2, cls + 1):
        gamma_i = gammas[i - 2]
        k = cls - i + 1
        lev = tower[k - 1]
        entry = {"gamma_level": i, "ucs_level": k,
                 "eps_rank": lev.eps_lattice.rank, "eps_status": lev.status}
        if gamma_i == lev.lattice and lev.eps_lattice.is_zero():
            entry["relation"] = "equal"
            entry["index"] = 1
        elif lev.lattice.contains_lattice(gamma_i):
            entry["relation"] = "strict"
            entry["index"] = gamma_i.index_in(lev.lattice)
            if lev.eps_lattice.rank > 0:
                entry["eps_note"] = "Z-level has base directions absent from gamma"
        elif gamma_i.contains_lattice(lev.lattice):
            entry["relation"] = "strict_reversed"
            entry["index"] = lev.lattice.index_in(gamma_i)
        else:
            entry["relation"] = "incomparable"
            entry["index"] = None
        if entry["relation"] != "equal":
            all_eq = False
        verdicts.append(entry)
    prop13 = _prop13_checks(group, gammas, cls)
    if cls >= 2:
        gamma_c_in_l1 = tower[0].lattice.contains_lattice(gammas[cls - 2])
    else:
        gamma_c_in_l1 = True
    return SeriesReport(model_id=model_id, lcs=gammas, ucs=tower, cls=cls,
                        coincide=verdicts, all_coincide=all_eq, prop13=prop13,
                        gamma_c_in_L1=gamma_c_in_l1)


def _prop13_checks(group, gammas, cls):
    """[gamma_i, gamma_j] <= gamma_{i+j}, generated from commutators of basis
    elements with the generators (j = 1) or between fiber bases (i, j >= 2)."""
    from .semidirect import SplitElement
    d = group.d
    out = []
    zero = IntLattice.zero(d)

    def gamma(i):
        if i <= 1:
            return None  # whole group
        idx = i - 2
        return gammas[idx] if idx < len(gammas) else zero

    for i in range(2, cls + 1):
        # j = 1: [gamma_i, G] must equal the next term by construction; re-derive.
        gi = gamma(i)
        rows = []
        for b in gi.basis:
            x = SplitElement(tuple(b), (0,) * group.r)
            for gen in group.generators():
                rows.append(group.commutator(x, gen).v)
        from_comms = _closure_under(IntLattice.span(rows, d),
                                    [a.rows for a in group.action] +
                                    [_unipotent_inverse_rows(a.rows) for a in group.action],
                                    d + 2)
        target = gamma(i + 1)
        out.append({"i": i, "j": 1,
                    "holds": target.contains_lattice(from_comms),
                    "equals_next": from_comms == target})
        for j in range(2, cls + 2 - i):
            gj = gamma(j)
            ok = True
            for b in gi.basis:
                for b2 in gj.basis:
                    comm = group.commutator(SplitElement(tuple(b), (0,) * group.r),
                                            SplitElement(tuple(b2), (0,) * group.r))
                    if not group.is_identity(comm):
                        ok = False
            out.append({"i": i, "j": j, "holds": ok, "equals_next": None})
    return out


def tightness_check_split(group, report=None):
    """Class of each upper central term Z_k, computed by restricting the action
    to L_k (in its own basis) with the base directions of E_k."""
    if report is None:
        report = coinciding_check(group)
    out = []
    tight = True
    for k in range(1, report.cls + 1):
        lev = report.ucs[k - 1]
        lat, eps = lev.lattice, lev.eps_lattice
        if lat.rank == 0:
            zk_class = 1 if eps.rank > 0 else 0
        elif eps.rank == 0:
            zk_class = 1
        else:
            basis_t = mat_transpose(lat.basis)
            restricted = []
            for f in eps.basis:
                phi_f = group.phi(f)
                cols = []
                for b in lat.basis:
                    w = phi_f.apply(b)
                    x = solve_integer(basis_t, w)
                    if x is None:
                        raise RuntimeError("L_k not invariant under Phi; bug")
                    cols.append(x)
                restricted.append(mat_transpose(cols))
            zk_gammas = lcs_from_action(restricted, lat.rank)
            zk_class = sum(1 for g in zk_gammas if not g.is_zero()) + 1
        out.append({"k": k, "class": zk_class, "tight_here": zk_class == k})
        if zk_class != k:
            tight = False
    return {"per_level": out, "tight": tight}


# -- ball-scoped analogues for matrix groups ---------------------------------

def ball_series_report(b):
    """Level-by-level comparison of the LCS probe (one-sided) with the exact
    ball restriction of the UCS, plus class estimates from both sides."""
    ident = UniMatrix.identity(b.group.n)
    levels = mm.lcs_level_sets(b)
    cls_lcs = 0
    for lev in levels:
        if lev == (ident,):
            break
        cls_lcs += 1
    ucs_sets = []
    k = 1
    while True:
        zk = mm.ucs_probe(b, k)
        ucs_sets.append(zk)
        if len(zk) == len(b.elements):
            break
        k += 1
        if k > b.group.n + 2:
            raise RuntimeError("ball UCS probe failed to exhaust; bug")
    cls_ucs = len(ucs_sets)
    per_level = []
    agree = cls_lcs == cls_ucs
    ball_set = set(b.elements)
    for i in range(2, cls_lcs + 1):
        gamma_in_ball = tuple(m for m in levels[i - 1] if m in ball_set)
        kk = cls_lcs - i + 1
        z_in_ball = ucs_sets[kk - 1] if kk - 1 < len(ucs_sets) else b.elements
        same = set(gamma_in_ball) == set(z_in_ball)
        per_level.append({"gamma_level": i, "ucs_level": kk,
                          "gamma_ball_size": len(gamma_in_ball),
                          "ucs_ball_size": len(z_in_ball),
                          "agree": same})
        if not same:
            agree = False
    return {"class_lcs": cls_lcs, "class_ucs": cls_ucs, "levels": per_level,
            "agree_within_ball": agree, "truncated": b.truncated,
            "scope": "one-sided: LCS probe generates from ball commutators"}


def tightness_check_ball(b, partner_cap=80):
    """Ball-scoped tightness: iterated-commutator class estimate of each
    Z_k-probe set (a lower bound on the true class of Z_k).  Commutator
    partners are capped deterministically; the estimate is a lower bound
    either way."""
    ident = UniMatrix.identity(b.group.n)
    report = ball_series_report(b)
    cls = report["class_ucs"]
    out = []
    tight = True
    for k in range(1, cls + 1):
        zk = mm.ucs_probe(b, k)
        level = list(zk)[:partner_cap]
        level_inv = [(p, p.inverse()) for p in level]
        est = 1 if len(level) > 1 else 0
        cur = level
        while True:
            nxt = set()
            for m in cur:
                mi = m.inverse()
                for p, pi in level_inv:
                    c = mi * pi * m * p
                    if not c.is_identity():
                        nxt.add(c)
            if not nxt:
                break
            est += 1
            cur = tuple(sorted(nxt, key=lambda u: u.rows))
            if est > b.group.n + 2:
                raise RuntimeError("ball tightness estimate failed to terminate")
        out.append({"k": k, "class_estimate": est, "tight_here": est == k})
        if est != k:
            tight = False
    return {"per_level": out, "tight": tight,
            "scope": "ball-scoped lower bound", "truncated": b.truncated}
