"""Group-spec ingestion, verification-suite orchestration, and report output.

Specs are JSON; reports are JSON (canonical, byte-identical for a fixed
spec/seed/version) or a human-readable text summary.  Exit codes: 0 all
applicable checks consistent, 2 discrepancies found (documented gaps in the
source claims count as discrepancies, not tool failures), 1 tool error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import dataclass, is_dataclass

from . import __version__
from .exact_linear import IntLattice, UniMatrix
from .weights import (WeightVector, pascal_table, template_matrix,
                      extract_weights)
from .semidirect import (NonCommutingActionError, SplitElement,
                         build_split_group)
from . import matrix_model as mm
from . import series as ser
from . import centralizers as cz

ALL_CHECKS = ("cocentral", "fl", "grun", "log", "malnormal", "metabelian",
              "pascal", "series", "tightness", "weighted_roots")

DEFAULT_BOUNDS = {"eps_bound": 5, "ball_radius": 3, "box_radius": 2,
                  "ball_cap": None}


class SpecError(ValueError):
    """Spec validation failure; carries a JSON-pointer to the offending field."""

    def __init__(self, pointer, message):
        self.pointer = pointer
        super().__init__("%s: %s" % (pointer, message))


@dataclass
class GroupSpec:
    model: str
    payload: dict      # normalized model-specific fields
    bounds: dict
    seed: int

    def to_json(self):
        doc = {"model": self.model, **self.payload, "seed": self.seed}
        bounds = {k: v for k, v in self.bounds.items()
                  if v is not None and v != DEFAULT_BOUNDS.get(k)}
        if bounds:
            doc["bounds"] = bounds
        return json.dumps(doc, sort_keys=True, separators=(",", ": "), indent=2) + "\n"


def _expect(cond, pointer, message):
    if not cond:
        raise SpecError(pointer, message)


def _int_at(doc, key, pointer, minimum=None):
    _expect(key in doc, pointer + "/" + key, "missing")
    v = doc[key]
    _expect(isinstance(v, int) and not isinstance(v, bool), pointer + "/" + key,
            "expected an integer")
    if minimum is not None:
        _expect(v >= minimum, pointer + "/" + key, "must be >= %d" % minimum)
    return v


def _matrix_at(entry, n, pointer):
    _expect(isinstance(entry, list) and len(entry) == n, pointer,
            "expected an %dx%d matrix" % (n, n))
    for i, row in enumerate(entry):
        _expect(isinstance(row, list) and len(row) == n, "%s/%d" % (pointer, i),
                "expected a row of %d integers" % n)
        for j, x in enumerate(row):
            _expect(isinstance(x, int) and not isinstance(x, bool),
                    "%s/%d/%d" % (pointer, i, j), "expected an integer")
    try:
        return UniMatrix(entry)
    except ValueError as e:
        raise SpecError(pointer, str(e))


def parse_spec(text):
    """Validate and normalize a JSON group spec; parse(emit(parse(t))) == parse(t)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecError("", "not valid JSON: %s" % e)
    _expect(isinstance(doc, dict), "", "expected a JSON object")
    _expect("model" in doc, "/model", "missing")
    model = doc["model"]
    _expect(model in ("split", "matrix", "template", "product"), "/model",
            "unknown model %r" % (model,))
    seed = doc.get("seed", 0)
    _expect(isinstance(seed, int) and not isinstance(seed, bool), "/seed",
            "expected an integer")
    bounds = dict(DEFAULT_BOUNDS)
    if "bounds" in doc:
        _expect(isinstance(doc["bounds"], dict), "/bounds", "expected an object")
        for k, v in doc["bounds"].items():
            _expect(k in DEFAULT_BOUNDS, "/bounds/" + k, "unknown bound")
            _expect(isinstance(v, int) and not isinstance(v, bool), "/bounds/" + k,
                    "expected an integer")
            bounds[k] = v
    payload = {}
    if model == "split":
        d = _int_at(doc, "d", "", minimum=1)
        r = _int_at(doc, "r", "", minimum=1)
        _expect("action" in doc, "/action", "missing")
        act = doc["action"]
        _expect(isinstance(act, list) and len(act) == r, "/action",
                "expected %d action matrices" % r)
        for idx, entry in enumerate(act):
            _matrix_at(entry, d, "/action/%d" % idx)
        payload = {"d": d, "r": r, "action": act}
    elif model == "template":
        c = _int_at(doc, "c", "", minimum=4)
        r = _int_at(doc, "r", "", minimum=1)
        _expect("weights" in doc, "/weights", "missing")
        ws = doc["weights"]
        _expect(isinstance(ws, list) and len(ws) == r, "/weights",
                "expected %d weight vectors" % r)
        for idx, entry in enumerate(ws):
            _expect(isinstance(entry, list) and len(entry) == c - 3,
                    "/weights/%d" % idx, "expected %d integers" % (c - 3))
            for j, x in enumerate(entry):
                _expect(isinstance(x, int) and not isinstance(x, bool),
                        "/weights/%d/%d" % (idx, j), "expected an integer")
                _expect(x != 0, "/weights/%d/%d" % (idx, j),
                        "weights must be nonzero")
        payload = {"c": c, "r": r, "weights": ws}
    elif model == "matrix":
        n = _int_at(doc, "n", "", minimum=2)
        _expect("generators" in doc, "/generators", "missing")
        gens = doc["generators"]
        _expect(isinstance(gens, list) and gens, "/generators",
                "expected a nonempty list")
        for idx, entry in enumerate(gens):
            _matrix_at(entry, n, "/generators/%d" % idx)
        payload = {"n": n, "generators": gens}
        if "labels" in doc:
            labs = doc["labels"]
            _expect(isinstance(labs, list) and len(labs) == len(gens) and
                    all(isinstance(x, str) for x in labs), "/labels",
                    "expected one string per generator")
            payload["labels"] = labs
    elif model == "product":
        _expect("factors" in doc, "/factors", "missing")
        facs = doc["factors"]
        _expect(isinstance(facs, list) and facs, "/factors",
                "expected a nonempty list")
        norm = []
        for idx, sub in enumerate(facs):
            _expect(isinstance(sub, dict), "/factors/%d" % idx, "expected an object")
            _expect(sub.get("model") == "matrix", "/factors/%d/model" % idx,
                    "product factors must be matrix specs")
            subspec = parse_spec(json.dumps(sub))
            norm.append({"model": "matrix", **subspec.payload})
        payload = {"factors": norm}
    return GroupSpec(model=model, payload=payload, bounds=bounds, seed=seed)


def build_from_spec(spec):
    """Returns ("split", SplitGroup, extras) or ("matrix", MatrixGroup, extras).

    A non-commuting split/template action raises NonCommutingActionError; the
    caller reports it as a finding (exit 2), not a tool failure."""
    if spec.model == "split":
        action = [UniMatrix(m) for m in spec.payload["action"]]
        g = build_split_group(spec.payload["d"], spec.payload["r"], action)
        return "split", g, {}
    if spec.model == "template":
        c = spec.payload["c"]
        wvs = [WeightVector(c, w) for w in spec.payload["weights"]]
        action = [template_matrix(w) for w in wvs]
        g = build_split_group(c - 2, spec.payload["r"], action)
        return "split", g, {"weight_vectors": wvs}
    if spec.model == "matrix":
        gens = [UniMatrix(m) for m in spec.payload["generators"]]
        labels = spec.payload.get("labels")
        return "matrix", mm.MatrixGroup(spec.payload["n"], gens, labels), {}
    if spec.model == "product":
        factors = []
        for sub in spec.payload["factors"]:
            gens = [UniMatrix(m) for m in sub["generators"]]
            factors.append(mm.MatrixGroup(sub["n"], gens, sub.get("labels")))
        return "matrix", mm.direct_product(factors), {}
    raise SpecError("/model", "unhandled model %r" % (spec.model,))


# -- JSON encoding ------------------------------------------------------------

def to_jsonable(obj):
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, float):
        return obj
    if isinstance(obj, UniMatrix):
        return [list(r) for r in obj.rows]
    if isinstance(obj, IntLattice):
        return {"ambient": obj.ambient, "basis": [list(r) for r in obj.basis]}
    if isinstance(obj, SplitElement):
        return {"v": list(obj.v), "eps": list(obj.eps)}
    if isinstance(obj, ser.UcsLevel):
        return {"lattice": to_jsonable(obj.lattice),
                "eps_lattice": to_jsonable(obj.eps_lattice), "status": obj.status}
    if isinstance(obj, cz.CentralizerDescription):
        return {"fiber_part": to_jsonable(obj.fiber_part),
                "eps_lattice": to_jsonable(obj.eps_lattice),
                "rank": obj.rank, "method": obj.method,
                "image_direction": to_jsonable(obj.image_direction)}
    if isinstance(obj, dict):
        out = {}
        for k, v in obj.items():
            if isinstance(k, tuple):
                k = ",".join(map(str, k))
            elif not isinstance(k, str):
                k = str(k)
            out[k] = to_jsonable(v)
        return out
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = list(obj)
        if isinstance(obj, (set, frozenset)):
            items = sorted(items, key=repr)
        return [to_jsonable(x) for x in items]
    if is_dataclass(obj):
        return to_jsonable({f: getattr(obj, f) for f in obj.__dataclass_fields__})
    return repr(obj)


def _series_payload(report):
    levels = []
    for v in report.coincide:
        entry = dict(v)
        if entry.get("relation") in ("strict", "strict_reversed") and entry.get("index") is None:
            entry["index"] = "infinite"
        levels.append(entry)
    return {"class": report.cls,
            "lcs": [to_jsonable(l) for l in report.lcs],
            "ucs": [to_jsonable(l) for l in report.ucs],
            "coincide": levels, "all_coincide": report.all_coincide,
            "prop13": report.prop13, "gamma_c_in_L1": report.gamma_c_in_L1}


# -- the suite ----------------------------------------------------------------

def _split_checks(group, extras, bounds, seed, checks):
    out = {}
    report = ser.coinciding_check(group)
    box = bounds["box_radius"]
    eps_bound = bounds["eps_bound"]
    gamma2 = report.lcs[0]

    if "series" in checks:
        ok = report.all_coincide and report.gamma_c_in_L1 and \
            all(p["holds"] for p in report.prop13)
        out["series"] = {"status": "pass" if ok else "discrepancy",
                         "detail": _series_payload(report)}
    if "fl" in checks:
        res = cz.fl_check(group, report, eps_bound=eps_bound, box_radius=box)
        out["fl"] = {"status": "pass" if res["fl"] else "discrepancy",
                     "detail": to_jsonable(res)}
    if "cocentral" in checks:
        res = cz.co_centralization_sweep(group, report, box_radius=box,
                                         eps_bound=eps_bound, seed=seed)
        out["cocentral"] = {"status": "pass" if res["consistent"] else "discrepancy",
                            "detail": to_jsonable(res)}
    if "malnormal" in checks:
        targets = [g for g in group.generators()
                   if not cz.is_derived(gamma2, g)][:2]
        if not targets:
            out["malnormal"] = {"status": "not_applicable",
                                "detail": {"reason": "no non-derived generators"}}
        else:
            details = []
            ok = True
            for h in targets:
                res = cz.malnormality_check(group, h, report, conj_box=box,
                                            eps_bound=eps_bound)
                details.append({"h": to_jsonable(h), **to_jsonable(res)})
                ok = ok and res["malnormal_mod_center"]
            out["malnormal"] = {"status": "pass" if ok else "discrepancy",
                                "detail": {"targets": details}}
    if "grun" in checks:
        res = cz.grun_check(group, report, box_radius=box)
        if res.get("status") == "not_applicable":
            out["grun"] = {"status": "not_applicable", "detail": to_jsonable(res)}
        else:
            ok = res["holds"] and all(k["kernel_is_gamma2"] for k in res["kernel_claims"])
            out["grun"] = {"status": "pass" if ok else "discrepancy",
                           "detail": to_jsonable(res)}
    if "log" in checks:
        L1 = report.ucs[0].lattice
        sample = next((b for b in gamma2.basis if not L1.contains(b)), None)
        if sample is None:
            out["log"] = {"status": "not_applicable",
                          "detail": {"reason": "every derived element is central"}}
        else:
            a = SplitElement(tuple(sample), (0,) * group.r)
            res = cz.logarithm_check(group, a, report, box_radius=box)
            ok = res.get("holds", False)
            out["log"] = {"status": "pass" if ok else "discrepancy",
                          "detail": {"a": to_jsonable(a), **to_jsonable(res)}}
    if "metabelian" in checks:
        res = cz.metabelian_check_split(group, seed=seed)
        out["metabelian"] = {"status": "pass" if res["holds"] else "discrepancy",
                             "detail": to_jsonable(res)}
    if "weighted_roots" in checks:
        if report.cls < 3:
            out["weighted_roots"] = {"status": "not_applicable",
                                     "detail": {"reason": "class %d < 3" % report.cls}}
        else:
            expected = None
            wvs = extras.get("weight_vectors")
            if wvs and group.r == 1:
                expected = wvs[0]
            h = group.base_gen(0)
            chain = cz.verify_weighted_roots(group, h, report, expected=expected,
                                             eps_bound=eps_bound)
            ok = chain.status == "extracted" and not chain.discrepancies
            status = "pass" if ok else "discrepancy"
            out["weighted_roots"] = {"status": status, "detail": to_jsonable(chain)}
    if "tightness" in checks:
        res = ser.tightness_check_split(group, report)
        out["tightness"] = {"status": "pass", "detail": to_jsonable(res)}
    if "pascal" in checks:
        wvs = extras.get("weight_vectors")
        if not wvs:
            out["pascal"] = {"status": "not_applicable",
                             "detail": {"reason": "not a template spec"}}
        else:
            ok = True
            for w in wvs:
                tab = pascal_table(w)
                if extract_weights(template_matrix(w)) != w:
                    ok = False
                for i in range(3, w.c + 1):
                    for j in range(i + 1, w.c + 1):
                        for t in range(j + 1, w.c + 1):
                            if tab[(i, j)] * tab[(j, t)] != tab[(i, t)]:
                                ok = False
            out["pascal"] = {"status": "pass" if ok else "discrepancy",
                             "detail": {"vectors": [list(w.weights) for w in wvs]}}
    return out


def _matrix_checks(group, bounds, seed, checks):
    out = {}
    radius = bounds["ball_radius"]
    cap = bounds["ball_cap"]
    b = mm.ball(group, radius, cap=cap)
    ball_info = {"radius": radius, "size": len(b.elements), "truncated": b.truncated}
    sr = None
    if {"series", "grun", "tightness"} & set(checks):
        sr = ser.ball_series_report(b)
    if "series" in checks:
        out["series"] = {"status": "pass" if sr["agree_within_ball"] else "discrepancy",
                         "detail": {**to_jsonable(sr), "ball": ball_info}}
    if "fl" in checks:
        res = cz.fl_check_ball(b)
        out["fl"] = {"status": "pass" if res["fl"] else "discrepancy",
                     "detail": {**to_jsonable(res), "ball": ball_info}}
    if "cocentral" in checks:
        res = cz.co_centralization_check_ball(b)
        out["cocentral"] = {"status": "pass" if res["consistent"] else "discrepancy",
                            "detail": {**to_jsonable(res), "ball": ball_info}}
    if "metabelian" in checks:
        res = cz.metabelian_check_ball(b)
        out["metabelian"] = {"status": "pass" if res["holds"] else "discrepancy",
                             "detail": {**to_jsonable(res), "ball": ball_info}}
    if "grun" in checks:
        res = cz.grun_check_ball(b, class_ucs=sr["class_ucs"])
        if res.get("status") == "not_applicable":
            out["grun"] = {"status": "not_applicable", "detail": to_jsonable(res)}
        else:
            out["grun"] = {"status": "pass" if res["holds"] else "discrepancy",
                           "detail": {**to_jsonable(res), "ball": ball_info}}
    if "tightness" in checks:
        res = ser.tightness_check_ball(b)
        out["tightness"] = {"status": "pass", "detail": {**to_jsonable(res),
                                                         "ball": ball_info}}
    for name in ("malnormal", "log", "weighted_roots", "pascal"):
        if name in checks:
            out[name] = {"status": "not_applicable",
                         "detail": {"reason": "defined on the split model only"}}
    return out


def run_suite(spec, checks=None, timing=False):
    """Run the requested checks; deterministic for fixed (spec, seed, version)."""
    if checks is None:
        checks = ALL_CHECKS
    bad = [c for c in checks if c not in ALL_CHECKS]
    if bad:
        raise SpecError("/checks", "unknown checks: %s" % ",".join(bad))
    started = time.monotonic()
    report = {"tool": {"name": "nilwork", "version": __version__},
              "spec": json.loads(spec.to_json()), "seed": spec.seed,
              "checks": {}, "discrepancies": [], "timing": None}
    try:
        kind, group, extras = build_from_spec(spec)
    except NonCommutingActionError as e:
        report["model_kind"] = "rejected"
        report["checks"]["build"] = {
            "status": "discrepancy",
            "detail": {"reason": "action matrices do not commute; the ordered-"
                                 "product map is not a homomorphism",
                       "witness": {"i": e.witness.i, "j": e.witness.j,
                                   "entry": list(e.witness.entry),
                                   "left": e.witness.left, "right": e.witness.right},
                       "associativity_probe": to_jsonable(e.probe_witness)}}
        report["discrepancies"].append({"check": "build",
                                        "entry": list(e.witness.entry)})
        if timing:
            report["timing"] = round(time.monotonic() - started, 3)
        return report, 2
    report["model_kind"] = kind
    if kind == "split":
        results = _split_checks(group, extras, spec.bounds, spec.seed, checks)
    else:
        results = _matrix_checks(group, spec.bounds, spec.seed, checks)
    report["checks"] = {k: results[k] for k in sorted(results)}
    for name in sorted(results):
        if results[name]["status"] == "discrepancy":
            report["discrepancies"].append({"check": name})
    if timing:
        report["timing"] = round(time.monotonic() - started, 3)
    exit_code = 2 if report["discrepancies"] else 0
    return report, exit_code


def emit_report(report, fmt="json"):
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2,
                          separators=(",", ": ")) + "\n"
    lines = ["nilwork %s  model=%s  seed=%s" % (report["tool"]["version"],
                                                report.get("model_kind", "?"),
                                                report.get("seed"))]
    for name in sorted(report["checks"]):
        res = report["checks"][name]
        lines.append("%-16s %s" % (name, res["status"]))
    if report["discrepancies"]:
        lines.append("discrepancies: %s" %
                     ", ".join(d["check"] for d in report["discrepancies"]))
    else:
        lines.append("discrepancies: none")
    if report.get("timing") is not None:
        lines.append("timing: %ss" % report["timing"])
    return "\n".join(lines) + "\n"


def main(argv=None):
    parser = argparse.ArgumentParser(prog="workbench",
                                     description="nilpotent-group claim workbench")
    sub = parser.add_subparsers(dest="command")
    run_p = sub.add_parser("run", help="run the verification suite on a spec")
    run_p.add_argument("spec", help="path to a JSON group spec")
    run_p.add_argument("--checks", default=None,
                       help="comma-separated subset of: %s" % ",".join(ALL_CHECKS))
    run_p.add_argument("--seed", type=int, default=None)
    run_p.add_argument("--out", default=None)
    run_p.add_argument("--format", choices=("json", "text"), default="json")
    run_p.add_argument("--ball-radius", type=int, default=None)
    run_p.add_argument("--eps-bound", type=int, default=None)
    run_p.add_argument("--box-radius", type=int, default=None)
    run_p.add_argument("--ball-cap", type=int, default=None)
    run_p.add_argument("--timing", action="store_true")
    args = parser.parse_args(argv)
    if args.command != "run":
        parser.print_help()
        return 1
    try:
        with open(args.spec, "r", encoding="utf-8") as fh:
            spec = parse_spec(fh.read())
    except OSError as e:
        print("error: %s" % e, file=sys.stderr)
        return 1
    except SpecError as e:
        print("spec error at %s" % e, file=sys.stderr)
        return 1
    if args.seed is not None:
        spec.seed = args.seed
    for key, val in (("ball_radius", args.ball_radius),
                     ("eps_bound", args.eps_bound),
                     ("box_radius", args.box_radius),
                     ("ball_cap", args.ball_cap)):
        if val is not None:
            spec.bounds[key] = val
    checks = None
    if args.checks is not None:
        checks = tuple(c for c in args.checks.split(",") if c)
    try:
        report, code = run_suite(spec, checks=checks, timing=args.timing)
    except SpecError as e:
        print("spec error at %s" % e, file=sys.stderr)
        return 1
    except Exception as e:  # tool failure, not a finding
        print("tool error: %r" % (e,), file=sys.stderr)
        return 1
    text = emit_report(report, args.format)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
