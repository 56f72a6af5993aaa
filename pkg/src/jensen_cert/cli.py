"""Command-line front end.

Exit codes: 0 success or certified, 1 a well-formed negative answer, 2 error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time

import numpy as np

from . import __version__
from .bodies import KINDS, BodySpec, generate
from .certifier import CANDIDATE_TOL, CERT_REL_TOL, certify
from .errors import JensenCertError
from .geometry import GEO_REL_TOL, build_body
from .integrate import (
    DEFAULT_SAMPLES,
    FAMILIES,
    Affine,
    MaxAffine,
    Quadratic,
    hh_gap,
    lemma_sides,
    random_function,
)

EXIT_OK, EXIT_NEGATIVE, EXIT_ERROR = 0, 1, 2


class UsageError(JensenCertError):
    pass


# --- serialisation -----------------------------------------------------------

def _format_float(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot serialise non-finite value {x}")
    s = format(x, ".17g")
    if not any(ch in s for ch in ".en"):
        s += ".0"
    return s


def dumps(obj, indent: int = 2, _level: int = 0) -> str:
    """JSON text with every float written to 17 significant digits."""
    pad = " " * (indent * (_level + 1))
    end = " " * (indent * _level)
    if isinstance(obj, (bool, np.bool_)) or obj is None:
        return json.dumps(bool(obj) if obj is not None else None)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _format_float(float(obj))
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, np.ndarray):
        obj = obj.tolist()
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple, np.ndarray)) for v in obj):
            return "[" + ", ".join(dumps(v, indent, _level + 1) for v in obj) + "]"
        items = [pad + dumps(v, indent, _level + 1) for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def body_to_json(body) -> dict:
    return {"dim": body.dim, "vertices": body.vertices.tolist()}


def load_body(path: str):
    """Read a body file: either explicit vertices or a generator spec."""
    try:
        with open(path) if path != "-" else sys.stdin as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read body file {path}: {exc}") from exc
    return parse_body(doc)


def parse_body(doc):
    if not isinstance(doc, dict):
        raise UsageError("body file must hold a JSON object")
    has_vertices, has_spec = "vertices" in doc, "spec" in doc
    if has_vertices == has_spec:
        raise UsageError("body file needs exactly one of 'vertices' or 'spec'")
    if has_spec:
        spec = doc["spec"]
        if not isinstance(spec, dict) or "kind" not in spec:
            raise UsageError("'spec' must be an object with a 'kind'")
        return generate(BodySpec(spec["kind"], dict(spec.get("params", {}))))
    rows = doc["vertices"]
    if "dim" not in doc:
        raise UsageError("vertex body files need 'dim'")
    dim = doc["dim"]
    if not isinstance(rows, list) or not rows or any(
        not isinstance(r, list) or len(r) != dim for r in rows
    ):
        raise UsageError(f"every vertex must be a list of {dim} numbers")
    try:
        pts = np.array(rows, dtype=float)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"bad vertex coordinates: {exc}") from exc
    return build_body(pts)


def function_to_json(f) -> dict:
    if isinstance(f, Affine):
        return {"kind": "affine", "w": f.w.tolist(), "b": f.b}
    if isinstance(f, Quadratic):
        return {"kind": "quadratic", "Q": f.Q.tolist(), "w": f.w.tolist(), "b": f.b}
    if isinstance(f, MaxAffine):
        return {"kind": "max_affine", "W": f.W.tolist(), "b": f.b.tolist()}
    raise TypeError(type(f).__name__)


def _substream_seed(seed: int, *key: int) -> int:
    ss = np.random.SeedSequence(int(seed), spawn_key=key)
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _family_rng(seed: int, family: str):
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(99, FAMILIES.index(family))))


# --- commands ----------------------------------------------------------------

def cmd_gen(args) -> int:
    params = {}
    for name in ("dim", "half_width", "half_widths", "n", "inradius", "length", "seed",
                 "points", "facets", "scale", "level", "center"):
        value = getattr(args, name)
        if value is not None:
            params[name] = value
    if args.corner:
        params["regular"] = False
    body = generate(BodySpec(args.kind, params))
    print(dumps(body_to_json(body)))
    return EXIT_OK


def build_report(body, tol: float, with_timings: bool = False) -> dict:
    start = time.perf_counter()
    report = certify(body, tol)
    elapsed = time.perf_counter() - start
    doc = {
        "tool": "jensen-cert",
        "version": __version__,
        "seed": None,
        "tolerances": {
            "candidate": tol,
            "certificate_relative": CERT_REL_TOL,
            "geometric_relative": GEO_REL_TOL,
        },
        "report": report.to_dict(),
    }
    if with_timings:
        doc["timings"] = {"certify_seconds": elapsed}
    return doc


def cmd_certify(args) -> int:
    body = load_body(args.body)
    doc = build_report(body, args.tol, args.timings)
    rep = doc["report"]
    if args.json:
        print(dumps(doc))
    else:
        verdict = "CERTIFIED" if rep["certified"] else "not certified"
        print(f"dimension            {rep['dim']}")
        print(f"volume               {rep['volume']:.12g}")
        print(f"surface area         {rep['surface_area']:.12g}")
        print(f"Jensen candidate     {rep['is_candidate']} (centroid gap {rep['centroid_gap']:.3e})")
        print(f"best origin          {(np.round(rep['origin_used'], 12) + 0.0).tolist()}")
        if not rep["origin_interior"]:
            print("                     (on the boundary: h_max is an infimum over interior origins)")
        print(f"h_max at origin      {rep['h_max']:.12g}")
        print(f"bound (d+1)|V|/|S|   {rep['bound']:.12g}  (ratio {rep['ratio']:.6g})")
        print(f"inscribed radius     {rep['inscribed_radius']:.12g}")
        print(f"tangent identity     {rep['tangent_identity_holds']}")
        print(f"result               {verdict}{' (strict)' if rep['strict'] else ''}")
    return EXIT_OK if rep["certified"] else EXIT_NEGATIVE


def run_battery(body, families, n_functions: int, samples: int, seed: int, workers: int = 1):
    """Gap of every battery function; returns one record per function."""
    records = []
    for family in families:
        rng = _family_rng(seed, family)
        for i in range(n_functions):
            f = random_function(family, body, rng)
            gap, err = hh_gap(body, f, samples, _substream_seed(seed, FAMILIES.index(family), i),
                              workers=workers)
            records.append({"family": family, "index": i, "gap": gap, "stderr": err,
                            "ok": gap >= -3 * err - 1e-9, "function": f})
    return records


def cmd_hh_test(args) -> int:
    body = load_body(args.body)
    families = FAMILIES if args.family == "all" else (args.family,)
    records = run_battery(body, families, args.functions, args.samples, args.seed, args.workers)
    worst = min(records, key=lambda r: r["gap"] + 3 * r["stderr"])
    summary = {
        "tool": "jensen-cert",
        "version": __version__,
        "seed": args.seed,
        "samples": args.samples,
        "functions_per_family": args.functions,
        "families": {
            fam: {
                "min_gap": min(r["gap"] for r in records if r["family"] == fam),
                "failures": sum(not r["ok"] for r in records if r["family"] == fam),
            }
            for fam in families
        },
        "worst": {
            "family": worst["family"],
            "index": worst["index"],
            "gap": worst["gap"],
            "stderr": worst["stderr"],
            "function": function_to_json(worst["function"]),
        },
        "all_nonnegative": all(r["ok"] for r in records),
    }
    if args.json:
        print(dumps(summary))
    else:
        for fam, s in summary["families"].items():
            print(f"{fam:<11} min gap {s['min_gap']: .6e}  failures {s['failures']}")
        print(f"worst: {worst['family']} #{worst['index']} gap {worst['gap']:.6e} "
              f"+/- {worst['stderr']:.2e}")
        print("all gaps >= -3 sigma" if summary["all_nonnegative"] else "NEGATIVE GAP FOUND")
    return EXIT_OK if summary["all_nonnegative"] else EXIT_NEGATIVE


def cmd_lemma_check(args) -> int:
    body = load_body(args.body)
    origin = np.zeros(body.dim) if args.origin is None else np.asarray(args.origin, dtype=float)
    if origin.shape != (body.dim,):
        raise UsageError(f"--origin needs {body.dim} coordinates")
    failures = 0
    results = []
    for i in range(args.functions):
        family = FAMILIES[i % len(FAMILIES)]
        rng = np.random.default_rng(np.random.SeedSequence(args.seed, spawn_key=(7, i)))
        f = random_function(family, body, rng)
        sides = lemma_sides(body, f, origin, args.samples, _substream_seed(args.seed, 8, i))
        failures += not sides.holds
        results.append({"family": family, "body_integral": sides.body_integral,
                        "boundary_term": sides.boundary_term, "stderr": sides.stderr,
                        "holds": sides.holds})
    if args.json:
        print(dumps({"origin": origin, "seed": args.seed, "checks": results, "failures": failures}))
    else:
        print(f"origin {origin.tolist()}: {args.functions - failures}/{args.functions} functions "
              f"satisfy the radial bound")
    return EXIT_OK if failures == 0 else EXIT_NEGATIVE


def cmd_search(args) -> int:
    """Scan stretched random symmetric bodies for a negative gap."""
    found = False
    for length in args.lengths:
        for s in range(args.bodies):
            spec = BodySpec("random-symmetric", {"dim": args.dim, "points": args.points, "seed": s})
            base = generate(spec)
            body = build_body(base.vertices * np.r_[length, np.ones(args.dim - 1)])
            rep = certify(body, args.tol)
            if not rep.is_candidate:
                continue
            records = run_battery(body, ("quadratic", "max_affine"), args.functions,
                                  args.samples, args.seed)
            worst = min(records, key=lambda r: r["gap"] / max(r["stderr"], 1e-300))
            neg = not worst["ok"]
            found |= neg
            print(f"length {length:g} seed {s}: ratio {rep.ratio:.3f} worst gap "
                  f"{worst['gap']:.3e} +/- {worst['stderr']:.1e}{'  NEGATIVE' if neg else ''}")
    return EXIT_NEGATIVE if found else EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="jensen-cert", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="emit a generated body as vertex JSON")
    g.add_argument("--kind", required=True, choices=KINDS)
    g.add_argument("--dim", type=int)
    g.add_argument("--half-width", type=float)
    g.add_argument("--half-widths", type=float, nargs="+")
    g.add_argument("--n", type=int)
    g.add_argument("--inradius", type=float)
    g.add_argument("--length", type=float)
    g.add_argument("--seed", type=int)
    g.add_argument("--points", type=int)
    g.add_argument("--facets", type=int)
    g.add_argument("--scale", type=float)
    g.add_argument("--level", type=int)
    g.add_argument("--center", type=float, nargs="+")
    g.add_argument("--corner", action="store_true", help="corner simplex instead of regular")
    g.set_defaults(func=cmd_gen)

    c = sub.add_parser("certify", help="certify a body file")
    c.add_argument("body")
    c.add_argument("--tol", type=float, default=CANDIDATE_TOL, help="candidate tolerance")
    c.add_argument("--json", action="store_true")
    c.add_argument("--timings", action="store_true", help="add wall-clock timings to the report")
    c.set_defaults(func=cmd_certify)

    h = sub.add_parser("hh-test", help="random convex-function battery on a body")
    h.add_argument("body")
    h.add_argument("--functions", type=int, default=100)
    h.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    h.add_argument("--seed", type=int, default=0)
    h.add_argument("--family", choices=("all",) + FAMILIES, default="all")
    h.add_argument("--workers", type=int, default=1)
    h.add_argument("--json", action="store_true")
    h.set_defaults(func=cmd_hh_test)

    m = sub.add_parser("lemma-check", help="check the radial bound around an origin")
    m.add_argument("body")
    m.add_argument("--origin", type=float, nargs="+")
    m.add_argument("--functions", type=int, default=50)
    m.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--json", action="store_true")
    m.set_defaults(func=cmd_lemma_check)

    s = sub.add_parser("search", help="look for negative gaps on stretched symmetric bodies")
    s.add_argument("--dim", type=int, default=3)
    s.add_argument("--points", type=int, default=8)
    s.add_argument("--lengths", type=float, nargs="+", default=[5.0, 10.0, 20.0])
    s.add_argument("--bodies", type=int, default=3)
    s.add_argument("--functions", type=int, default=20)
    s.add_argument("--samples", type=int, default=DEFAULT_SAMPLES)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--tol", type=float, default=CANDIDATE_TOL)
    s.set_defaults(func=cmd_search)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_ERROR if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (JensenCertError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
