"""Command line entry point.

JSON results go to stdout (or ``--out``); CHECK lines go to stdout for the
report commands and to stderr for commands that also emit JSON.
"""
import argparse
import json
import sys

import numpy as np

from . import chain as ch
from . import classify as cl
from . import diagram as dg
from . import fixtures as fx
from . import scomplex as sc
from .poset import delta_tilde, poset_to_json
from .selftest import Check, RunConfig, run_selftest


class Report:
    def __init__(self, stream):
        self.stream = stream
        self.ok = True

    def check(self, name, ok, detail=""):
        self.ok &= bool(ok)
        print(Check(name, bool(ok), detail).line(), file=self.stream)


def _load(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise SystemExit(f"error: cannot read {path}: {exc.strerror}")
    except json.JSONDecodeError as exc:
        raise SystemExit(f"error: {path}: invalid JSON ({exc.msg} at line {exc.lineno})")


def _emit(obj, args):
    text = json.dumps(obj, sort_keys=True, separators=(",", ":"))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def complex_of_face_poset(P):
    """Recover an ordered complex on vertex indices from a face poset of index tuples."""
    verts = sorted(x[0] for x in P.elements if len(x) == 1)
    return sc.SimplicialComplex(verts, [x for x in P.maximal()])


def cmd_delta_poset(args, rep):
    if args.n < 0 or args.n > 6:
        raise SystemExit("error: N must be between 0 and 6")
    _emit(poset_to_json(delta_tilde(args.n)), args)
    return True


def cmd_subdivide(args, rep):
    K = sc.complex_from_json(_load(args.complex))
    _emit(sc.complex_to_json(sc.barycentric_subdivide(K)), args)
    return True


def cmd_stars(args, rep):
    K = sc.complex_from_json(_load(args.complex))
    st = sc.star_poset(K)
    ann = {json.dumps([sc._jsonable(v) for v in K.label(s)]): len(st.annotation(s)) for s in st.poset.elements}
    ok = st.open_star_order_ok()
    rep.check("star_order", ok, f"stars={len(st.poset)}")
    _emit({"poset": poset_to_json(st.poset), "annotation_sizes": ann}, args)
    return ok


def cmd_check_simplex(args, rep):
    d = dg.diagram_from_json(_load(args.diagram))
    base = ch.complex_from_json(_load(args.base)) if args.base else None
    bad = cl.simplex_failures(d, base)
    rep.check("simplex", not bad, "valid" if not bad else "; ".join(bad))
    return not bad


def cmd_fibrant_replace(args, rep):
    d = dg.diagram_from_json(_load(args.diagram))
    r = dg.fibrant_replace(d, factorization=args.factorization)
    ok = dg.is_fibrant(r.diagram)
    rep.check("fibrant", ok, f"replaced={sum(c.replaced for c in r.cells.values())}")
    _emit(dg.diagram_to_json(r.diagram), args)
    return ok


def cmd_horn_fill(args, rep):
    obj = _load(args.faces)
    raw = obj.get("faces") if isinstance(obj, dict) else obj
    if not isinstance(raw, list):
        raise SystemExit("error: faces file needs a list 'faces' (use null at position k)")
    faces = [None if f is None else cl.verify_simplex(dg.diagram_from_json(f)) for f in raw]
    h = cl.horn_fill(faces, args.k)
    bad = cl.simplex_failures(h.data)
    rep.check("horn_fill", not bad, f"n={h.n} k={args.k}")
    _emit(dg.diagram_to_json(h.data), args)
    return not bad


def cmd_lambda(args, rep):
    F = dg.diagram_from_json(_load(args.diagram))
    T = sc.complex_from_json(_load(args.complex))
    f = cl.lambda_map(F, T).f
    ok = not f.compatibility_failures()
    rep.check("lambda_compatible", ok, f"simplices={len(f.values)}")
    _emit(cl.map_to_json(f), args)
    return ok


def cmd_theta(args, rep):
    f = cl.map_from_json(_load(args.map))
    F = cl.theta_map(f)
    ok = dg.is_fibrant(F) and dg.is_isotopy_functor(F)
    rep.check("theta_fibrant_isotopy", ok, f"objects={len(F.shape)}")
    _emit(dg.diagram_to_json(F), args)
    return ok


def cmd_roundtrip(args, rep):
    obj = _load(args.input)
    if isinstance(obj, dict) and "simplices" in obj:
        f = cl.map_from_json(obj)
        r = cl.roundtrip_check(f, f.complex)
    else:
        F = dg.diagram_from_json(obj)
        T = sc.complex_from_json(_load(args.complex)) if args.complex else complex_of_face_poset(F.shape)
        r = cl.roundtrip_check(F, T)
    rep.check("roundtrip", r.ok, r.detail.replace(" ", "_"))
    return r.ok


def cmd_homotopy(args, rep):
    eta = cl.nat_from_json(_load(args.transformation))
    T = sc.complex_from_json(_load(args.complex)) if args.complex else complex_of_face_poset(eta.source.shape)
    H = cl.homotopy_from_weq(cl.nat_weq_to_map_weq(eta, T), T)
    ok = not cl.homotopy_face_failures(H)
    rep.check("homotopy_faces", ok, f"cells={len(H.cells)}")
    _emit(cl.homotopy_to_json(H), args)
    return ok


def cmd_zigzag(args, rep):
    H = cl.homotopy_from_json(_load(args.homotopy))
    z = cl.zigzag_from_homotopy(H)
    ok_ends = z.start == cl.theta_map(H.f) and z.end() == cl.theta_map(H.fp)
    ok_arrows = z.is_valid() and all(e.is_natural() and e.is_weq() for e, _ in z.steps)
    rep.check("zigzag_endpoints", ok_ends, f"steps={len(z.steps)}")
    rep.check("zigzag_weak_equivalences", ok_arrows, f"steps={len(z.steps)}")
    _emit(cl.zigzag_to_json(z), args)
    return ok_ends and ok_arrows


EXAMPLE_COMPLEXES = {"simplex1": lambda: sc.SimplicialComplex.simplex(1),
                     "simplex2": lambda: sc.SimplicialComplex.simplex(2),
                     "glued-disk": fx.glued_disk}


def cmd_example(args, rep):
    cfg = RunConfig.from_env(seed=args.seed, p=args.prime)
    rng = np.random.default_rng(cfg.seed)
    T = EXAMPLE_COMPLEXES[args.complex]()
    base = fx.base_complex(cfg.p)
    if args.kind == "complex":
        out = sc.complex_to_json(T)
    elif args.kind == "diagram":
        out = dg.diagram_to_json(fx.random_isotopy_diagram(rng, sc.face_poset(T), base))
    elif args.kind == "simplex-diagram":
        out = dg.diagram_to_json(fx.random_isotopy_diagram(rng, delta_tilde(T.dim), base))
    else:
        F = fx.random_isotopy_diagram(rng, sc.face_poset(T), base)
        out = cl.nat_to_json(fx.random_weq(rng, F))
    _emit(out, args)
    return True


def cmd_selftest(args, rep):
    try:
        cfg = RunConfig.from_env(seed=args.seed, p=args.prime, max_dim=args.max_dim, verbose=args.verbose)
    except ValueError as exc:
        raise SystemExit(f"error: {exc}")
    results = run_selftest(cfg, out=sys.stdout)
    return all(c.ok for c in results)


def build_parser():
    ap = argparse.ArgumentParser(prog="hofun", description="Diagrams of chain complexes over F_p and the classifying simplicial set.")
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, *positional, out=True, report_stdout=False):
        p = sub.add_parser(name)
        for arg in positional:
            p.add_argument(arg)
        if out:
            p.add_argument("-o", "--out", help="write JSON here instead of stdout")
        p.set_defaults(fn=fn, report_stdout=report_stdout or not out)
        return p

    p = add("delta-poset", cmd_delta_poset)
    p.add_argument("n", type=int, metavar="N")
    add("subdivide", cmd_subdivide, "complex")
    add("stars", cmd_stars, "complex")
    p = add("check-simplex", cmd_check_simplex, "diagram", out=False)
    p.add_argument("--base", help="complex every value must be quasi-isomorphic to")
    p = add("fibrant-replace", cmd_fibrant_replace, "diagram")
    p.add_argument("--factorization", choices=sorted(ch.FACTORIZATIONS), default="cocylinder")
    p = add("horn-fill", cmd_horn_fill, "faces")
    p.add_argument("--k", type=int, required=True)
    add("lambda", cmd_lambda, "diagram", "complex")
    add("theta", cmd_theta, "map")
    p = add("roundtrip", cmd_roundtrip, "input", out=False)
    p.add_argument("--complex", help="triangulation (default: read off the diagram's shape)")
    p = add("homotopy", cmd_homotopy, "transformation")
    p.add_argument("--complex")
    add("zigzag", cmd_zigzag, "homotopy")
    p = add("example", cmd_example)
    p.add_argument("kind", choices=["complex", "diagram", "simplex-diagram", "weq"])
    p.add_argument("--complex", choices=sorted(EXAMPLE_COMPLEXES), default="simplex2")
    p.add_argument("--seed", type=int)
    p.add_argument("--prime", type=int)
    p = add("selftest", cmd_selftest, out=False)
    p.add_argument("--max-dim", type=int, default=None)
    p.add_argument("--seed", type=int)
    p.add_argument("--prime", type=int)
    p.add_argument("-v", "--verbose", action="store_true")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    rep = Report(sys.stdout if args.report_stdout else sys.stderr)
    try:
        ok = args.fn(args, rep)
    except (ValueError, NotImplementedError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0 if ok and rep.ok else 1


if __name__ == "__main__":
    sys.exit(main())
