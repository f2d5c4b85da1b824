"""Seeded acceptance checks shared by ``hofun selftest`` and the test suite.

Each check returns a ``Check``; reports never contain timings so two runs
with the same seed print the same bytes.
"""
import os
import sys
import time
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import chain as ch
from . import classify as cl
from . import diagram as dg
from . import fixtures as fx
from ._fp import is_prime
from .poset import codegeneracy, coface, delta_tilde, horn_poset, simplex_map
from .scomplex import SimplicialComplex, face_poset, phi_map, prism_decomposition

MAX_DIM_LIMIT = 4


@dataclass
class RunConfig:
    p: int = 2
    seed: int = 0
    max_dim: int = 4
    verbose: bool = False

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p = {self.p} is not prime")
        if not 0 <= self.max_dim <= MAX_DIM_LIMIT:
            raise ValueError(f"max dimension must be between 0 and {MAX_DIM_LIMIT}")

    @classmethod
    def from_env(cls, **kw):
        if "HOFUN_SEED" in os.environ and kw.get("seed") is None:
            kw["seed"] = int(os.environ["HOFUN_SEED"])
        if "HOFUN_PRIME" in os.environ and kw.get("p") is None:
            kw["p"] = int(os.environ["HOFUN_PRIME"])
        return cls(**{k: v for k, v in kw.items() if v is not None})


@dataclass
class Check:
    name: str
    ok: bool
    detail: str
    seconds: float = 0.0
    limit: float = None

    def line(self):
        return f"CHECK {self.name} {'PASS' if self.ok else 'FAIL'} {self.detail}"


def _rng(cfg, tag):
    return np.random.default_rng([cfg.seed, sum(ord(c) * 31 ** i for i, c in enumerate(tag)) % 2**31])


def _random_simplex(rng, n, base):
    F = fx.random_isotopy_diagram(rng, delta_tilde(n), base)
    return cl.AHSimplex(dg.fibrant_replace(F, factorization=cl.FACTORIZATION).diagram)


def _raw_face(s, i):
    return dg.precompose(s.data, coface(i, s.n - 1))


# -- 1 ----------------------------------------------------------------------

def check_cosimplicial(cfg):
    top = min(4, cfg.max_dim)
    count, bad = 0, []
    for n in range(0, top + 1):
        ident = simplex_map(tuple(range(n + 1)), n, n)
        for j in range(n + 2):
            for i in range(j):
                count += 1
                if coface(j, n + 1).compose(coface(i, n)) != coface(i, n + 1).compose(coface(j - 1, n)):
                    bad.append(("dd", n, i, j))
        for j in range(n + 1):
            s = codegeneracy(j, n)
            for i in range(n + 2):
                count += 1
                lhs = s.compose(coface(i, n))
                if i < j:
                    rhs = coface(i, n - 1).compose(codegeneracy(j - 1, n - 1))
                elif i in (j, j + 1):
                    rhs = ident
                else:
                    rhs = coface(i - 1, n - 1).compose(codegeneracy(j, n - 1))
                if lhs != rhs:
                    bad.append(("sd", n, i, j))
            for i in range(j + 1):
                count += 1
                if codegeneracy(j, n).compose(codegeneracy(i, n + 1)) != \
                        codegeneracy(i, n).compose(codegeneracy(j + 1, n + 1)):
                    bad.append(("ss", n, i, j))
    return Check("cosimplicial_identities", not bad, f"n<={top} identities={count} failures={len(bad)}", limit=1.0)


# -- 2 ----------------------------------------------------------------------

def simplicial_identity_failures(x):
    """All five identities on x, its degeneracies, and their faces (exact diagram equality)."""
    bad = []
    n = x.n
    if n >= 2:
        for j in range(n + 1):
            for i in range(j):
                if dg.precompose(_raw_face(x, j), coface(i, n - 2)) != \
                        dg.precompose(_raw_face(x, i), coface(j - 1, n - 2)):
                    bad.append(("dd", n, i, j))
    for j in range(n + 1):
        y = cl.degeneracy(x, j)
        for i in range(n + 2):
            fi = _raw_face(y, i)
            if i in (j, j + 1):
                ok = fi == x.data
            elif i < j:
                ok = fi == cl.degeneracy(cl.face(x, i), j - 1).data
            else:
                ok = fi == cl.degeneracy(cl.face(x, i - 1), j).data
            if not ok:
                bad.append(("ds", n, i, j))
        if n + 1 >= 2:
            for b in range(n + 2):
                for a in range(b):
                    if dg.precompose(_raw_face(y, b), coface(a, n - 1)) != \
                            dg.precompose(_raw_face(y, a), coface(b - 1, n - 1)):
                        bad.append(("dd-deg", n, a, b))
        if n + 2 <= 3:
            for i in range(j + 1):
                if cl.degeneracy(cl.degeneracy(x, j), i).data != cl.degeneracy(cl.degeneracy(x, i), j + 1).data:
                    bad.append(("ss", n, i, j))
    return bad


def check_simplicial(cfg, count=20):
    rng = _rng(cfg, "simplicial")
    base = fx.base_complex(cfg.p)
    bad, total = [], 0
    top = min(2, cfg.max_dim)
    for n in range(top + 1):
        for _ in range(count):
            x = _random_simplex(rng, n, base)
            if cl.simplex_failures(x.data, base):
                bad.append(("invalid", n))
            for j in range(n + 1):
                if cl.simplex_failures(cl.degeneracy(x, j).data):
                    bad.append(("invalid-deg", n, j))
            bad += simplicial_identity_failures(x)
            total += 1
    return Check("simplicial_identities", not bad,
                 f"simplices={total} n<={top} degeneracies<=dim{top + 1} failures={len(bad)}", limit=60.0)


# -- 3 ----------------------------------------------------------------------

def injective_maps(m, n):
    return [c for c in combinations(range(n + 1), m + 1)]


def fibrant_replacement_failures(F):
    bad = []
    r = dg.fibrant_replace(F)
    R = r.diagram
    if not dg.is_fibrant(R):
        bad.append("not fibrant")
    if not (r.unit.is_natural() and r.unit.is_weq()):
        bad.append("unit")
    if dg.fibrant_replace(R).diagram != R:
        bad.append("not idempotent")
    n = len(F.shape.maximal()[0]) - 1
    for m in range(n):
        for c in injective_maps(m, n):
            tau = simplex_map(c, m, n)
            if dg.precompose(R, tau) != dg.fibrant_replace(dg.precompose(F, tau)).diagram:
                bad.append(f"face {c}")
    return bad


def check_fibrant_replacement(cfg, count=20):
    rng = _rng(cfg, "fibrant")
    base = fx.base_complex(cfg.p)
    bad, total, nonfib = [], 0, 0
    top = min(3, cfg.max_dim)
    for n in range(1, top + 1):
        for _ in range(count):
            F = fx.random_isotopy_diagram(rng, delta_tilde(n), base)
            nonfib += not dg.is_fibrant(F)
            bad += fibrant_replacement_failures(F)
            total += 1
    ok = not bad and nonfib == total
    return Check("fibrant_replacement", ok,
                 f"diagrams={total} nonfibrant_inputs={nonfib} n<={top} failures={len(bad)}", limit=60.0)


# -- 4 ----------------------------------------------------------------------

def check_kan_filling(cfg, count=10):
    rng = _rng(cfg, "kan")
    base = fx.base_complex(cfg.p)
    bad, total = [], 0
    top = min(3, cfg.max_dim)
    for n in range(1, top + 1):
        for _ in range(count):
            x = _random_simplex(rng, n, base)
            for k in range(n + 1):
                faces = [cl.face(x, i) if i != k else None for i in range(n + 1)]
                h = cl.horn_fill(faces, k)
                total += 1
                if cl.simplex_failures(h.data, base):
                    bad.append((n, k, "invalid"))
                for i in range(n + 1):
                    if i != k and _raw_face(h, i) != faces[i].data:
                        bad.append((n, k, i))
    return Check("kan_filling", not bad, f"horns={total} n<={top} failures={len(bad)}", limit=120.0)


# -- 5 ----------------------------------------------------------------------

def check_horn_projections(cfg, count=10):
    rng = _rng(cfg, "hornlim")
    base = fx.base_complex(cfg.p)
    bad, total = [], 0
    top = min(3, cfg.max_dim)
    for n in range(1, top + 1):
        for k in range(n + 1):
            H = horn_poset(n, k)
            for _ in range(count):
                x = _random_simplex(rng, n, base)
                D = dg.restrict(x.data, H)
                lim = ch.Limit(H, D.obj, D.comp, p=D.p)
                total += 1
                for a in H.elements:
                    if not ch.is_quasi_iso(lim.proj(a)):
                        bad.append((n, k, a))
    return Check("horn_limit_projections", not bad, f"instances={total} n<={top} failures={len(bad)}")


# -- 6, 7 -------------------------------------------------------------------

def test_complexes():
    return [("simplex1", SimplicialComplex.simplex(1)), ("simplex2", SimplicialComplex.simplex(2)),
            ("glued_disk", fx.glued_disk())]


def check_roundtrip_exact(cfg, count=10):
    rng = _rng(cfg, "roundtrip")
    base = fx.base_complex(cfg.p)
    bad, total = [], 0
    for name, T in test_complexes():
        for _ in range(count):
            F = fx.random_isotopy_diagram(rng, face_poset(T), base)
            f = cl.lambda_map(F, T, base).f
            if f.compatibility_failures():
                bad.append((name, "input"))
            if cl.lambda_map(cl.theta_map(f), T).f != f:
                bad.append(name)
            total += 1
    return Check("roundtrip_exact", not bad, f"maps={total} complexes=3 failures={len(bad)}")


def check_roundtrip_weak(cfg, count=10):
    rng = _rng(cfg, "roundtrip-weak")
    base = fx.base_complex(cfg.p)
    T = SimplicialComplex.simplex(2)
    bad = 0
    for _ in range(count):
        F = fx.random_isotopy_diagram(rng, face_poset(T), base)
        lam = cl.lambda_map(F, T, base)
        back = cl.theta_map(lam.f)
        u = lam.replacement.unit
        if not (u.source == F and u.target == back and u.is_natural() and u.is_weq()):
            bad += 1
    return Check("roundtrip_weak", not bad, f"functors={count} failures={bad}")


# -- 8 ----------------------------------------------------------------------

def homotopy_pipeline_failures(F, eta, T):
    bad = []
    weq = cl.nat_weq_to_map_weq(eta, T)
    H = cl.homotopy_from_weq(weq, T)
    if cl.homotopy_face_failures(H):
        bad.append("homotopy faces")
    for c, s in H.cells.items():
        if cl.simplex_failures(s.data):
            bad.append(f"cell {c}")
    z = cl.zigzag_from_homotopy(H)
    if z.start != cl.theta_map(cl.lambda_map(F, T).f):
        bad.append("start")
    if z.end() != cl.theta_map(cl.lambda_map(eta.target, T).f):
        bad.append("end")
    if not z.is_valid():
        bad.append("chain")
    for step, _ in z.steps:
        if not (step.is_natural() and step.is_weq()):
            bad.append("arrow")
    return bad


def check_homotopy_pipeline(cfg, count=5):
    rng = _rng(cfg, "homotopy")
    base = fx.base_complex(cfg.p)
    bad, total = [], 0
    for T in (SimplicialComplex.simplex(1), SimplicialComplex.simplex(2)):
        for _ in range(count):
            F = fx.random_isotopy_diagram(rng, face_poset(T), base)
            eta = fx.random_weq(rng, F)
            bad += homotopy_pipeline_failures(F, eta, T)
            total += 1
    return Check("homotopy_pipeline", not bad, f"pairs={total} failures={len(bad)}")


# -- 9 ----------------------------------------------------------------------

def prism_failures(n):
    bad = []
    pr = prism_decomposition(n)
    if len(pr) != n + 1 or any(len(s) != n + 2 for s in pr):
        bad.append("count")
    for a, b in zip(pr, pr[1:]):
        if len(set(a) & set(b)) != n + 1:
            bad.append("intersection")
    for i in range(n + 1):
        for k in range(1, n + 2):
            for lam in combinations(range(n + 1), k):
                B = set(phi_map(i, "B", lam, n))
                L, U = set(phi_map(i, "L", lam, n)), set(phi_map(i, "U", lam, n))
                if not B <= set(pr[i]):
                    bad.append(("B", i, lam))
                size = 1 if (n - i) in lam else 0
                if not (L <= B and U <= B and len(B - L) == size and len(B - U) == size):
                    bad.append(("LU", i, lam))
    return bad


def check_prisms(cfg):
    top = min(4, cfg.max_dim)
    bad = [b for n in range(top + 1) for b in prism_failures(n)]
    return Check("prism_decomposition", not bad, f"n<={top} failures={len(bad)}")


# -- 10 ---------------------------------------------------------------------

def tower_failures(F):
    bad = []
    P = F.shape
    tw = dg.tower_limit(F)
    for e in tw.etas:
        if not (e.is_natural() and e.is_objectwise_fibration()):
            bad.append("tower arrow")
    if not tw.kappa.is_objectwise_iso():
        bad.append("kappa")
    for stage, kap in zip(tw.exhaustion, tw.kappas):
        for x in stage:
            if not ch.is_iso(kap[x]):
                bad.append(("stage kappa", x))
    stages = tw.exhaustion
    for i in range(len(stages)):
        for j in range(i, len(stages)):
            iso = dg.kan_composition_iso(F, stages[i], stages[j])
            if not (iso.is_natural() and iso.is_objectwise_iso()):
                bad.append(("composition", i, j))
    return bad


def check_tower(cfg):
    rng = _rng(cfg, "tower")
    base = fx.base_complex(cfg.p)
    F = dg.fibrant_replace(fx.random_isotopy_diagram(rng, delta_tilde(2), base)).diagram
    bad = tower_failures(F)
    return Check("kan_extension_tower", not bad, f"stages=7 failures={len(bad)}")


# -- 11 ---------------------------------------------------------------------

def lift_square_failures(data):
    g0, g1, f0, f1, f0p, f1p, g, h0, h1 = data
    gbar, H = dg.lift_square_up_to_homotopy(g0, g1, f0, f1, f0p, f1p, g, h0, h1)
    bad = []
    if ch.compose(f0p, gbar) != ch.compose(g0, f0) or ch.compose(f1p, gbar) != ch.compose(g1, f1):
        bad.append("triangle")
    if not H.check():
        bad.append("homotopy")
    return bad


def vertex_witnesses(F, base):
    """Projection of the unscrambled inclusion diagram onto its base summand, at each vertex."""
    wit = {}
    for v in F.shape.elements:
        if len(v) == 1:
            X = F.obj(v)
            mats = {k: np.eye(base.dim(k), X.dim(k), dtype=np.int64) for k in base.dims}
            wit[v] = [(ch.ChainMap(X, base, mats), +1)]
    return wit


def rectify_failures(F, base):
    r = dg.rectify_functor(F, base, vertex_witnesses(F, base))
    bad = []
    G = r.diagram
    if not G.is_functorial():
        bad.append("functor")
    if not (r.beta.is_natural() and r.beta.is_weq()):
        bad.append("beta")
    for (m, x), gp in r.provisional.items():
        if ch.compose(G.arrow(m, x), r.taus[x]) != gp:
            bad.append(("provisional", m, x))
    return bad


def check_lift_rectify(cfg, count=10):
    rng = _rng(cfg, "lift")
    bad = []
    for _ in range(count):
        bad += lift_square_failures(fx.random_lift_square(rng, cfg.p))
    base = fx.base_complex(cfg.p)
    for n in range(min(2, cfg.max_dim) + 1):
        F = fx.random_isotopy_diagram(rng, delta_tilde(n), base, scrambled=False)
        bad += rectify_failures(F, base)
    return Check("lift_and_rectify", not bad, f"squares={count} rectified=n<={min(2, cfg.max_dim)} failures={len(bad)}")


# -- informational ------------------------------------------------------------

def check_naive_degeneracy(cfg):
    """Compare R(s0 applied twice) with R(s1 after s0) when both are built by naive replacement."""
    rng = _rng(cfg, "naive")
    v = _random_simplex(rng, 0, fx.base_complex(cfg.p))
    e = cl.naive_degeneracy(v, 0)
    a, b = cl.naive_degeneracy(e, 0), cl.naive_degeneracy(e, 1)
    differs = a.data != b.data
    return Check("naive_degeneracy_counterexample", True,
                 f"informational s0s0_vs_s1s0_differ={'yes' if differs else 'no'}")


CHECKS = [check_cosimplicial, check_simplicial, check_fibrant_replacement, check_kan_filling,
          check_horn_projections, check_roundtrip_exact, check_roundtrip_weak, check_homotopy_pipeline,
          check_prisms, check_tower, check_lift_rectify, check_naive_degeneracy]


def timed(fn, cfg):
    t = time.perf_counter()
    try:
        c = fn(cfg)
    except Exception as exc:  # a crash is a failure of that criterion, not of the harness
        c = Check(fn.__name__.removeprefix("check_"), False, f"error {type(exc).__name__}: {exc}")
    c.seconds = time.perf_counter() - t
    if c.limit is not None and c.seconds > c.limit:
        c.ok = False
        c.detail += f" over_time_limit={c.limit:g}s"
    return c


def run_selftest(cfg, out=None, err=None):
    out = out or sys.stdout
    err = err or sys.stderr
    results = []
    for fn in CHECKS:
        c = timed(fn, cfg)
        results.append(c)
        print(c.line(), file=out, flush=True)
        if cfg.verbose:
            print(f"  {c.name}: {c.seconds:.2f}s", file=err)
    return results
