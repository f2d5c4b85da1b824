"""Contravariant diagrams of chain complexes over finite posets.

A diagram stores one map D(b) -> D(a) per covering pair a < b; longer
composites are derived on demand and cached.
"""
import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from . import chain as ch
from .chain import compose, identity
from .poset import Poset, comma_below, poset_from_json, poset_to_json, _j


class DiagramError(ValueError):
    pass


class Diagram:
    def __init__(self, shape, objects, arrows, p=None, check=True):
        self.shape = shape
        self.objects = dict(objects)
        missing = [x for x in shape.elements if x not in self.objects]
        if missing:
            raise DiagramError(f"no object at {missing[0]!r}")
        if p is None:
            p = next((X.p for X in self.objects.values()), 2)
        self.p = p
        self.arrows = {}
        for a, b in shape.covers:
            m = arrows.get((a, b))
            if m is None:
                raise DiagramError(f"no arrow for the cover {a!r} < {b!r}")
            if m.source != self.objects[b] or m.target != self.objects[a]:
                raise DiagramError(f"arrow {b!r} > {a!r} has the wrong endpoints")
            self.arrows[(a, b)] = m
        self._memo = {}
        self._key = None
        if check:
            bad = self.functoriality_failures()
            if bad:
                a, c0, c, b = bad[0]
                raise DiagramError(f"not functorial: paths {b!r} > {c0!r} > {a!r} and {b!r} > {c!r} > {a!r} disagree")

    def obj(self, x):
        return self.objects[x]

    def arrow(self, a, b):
        return self.arrows[(a, b)]

    def comp(self, b, a):
        """The composite D(b) -> D(a) for a <= b."""
        if a == b:
            return identity(self.objects[a])
        m = self._memo.get((b, a))
        if m is None:
            P = self.shape
            c0 = next((c for c in P.lower_covers(b) if P.leq(a, c)), None)
            if c0 is None:
                raise DiagramError(f"{a!r} is not below {b!r}")
            m = compose(self.comp(c0, a), self.arrows[(c0, b)])
            self._memo[(b, a)] = m
        return m

    def functoriality_failures(self):
        P = self.shape
        bad = []
        for b in P.elements:
            covers = P.lower_covers(b)
            if len(covers) < 2:
                continue
            for a in P.down_set(b, strict=True):
                via = [c for c in covers if P.leq(a, c)]
                if len(via) < 2:
                    continue
                ref = self.comp(b, a)
                for c in via[1:]:
                    if compose(self.comp(c, a), self.arrows[(c, b)]) != ref:
                        bad.append((a, via[0], c, b))
        return bad

    def is_functorial(self):
        return not self.functoriality_failures()

    def key(self):
        if self._key is None:
            h = hashlib.blake2b(digest_size=16)
            h.update(repr(self.shape.elements).encode())
            for x in self.shape.elements:
                h.update(self.objects[x].key())
            for ab in self.shape.covers:
                h.update(self.arrows[ab].key())
            self._key = h.digest()
        return self._key

    def __eq__(self, other):
        return isinstance(other, Diagram) and self.shape == other.shape and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"Diagram({len(self.shape)} objects, p={self.p})"


class NatTrans:
    def __init__(self, source, target, comps, check=True):
        if source.shape != target.shape:
            raise DiagramError("transformation between diagrams of different shapes")
        self.source, self.target = source, target
        self.comps = dict(comps)
        for x in source.shape.elements:
            c = self.comps.get(x)
            if c is None or c.source != source.obj(x) or c.target != target.obj(x):
                raise DiagramError(f"bad component at {x!r}")
        if check and not self.is_natural():
            raise DiagramError("naturality square fails")

    def __getitem__(self, x):
        return self.comps[x]

    def is_natural(self):
        for a, b in self.source.shape.covers:
            if compose(self.target.arrow(a, b), self.comps[b]) != compose(self.comps[a], self.source.arrow(a, b)):
                return False
        return True

    def is_weq(self):
        return all(ch.is_quasi_iso(c) for c in self.comps.values())

    def is_objectwise_fibration(self):
        return all(ch.is_surjective(c) for c in self.comps.values())

    def is_objectwise_iso(self):
        return all(ch.is_iso(c) for c in self.comps.values())

    def __eq__(self, other):
        return (isinstance(other, NatTrans) and self.source == other.source and self.target == other.target
                and all(self.comps[x] == other.comps[x] for x in self.source.shape.elements))

    def __hash__(self):
        return hash((self.source.key(), self.target.key()))


def nat_identity(F):
    return NatTrans(F, F, {x: identity(F.obj(x)) for x in F.shape.elements}, check=False)


def nat_compose(g, f):
    return NatTrans(f.source, g.target, {x: compose(g[x], f[x]) for x in f.source.shape.elements}, check=False)


@dataclass
class Zigzag:
    """Steps (transformation, +1 or -1); +1 points away from the start."""
    start: Diagram
    steps: list = field(default_factory=list)

    def end(self):
        cur = self.start
        for eta, direction in self.steps:
            cur = eta.target if direction > 0 else eta.source
        return cur

    def is_valid(self):
        cur = self.start
        for eta, direction in self.steps:
            src = eta.source if direction > 0 else eta.target
            if src != cur:
                return False
            cur = eta.target if direction > 0 else eta.source
        return True

    def is_weq(self):
        return self.is_valid() and all(eta.is_weq() for eta, _ in self.steps)


# -- face posets -------------------------------------------------------------

def vertices_below(P, x):
    return frozenset(y for y in P.down_set(x) if P.height(y) == 0)


def is_face_poset(P):
    """Each element is determined by its vertices and sees every vertex subset below it."""
    seen = {}
    for x in P.elements:
        vs = vertices_below(P, x)
        if vs in seen:
            return False
        seen[vs] = x
    for x in P.elements:
        vs = vertices_below(P, x)
        down = {vertices_below(P, y) for y in P.down_set(x)}
        if len(down) != 2 ** len(vs) - 1 or P.height(x) != len(vs) - 1:
            return False
    return True


_SUB = {}


def _down_subposet(P, x):
    key = (id(P), x)
    hit = _SUB.get(key)
    if hit is None or hit[0] is not P:
        hit = (P, P.subposet(P.down_set(x, strict=True)))
        _SUB[key] = hit
    return hit[1]


@dataclass
class Matching:
    limit: ch.Limit
    map: ch.ChainMap


def matching_object(F, sigma, check_shape=True):
    """Limit over the proper faces of sigma together with F(sigma) -> that limit."""
    if check_shape and not is_face_poset(F.shape):
        raise DiagramError("matching objects need a face poset")
    sub = _down_subposet(F.shape, sigma)
    lim = ch.Limit(sub, F.obj, F.comp, p=F.p)
    X = F.obj(sigma)
    if not sub.elements:
        return Matching(lim, ch.zero_map(X, lim.obj))
    return Matching(lim, lim.factor(lambda m: F.comp(sigma, m)))


def is_fibrant(F):
    return all(ch.is_surjective(matching_object(F, x, check_shape=False).map) for x in F.shape.elements)


def relative_matching_map(eta, x):
    """F(x) -> G(x) x_{M_x G} M_x F."""
    F, G = eta.source, eta.target
    mf = matching_object(F, x, check_shape=False)
    mg = matching_object(G, x, check_shape=False)
    if not mf.limit.maxima:
        return eta[x]
    meta = mg.limit.factor(lambda m: compose(eta[m], mf.limit.proj(m)))
    P, pG, pM, lim = ch.pullback(mg.map, meta)
    return lim.factor({"x": eta[x], "y": mf.map}.__getitem__)


def is_fibration(eta):
    return all(ch.is_surjective(relative_matching_map(eta, x)) for x in eta.source.shape.elements)


# -- fibrant replacement ------------------------------------------------------

@dataclass
class Cell:
    replaced: bool
    limit: ch.Limit
    matching: ch.ChainMap
    fac: object = None


class _Partial:
    """A diagram under construction, enough for limits over down-sets."""

    def __init__(self, shape, p):
        self.shape = shape
        self.p = p
        self.objects, self.arrows, self._memo = {}, {}, {}

    def obj(self, x):
        return self.objects[x]

    def comp(self, b, a):
        if a == b:
            return identity(self.objects[a])
        m = self._memo.get((b, a))
        if m is None:
            c0 = next(c for c in self.shape.lower_covers(b) if self.shape.leq(a, c))
            m = compose(self.comp(c0, a), self.arrows[(c0, b)])
            self._memo[(b, a)] = m
        return m


@dataclass
class Replacement:
    diagram: Diagram
    unit: NatTrans
    cells: dict
    source: Diagram


def fibrant_replace(F, check_shape=True, factorization="cocylinder"):
    """Replace F by a fibrant diagram, cell by cell in order of dimension.

    A cell is kept when nothing below it changed and its matching map is
    already surjective; otherwise its matching map into the limit of the new
    cells below is factored (mapping cocylinder by default, or the minimal
    disk factorization) and the cell takes the middle object.
    """
    P = F.shape
    if check_shape and not is_face_poset(P):
        raise DiagramError("fibrant replacement needs a face poset")
    factor = ch.FACTORIZATIONS[factorization]
    R = _Partial(P, F.p)
    unit, cells, changed = {}, {}, set()
    for x in P.by_height():
        sub = _down_subposet(P, x)
        lim = ch.Limit(sub, R.obj, R.comp, p=F.p)
        X = F.obj(x)
        if sub.elements:
            phi = lim.factor(lambda m: compose(unit[m], F.arrow(m, x)))
        else:
            phi = ch.zero_map(X, lim.obj)
        below_changed = any(y in changed for y in sub.elements)
        if not below_changed and ch.is_surjective(phi):
            R.objects[x] = X
            for m in P.lower_covers(x):
                R.arrows[(m, x)] = F.arrow(m, x)
            unit[x] = identity(X)
            cells[x] = Cell(False, lim, phi)
        else:
            fac = factor(phi)
            R.objects[x] = fac.obj
            for m in P.lower_covers(x):
                R.arrows[(m, x)] = compose(lim.proj(m), fac.pbar)
            unit[x] = fac.tau
            cells[x] = Cell(True, lim, phi, fac)
            changed.add(x)
    RF = Diagram(P, R.objects, R.arrows, p=F.p, check=False)
    return Replacement(RF, NatTrans(F, RF, unit, check=False), cells, F)


def fibrant_replace_map(eta, rf=None, rg=None):
    """The induced transformation between fibrant replacements, compatible with the units."""
    F, G = eta.source, eta.target
    rf = rf or fibrant_replace(F)
    rg = rg or fibrant_replace(G)
    P = F.shape
    out = {}
    for x in P.by_height():
        cf, cg = rf.cells[x], rg.cells[x]
        lower = P.lower_covers(x)
        if lower:
            meta = cg.limit.factor(lambda m: compose(out[m], cf.limit.proj(m)))
        else:
            meta = ch.zero_map(cf.limit.obj, cg.limit.obj)
        if not cf.replaced and not cg.replaced:
            out[x] = eta[x]
        elif cf.replaced and cg.replaced:
            out[x] = ch.factorization_map(cf.fac, cg.fac, eta[x], meta)
        elif cf.replaced:
            out[x] = ch.lift(cf.fac.tau, cg.matching, eta[x], compose(meta, cf.fac.pbar))
        else:
            out[x] = compose(cg.fac.tau, eta[x])
    return NatTrans(rf.diagram, rg.diagram, out, check=False)


# -- restriction and right Kan extension -------------------------------------

def restrict(F, S):
    """F on the full subposet S (a Poset or a set of elements)."""
    sub = S if isinstance(S, Poset) else F.shape.subposet(S)
    arrows = {(a, b): F.comp(b, a) for a, b in sub.covers}
    return Diagram(sub, {x: F.obj(x) for x in sub.elements}, arrows, p=F.p, check=False)


def restrict_nat(eta, S):
    src, tgt = restrict(eta.source, S), restrict(eta.target, S)
    return NatTrans(src, tgt, {x: eta[x] for x in src.shape.elements}, check=False)


def precompose(F, tau):
    """F o tau for an order-preserving map tau into F's shape."""
    Q = tau.source
    arrows = {(a, b): F.comp(tau(b), tau(a)) for a, b in Q.covers}
    return Diagram(Q, {x: F.obj(tau(x)) for x in Q.elements}, arrows, p=F.p, check=False)


@dataclass
class KanExtension:
    diagram: Diagram
    limits: dict
    source: Diagram


def right_kan_extension(F, P):
    """E(x) = limit of F over the elements of F's shape below x."""
    S = F.shape
    lims, objs = {}, {}
    for x in P.elements:
        comma = comma_below(P, S, x)
        lims[x] = ch.Limit(comma, F.obj, F.comp, p=F.p)
        objs[x] = lims[x].obj
    arrows = {}
    for a, b in P.covers:
        la, lb = lims[a], lims[b]
        arrows[(a, b)] = la.factor_from(lb.obj, lambda m: lb.proj(m))
    return KanExtension(Diagram(P, objs, arrows, p=F.p, check=False), lims, F)


def kan_composition_iso(F, small, mid):
    """The comparison E_mid(E_small->mid F) -> E_small F over F's shape, with both extensions.

    ``small`` and ``mid`` are down-closed element sets with small inside mid.
    """
    P = F.shape
    Fs = restrict(F, P.subposet(list(small)))
    inner = right_kan_extension(Fs, P.subposet(list(mid)))
    outer = right_kan_extension(inner.diagram, P)
    direct = right_kan_extension(Fs, P)
    comps = {}
    for x in P.elements:
        la, lb = outer.limits[x], direct.limits[x]
        comps[x] = lb.factor_from(la.obj, lambda m, la=la: compose(inner.limits[m].proj(m), la.proj(m)))
    return NatTrans(outer.diagram, direct.diagram, comps, check=False)


def kan_counit(kan):
    """E(F) restricted to S -> F, the projections at x in S."""
    F = kan.source
    E = restrict(kan.diagram, F.shape)
    return NatTrans(E, F, {x: kan.limits[x].proj(x) for x in F.shape.elements}, check=False)


def is_isotopy_functor(F):
    return all(ch.is_quasi_iso(m) for m in F.arrows.values())


# -- objectwise constructions ------------------------------------------------

def objectwise_sum(F, G):
    P = F.shape
    sums = {x: ch.direct_sum([F.obj(x), G.obj(x)], p=F.p) for x in P.elements}
    arrows = {}
    for a, b in P.covers:
        sa, sb = sums[a], sums[b]
        arrows[(a, b)] = ch.map_into_sum(sa, [compose(F.arrow(a, b), sb.proj[0]), compose(G.arrow(a, b), sb.proj[1])])
    S = Diagram(P, {x: sums[x].obj for x in P.elements}, arrows, p=F.p, check=False)
    pr0 = NatTrans(S, F, {x: sums[x].proj[0] for x in P.elements}, check=False)
    pr1 = NatTrans(S, G, {x: sums[x].proj[1] for x in P.elements}, check=False)
    return S, pr0, pr1, sums


def objectwise_factor(eta):
    """Objectwise mapping cocylinder of eta with functorial arrows."""
    F, G = eta.source, eta.target
    P = F.shape
    facs = {x: ch.factor_acof_fib(eta[x]) for x in P.elements}
    arrows = {(a, b): ch.factorization_map(facs[b], facs[a], F.arrow(a, b), G.arrow(a, b)) for a, b in P.covers}
    Z = Diagram(P, {x: facs[x].obj for x in P.elements}, arrows, p=F.p, check=False)
    tau = NatTrans(F, Z, {x: facs[x].tau for x in P.elements}, check=False)
    pbar = NatTrans(Z, G, {x: facs[x].pbar for x in P.elements}, check=False)
    back = NatTrans(Z, F, {x: facs[x].back for x in P.elements}, check=False)
    return Z, tau, pbar, back


def objectwise_pullback(f, g):
    """A x_C B for f: A -> C, g: B -> C."""
    A, B = f.source, g.source
    P = A.shape
    pbs = {x: ch.pullback(f[x], g[x]) for x in P.elements}
    arrows = {}
    for a, b in P.covers:
        Pb, pa, pb_, lim_b = pbs[b]
        lim_a = pbs[a][3]
        legs = {"x": compose(A.arrow(a, b), pa), "y": compose(B.arrow(a, b), pb_)}
        arrows[(a, b)] = lim_a.factor(legs.__getitem__)
    D = Diagram(P, {x: pbs[x][0] for x in P.elements}, arrows, p=A.p, check=False)
    pA = NatTrans(D, A, {x: pbs[x][1] for x in P.elements}, check=False)
    pB = NatTrans(D, B, {x: pbs[x][2] for x in P.elements}, check=False)
    return D, pA, pB


@dataclass
class Span:
    apex: Diagram
    left: NatTrans
    right: NatTrans


def shorten_zigzag(z):
    """Collapse a weak-equivalence zigzag F ... F' into a span F <- Fbar -> F'.

    Backward steps are absorbed by homotopy pullback; at the end the paired
    map Fbar -> F x F' is factored so that it becomes an objectwise fibration.
    """
    if not z.is_weq():
        raise DiagramError("not a weak-equivalence zigzag")
    F = z.start
    S, left, right = F, nat_identity(F), nat_identity(F)
    for eta, direction in z.steps:
        if direction > 0:
            right = nat_compose(eta, right)
        else:
            Z, tau, pbar, back = objectwise_factor(eta)
            D, pS, pZ = objectwise_pullback(right, pbar)
            S = D
            left = nat_compose(left, pS)
            right = nat_compose(back, pZ)
    Fe = z.end()
    prod, pr0, pr1, sums = objectwise_sum(F, Fe)
    paired = NatTrans(S, prod, {x: ch.map_into_sum(sums[x], [left[x], right[x]]) for x in S.shape.elements}, check=False)
    Z, tau, pbar, back = objectwise_factor(paired)
    return Span(Z, nat_compose(pr0, pbar), nat_compose(pr1, pbar)), paired


def span_paired_map(span):
    F, Fe = span.left.target, span.right.target
    prod, _, _, sums = objectwise_sum(F, Fe)
    return NatTrans(span.apex, prod, {x: ch.map_into_sum(sums[x], [span.left[x], span.right[x]])
                                      for x in span.apex.shape.elements}, check=False)


# -- lifting up to homotopy ---------------------------------------------------

def _oriented(h, f, g):
    """Homotopy block dict with dh + hd = f - g (flip the sign if stored the other way)."""
    if h is None:
        return {}
    if h.f == f and h.g == g:
        return h.h
    if h.f == g and h.g == f:
        p = f.p
        return {k: (-m) % p for k, m in h.h.items()}
    raise DiagramError("homotopy witness does not match the square")


def lift_square_up_to_homotopy(g0, g1, f0, f1, f0p, f1p, g, h0=None, h1=None):
    """Correct g: B -> C so that f0' g = g0 f0 and f1' g = g1 f1 hold exactly.

    h0, h1 are homotopies between f0' g and g0 f0 (resp. f1' g and g1 f1).
    Returns (gbar, homotopy with d K + K d = g - gbar).
    """
    B, C = g.source, g.target
    u0, u1 = compose(g0, f0), compose(g1, f1)
    v0, v1 = compose(f0p, g), compose(f1p, g)
    k0, k1 = _oriented(h0, v0, u0), _oriented(h1, v1, u1)
    S, fib = ch.pair(f0p, f1p)
    if not ch.is_surjective(fib):
        raise DiagramError("(f0', f1') is not a fibration")
    if not k0 and not k1:
        if v0 != u0 or v1 != u1:
            raise DiagramError("squares do not commute and no homotopy was given")
        return g, ch.zero_homotopy(g, g)
    _, u = ch.pair(u0, u1)
    _, v = ch.pair(v0, v1)
    D0, D1 = f0p.target, f1p.target
    kk = {}
    for k in set(k0) | set(k1) | set(B.dims):
        a = k0.get(k)
        b = k1.get(k)
        if a is None:
            a = np.zeros((D0.dim(k + 1), B.dim(k)), dtype=np.int64)
        if b is None:
            b = np.zeros((D1.dim(k + 1), B.dim(k)), dtype=np.int64)
        kk[k] = np.concatenate([a, b], axis=0)
    cyl, H = ch.homotopy_to_cylinder_map(u, v, kk)
    psi = ch.lift(cyl.i1, fib, g, H)
    gbar = compose(psi, cyl.i0)
    hk = {}
    for n in cyl.obj.dims:
        third = ch.cylinder_third(B, cyl, n)
        blk = ch._fp.matmul(psi.mat(n), third, B.p)
        if blk.size:
            hk[n - 1] = blk
    return gbar, ch.ChainHomotopy(g, gbar, hk)


# -- towers --------------------------------------------------------------------

@dataclass
class Tower:
    stages: list          # E_i F_i over the full shape
    etas: list            # E_{i+1} F_{i+1} -> E_i F_i
    kappas: list          # F -> E_i F_i
    limit: Diagram
    kappa: NatTrans
    exhaustion: list


def check_exhaustion(P, exhaustion):
    prev = set()
    for i, stage in enumerate(exhaustion):
        s = set(stage)
        if not P.is_down_closed(s):
            raise DiagramError(f"stage {i} is not down-closed")
        new = s - prev
        if i > 0 and (len(new) != 1 or not prev <= s):
            raise DiagramError(f"stage {i} does not add exactly one simplex")
        prev = s


def simplex_by_simplex(P):
    """The exhaustion adding one element at a time in height order."""
    order = P.by_height()
    return [order[:k] for k in range(1, len(order) + 1)]


def tower_limit(F, exhaustion=None):
    P = F.shape
    exhaustion = exhaustion or simplex_by_simplex(P)
    check_exhaustion(P, exhaustion)
    kans = [right_kan_extension(restrict(F, st), P) for st in exhaustion]
    stages = [k.diagram for k in kans]
    etas = []
    for i in range(len(kans) - 1):
        hi, lo = kans[i + 1], kans[i]
        comps = {x: lo.limits[x].factor_from(hi.limits[x].obj, lambda m, x=x: hi.limits[x].proj(m)) for x in P.elements}
        etas.append(NatTrans(stages[i + 1], stages[i], comps, check=False))
    kappas = []
    for k in kans:
        comps = {x: k.limits[x].factor_from(F.obj(x), lambda m, x=x: F.comp(x, m)) for x in P.elements}
        kappas.append(NatTrans(F, k.diagram, comps, check=False))
    return Tower(stages, etas, kappas, stages[-1], kappas[-1], exhaustion)


# -- rectification -------------------------------------------------------------

def collapse_witness(steps, start, end):
    """A direct quasi-iso start -> end from a zigzag of chain maps.

    ``steps`` are (map, +1) for forward maps and (map, -1) for maps pointing
    back towards ``start``.
    """
    cur = identity(start)
    obj = start
    for m, direction in steps:
        if not ch.is_quasi_iso(m):
            raise DiagramError("witness step is not a quasi-isomorphism")
        if direction > 0:
            if m.source != obj:
                raise DiagramError("witness steps do not chain")
            cur = compose(m, cur)
            obj = m.target
        else:
            if m.target != obj:
                raise DiagramError("witness steps do not chain")
            inv = ch.homotopy_inverse(m)[0]
            cur = compose(inv, cur)
            obj = m.source
    if obj != end:
        raise DiagramError("witness does not end at the base object")
    return cur


@dataclass
class Rectification:
    diagram: Diagram
    beta: NatTrans
    provisional: dict     # cover (face, sigma) -> G'(d^i): base -> Gbar(face)
    taus: dict            # sigma -> tau: base -> Gbar(sigma)
    homotopies: dict      # sigma -> (g, f, K)


def rectify_functor(F, base, witnesses):
    """Strict diagram valued near ``base`` with a weak equivalence F -> Gbar.

    ``witnesses[v]`` is a zigzag (list of (map, direction)) from F(v) to
    ``base`` for every vertex v.
    """
    P = F.shape
    if not is_face_poset(P):
        raise DiagramError("rectification needs a face poset")
    if not is_isotopy_functor(F):
        raise DiagramError("F is not an isotopy functor")
    R = _Partial(P, F.p)
    beta, gvert, prov, taus, homs = {}, {}, {}, {}, {}
    for x in P.by_height():
        lower = P.lower_covers(x)
        if not lower:
            if x not in witnesses:
                raise DiagramError(f"missing witness at {x!r}")
            g = collapse_witness(witnesses[x], F.obj(x), base)
            gvert[x] = g
            R.objects[x] = base
            beta[x] = g
            continue
        v0 = min(vertices_below(P, x), key=P.index.get)
        g = compose(gvert[v0], F.comp(x, v0))
        # H1 satisfies dH + Hd = f g - id, so its negative runs from f g to id
        f, H1, _ = ch.homotopy_inverse(g)
        K = {k: (-m) % F.p for k, m in H1.h.items()}
        X = F.obj(x)
        gp = {m: compose_all3(beta[m], F.arrow(m, x), f) for m in lower}
        sub = _down_subposet(P, x)
        lim = ch.Limit(sub, R.obj, R.comp, p=F.p)
        pmap = lim.factor(gp.__getitem__)
        fac = ch.factor_acof_fib(pmap)
        cyl, Hmap = ch.homotopy_to_cylinder_map(compose(f, g), identity(X), K)
        bottom = lim.factor(lambda m: compose_all3(beta[m], F.arrow(m, x), Hmap))
        Hbar = ch.lift(cyl.i0, fac.pbar, compose(fac.tau, g), bottom)
        R.objects[x] = fac.obj
        for m in lower:
            R.arrows[(m, x)] = compose(lim.proj(m), fac.pbar)
            prov[(m, x)] = gp[m]
        beta[x] = compose(Hbar, cyl.i1)
        taus[x] = fac.tau
        homs[x] = (g, f, K)
    G = Diagram(P, R.objects, R.arrows, p=F.p, check=False)
    return Rectification(G, NatTrans(F, G, beta, check=False), prov, taus, homs)


def compose_all3(a, b, c):
    return compose(a, compose(b, c))


# -- serialisation -------------------------------------------------------------

def diagram_to_json(F):
    objs, arrows = {}, {}
    for x in F.shape.elements:
        objs[_label(x)] = ch.complex_to_json(F.obj(x))
    for a, b in F.shape.covers:
        arrows[f"{_label(b)}>{_label(a)}"] = ch.map_to_json(F.arrow(a, b))
    return {"shape": poset_to_json(F.shape), "objects": objs, "arrows": arrows}


def _label(x):
    return x if isinstance(x, str) else json.dumps(_j(x), separators=(",", ":"))


def diagram_from_json(obj, p=None):
    if not isinstance(obj, dict) or not {"shape", "objects"} <= set(obj):
        raise DiagramError("diagram: need 'shape' and 'objects'")
    P = poset_from_json(obj["shape"])
    labels = {_label(x): x for x in P.elements}
    objs = {}
    for lab, cx in obj["objects"].items():
        if lab not in labels:
            raise DiagramError(f"diagram: object for unknown element {lab}")
        objs[labels[lab]] = ch.complex_from_json(cx, p=p)
    primes = {X.p for X in objs.values()}
    if len(primes) > 1:
        raise DiagramError("diagram: objects over different primes")
    arrows = {}
    for key, m in obj.get("arrows", {}).items():
        if ">" not in key:
            raise DiagramError(f"diagram: bad arrow key {key!r}")
        bl, al = key.split(">", 1)
        if bl not in labels or al not in labels:
            raise DiagramError(f"diagram: arrow {key!r} names unknown elements")
        b, a = labels[bl], labels[al]
        arrows[(a, b)] = ch.map_from_json(m, objs[b], objs[a])
    return Diagram(P, objs, arrows)
