"""The classifying simplicial set of diagrams and the maps to and from it.

An n-simplex is a fibrant diagram over the subset poset of [n] whose arrows
are all quasi-isomorphisms.  Faces are restrictions.  Degeneracies are built
from a normal form (nondegenerate base, monotone surjection) so that the
simplicial identities hold on the nose: the boundary of a degenerate simplex is
glued from lower degeneracies, the top cell is the colimit of the comparison
maps from the base, and the whole is made fibrant.
"""
import json
from dataclasses import dataclass, field
from . import chain as ch
from . import diagram as dg
from . import scomplex as sc
from .chain import compose, identity
from .diagram import Diagram, DiagramError, NatTrans
from .poset import coface, delta_tilde, horn_poset
from .scomplex import (SimplicialSetPresentation, barycenter_label, face_poset, phi_map,
                       product_chains, product_with_interval)


# every replacement inside the classifying object uses the small factorization
FACTORIZATION = "minimal"


class SimplexError(ValueError):
    pass


class DegenerateBaseError(NotImplementedError):
    """Raised where a map between degeneracies would need a degenerate face of the base."""


# -- monotone surjections ------------------------------------------------------

def identity_surj(n):
    return tuple(range(n + 1))


def is_identity(theta):
    return theta == tuple(range(len(theta)))


def codegeneracy_surj(j, n):
    """s^j : [n+1] -> [n] hitting j twice."""
    return tuple(a if a <= j else a - 1 for a in range(n + 2))


def compose_surj(outer, inner):
    return tuple(outer[a] for a in inner)


def drop(theta, l):
    """theta o d^l."""
    return theta[:l] + theta[l + 1:]


def degenerate_directions(theta):
    return [a for a in range(len(theta) - 1) if theta[a] == theta[a + 1]]


def compress(theta, missing):
    return tuple(v if v < missing else v - 1 for v in theta)


def relabel_out(alpha, l):
    """A subset of [N] - {l} as a subset of [N-1]."""
    return tuple(x if x < l else x - 1 for x in alpha)


def relabel_in(alpha, l):
    return tuple(x if x < l else x + 1 for x in alpha)


# -- simplices -------------------------------------------------------------------

class AHSimplex:
    """A validated simplex.  ``base``/``surj`` hold the normal form when known."""

    def __init__(self, data, base=None, surj=None):
        self.data = data
        self.n = len(data.shape.maximal()[0]) - 1
        self.base = base
        self.surj = surj
        self.from_base = None
        self.leg_to_top = {}
        self.parts = None
        self._faces = {}

    @property
    def top(self):
        return tuple(range(self.n + 1))

    def top_obj(self):
        return self.data.obj(self.top)

    def key(self):
        return self.data.key()

    def __eq__(self, other):
        return isinstance(other, AHSimplex) and self.data == other.data

    def __hash__(self):
        return hash(self.data.key())

    def __repr__(self):
        return f"AHSimplex(n={self.n})"


def simplex_failures(d, base=None):
    """Reasons a diagram is not a simplex, as readable strings."""
    P = d.shape
    tops = P.maximal()
    out = []
    if len(tops) != 1 or P != delta_tilde(len(tops[0]) - 1):
        return ["shape is not the subset poset of some [n]"]
    for (a, b), m in d.arrows.items():
        if not ch.is_quasi_iso(m):
            out.append(f"arrow {list(b)}>{list(a)} is not a quasi-isomorphism")
    for x in P.elements:
        mm = dg.matching_object(d, x, check_shape=False)
        if not ch.is_surjective(mm.map):
            out.append(f"matching map at {list(x)} is not surjective (not fibrant)")
    if base is not None:
        hb = ch.homology(base)
        for x in P.elements:
            if ch.homology(d.obj(x)) != hb:
                out.append(f"value at {list(x)} is not quasi-isomorphic to the base")
    return out


def verify_simplex(d, base=None):
    bad = simplex_failures(d, base)
    if bad:
        raise SimplexError("; ".join(bad))
    return AHSimplex(d)


def face(s, i):
    """d_i: restriction along the i-th coface."""
    if not 0 <= i <= s.n or s.n == 0:
        raise SimplexError(f"face index {i} out of range for an {s.n}-simplex")
    if i in s._faces:
        return s._faces[i]
    data = dg.precompose(s.data, coface(i, s.n - 1))
    out = None
    if s.base is not None and not is_identity(s.surj):
        theta = s.surj
        t = drop(theta, i)
        if sorted(set(t)) == list(range(s.base.n + 1)):
            out = build(s.base, t)
        else:
            missing = theta[i]
            out = apply(face(s.base, missing), compress(t, missing))
        if out.data != data:
            raise SimplexError("internal: glued face disagrees with the restriction")
    if out is None:
        out = AHSimplex(data)
    s._faces[i] = out
    return out


def normal_form(s):
    """(nondegenerate base, surjection) with s = surj^* base."""
    if s.base is not None:
        return s.base, s.surj
    for j in range(s.n):
        a, b = face(s, j), face(s, j + 1)
        if a.data == b.data:
            cand = degeneracy(a, j)
            if cand.data == s.data:
                base, th = normal_form(a)
                s.base, s.surj = base, compose_surj(th, codegeneracy_surj(j, s.n - 1))
                s.from_base, s.leg_to_top, s.parts = cand.from_base, cand.leg_to_top, cand.parts
                return s.base, s.surj
    s.base, s.surj = s, identity_surj(s.n)
    s.from_base = identity(s.top_obj())
    return s, s.surj


def is_degenerate(s):
    return not is_identity(normal_form(s)[1])


def apply(s, theta):
    """theta^* s for a monotone surjection theta onto [s.n]."""
    base, th = normal_form(s)
    return build(base, compose_surj(th, theta))


def degeneracy(s, j):
    if not 0 <= j <= s.n:
        raise SimplexError(f"degeneracy index {j} out of range for an {s.n}-simplex")
    return apply(s, codegeneracy_surj(j, s.n))


_BUILT = {}


@dataclass
class _Parts:
    faces: list
    legs: list          # (a, rho_a, phi_a)
    colim: object
    glued: Diagram
    repl: object


def _glue_boundary(N, faces, p):
    """Objects and arrows on the proper subsets of [N] read off the faces; checks they agree."""
    P = delta_tilde(N)
    top = tuple(range(N + 1))
    objs, arrows = {}, {}
    for x in P.elements:
        if x == top:
            continue
        ls = [l for l in top if l not in x]
        l0 = ls[0]
        objs[x] = faces[l0].data.obj(relabel_out(x, l0))
        for l in ls[1:]:
            if faces[l].data.obj(relabel_out(x, l)) != objs[x]:
                raise SimplexError(f"faces {l0} and {l} disagree at {list(x)}")
    for a, b in P.covers:
        if b == top:
            continue
        ls = [l for l in top if l not in b]
        l0 = ls[0]
        arrows[(a, b)] = faces[l0].data.arrow(relabel_out(a, l0), relabel_out(b, l0))
        for l in ls[1:]:
            if faces[l].data.arrow(relabel_out(a, l), relabel_out(b, l)) != arrows[(a, b)]:
                raise SimplexError(f"faces {l0} and {l} disagree on {list(b)}>{list(a)}")
    return P, top, objs, arrows


def build(base, theta):
    """The degenerate simplex theta^* base for a nondegenerate ``base``."""
    theta = tuple(theta)
    m = base.n
    if sorted(set(theta)) != list(range(m + 1)) or list(theta) != sorted(theta):
        raise SimplexError(f"{theta} is not a monotone surjection onto [{m}]")
    if is_identity(theta):
        return base
    key = (base.data.key(), theta)
    hit = _BUILT.get(key)
    if hit is not None:
        return hit
    N = len(theta) - 1
    p = base.data.p
    faces = []
    for l in range(N + 1):
        t = drop(theta, l)
        if sorted(set(t)) == list(range(m + 1)):
            faces.append(build(base, t))
        else:
            missing = theta[l]
            faces.append(apply(face(base, missing), compress(t, missing)))
    P, top, objs, arrows = _glue_boundary(N, faces, p)
    base_top = base.top_obj()
    legs = []
    for a in degenerate_directions(theta):
        rho = faces[a + 1]
        phi = rho.from_base if rho is not base else identity(base_top)
        legs.append((a, rho, phi))
    colim = ch.colimit_menorah([phi for _, _, phi in legs])
    objs[top] = colim.obj
    for l in range(N + 1):
        cocone = []
        for a, rho, _ in legs:
            if l in (a, a + 1):
                cocone.append(identity(rho.top_obj()))
                continue
            lp, ap = (l, a - 1) if l < a else (l - 1, a)
            down = rho.data.comp(rho.top, tuple(x for x in rho.top if x != lp))
            cocone.append(compose(faces[l].leg_to_top[ap], down))
        ref = compose(cocone[0], legs[0][2])
        for c, (_, _, phi) in zip(cocone[1:], legs[1:]):
            if compose(c, phi) != ref:
                raise SimplexError(f"internal: comparison maps do not form a cocone at face {l}")
        arrows[(tuple(x for x in top if x != l), top)] = colim.factor(cocone)
    G = Diagram(P, objs, arrows, p=p, check=True)
    repl = dg.fibrant_replace(G, check_shape=False, factorization=FACTORIZATION)
    S = repl.diagram
    for x in P.elements:
        if x != top and repl.cells[x].replaced:
            raise SimplexError("internal: boundary of a degeneracy was not fibrant")
    out = AHSimplex(S, base=base, surj=theta)
    unit_top = repl.unit[top]
    for (a, rho, phi), inj in zip(legs, colim.inj):
        out.leg_to_top[a] = compose(unit_top, inj)
    out.from_base = compose(out.leg_to_top[legs[0][0]], legs[0][2])
    out.parts = _Parts(faces, legs, colim, G, repl)
    for l in range(N + 1):
        out._faces[l] = faces[l]
    _BUILT[key] = out
    return out


def clear_cache():
    _BUILT.clear()


# -- sequences of degeneracy indices ---------------------------------------------------

def word_is_valid(word, m):
    """s_{i_1} ... s_{i_k} applied to an m-simplex (rightmost first)."""
    dim = m
    for i in reversed(word):
        if not 0 <= i <= dim:
            return False
        dim += 1
    return True


def word_to_surjection(word, m):
    theta = identity_surj(m)
    dim = m
    for i in reversed(word):
        theta = compose_surj(theta, codegeneracy_surj(i, dim))
        dim += 1
    return theta


def degeneracy_class(word, m=None):
    """All words equivalent under (.., a, b, ..) ~ (.., b + 1, a, ..) for a <= b."""
    word = tuple(word)
    if m is None:
        m = max(0, max(word, default=0) - len(word) + 1)
    if not word_is_valid(word, m):
        raise SimplexError(f"{word} is not a valid degeneracy word on {m}-simplices")
    seen = {word}
    stack = [word]
    while stack:
        w = stack.pop()
        for p in range(1, len(w)):
            a, b = w[p - 1], w[p]
            if a <= b:
                nxt = w[:p - 1] + (b + 1, a) + w[p + 1:]
            elif a >= b + 1:
                nxt = w[:p - 1] + (b, a - 1) + w[p + 1:]
            else:
                continue
            if nxt not in seen and word_is_valid(nxt, m):
                seen.add(nxt)
                stack.append(nxt)
    return seen


def naive_degeneracy(s, j):
    """Fibrant replacement of the precomposition with s^j, kept for comparison only."""
    from .poset import codegeneracy
    return AHSimplex(dg.fibrant_replace(dg.precompose(s.data, codegeneracy(j, s.n)),
                                        check_shape=False, factorization=FACTORIZATION).diagram)


# -- horn filling ----------------------------------------------------------------

def horn_fill(faces, k):
    """Fill the horn whose i-th face is faces[i] for i != k (faces[k] is ignored)."""
    faces = list(faces)
    n = len(faces) - 1
    if not 0 <= k <= n:
        raise SimplexError(f"horn index {k} out of range")
    idx = [i for i in range(n + 1) if i != k]
    if n < 1:
        raise SimplexError("horns start in dimension 1")
    for i in idx:
        if faces[i] is None or faces[i].n != n - 1:
            raise SimplexError(f"face {i} must be an {n - 1}-simplex")
    for i in idx:
        for j in idx:
            if i < j and n >= 2:
                a = dg.precompose(faces[j].data, coface(i, n - 2))
                b = dg.precompose(faces[i].data, coface(j - 1, n - 2))
                if a != b:
                    raise SimplexError(f"horn faces {i} and {j} are incompatible")
    P = delta_tilde(n)
    H = horn_poset(n, k)
    top = tuple(range(n + 1))
    opp = tuple(x for x in top if x != k)
    objs, arrows = {}, {}
    for x in H.elements:
        i = next(l for l in idx if l not in x)
        objs[x] = faces[i].data.obj(relabel_out(x, i))
    for a, b in H.covers:
        i = next(l for l in idx if l not in b)
        arrows[(a, b)] = faces[i].data.arrow(relabel_out(a, i), relabel_out(b, i))
    horn = Diagram(H, objs, arrows, p=faces[idx[0]].data.p, check=False)
    lim = ch.Limit(H, horn.obj, horn.comp, p=horn.p)
    objs[top] = lim.obj
    objs[opp] = lim.obj
    for a, b in P.covers:
        if b == top:
            arrows[(a, b)] = identity(lim.obj) if a == opp else lim.proj(a)
        elif b == opp:
            arrows[(a, b)] = lim.proj(a)
    G = Diagram(P, objs, arrows, p=horn.p, check=True)
    out = AHSimplex(dg.fibrant_replace(G, check_shape=False, factorization=FACTORIZATION).diagram)
    for i in idx:
        if face(out, i).data != faces[i].data:
            raise SimplexError(f"internal: filler face {i} differs from the input")
    return out


# -- simplicial maps from a triangulation ------------------------------------------

class SimplicialMap:
    """f : T_. -> A^h given on nondegenerate simplices of T."""

    def __init__(self, complex_, values):
        self.complex = complex_
        self.sset = SimplicialSetPresentation(complex_)
        self.values = dict(values)

    def value(self, x):
        """f at any simplex of T_. (a nondecreasing vertex tuple)."""
        base, theta = SimplicialSetPresentation.normal_form(tuple(x))
        s = self.values[base]
        return s if is_identity(theta) else apply(s, theta)

    def compatibility_failures(self):
        bad = []
        for s, v in self.values.items():
            for i in range(len(s)):
                if len(s) < 2:
                    break
                d = s[:i] + s[i + 1:]
                if dg.precompose(v.data, coface(i, len(s) - 2)) != self.values[d].data:
                    bad.append((s, i))
        return bad

    def __eq__(self, other):
        return (isinstance(other, SimplicialMap) and self.complex == other.complex
                and self.values.keys() == other.values.keys()
                and all(self.values[s].data == other.values[s].data for s in self.values))

    def __hash__(self):
        return hash(tuple(sorted(self.values)))


def simplex_inclusion(P, sigma):
    """Delta~^n -> P(T) sending a subset of positions to the corresponding face of sigma."""
    from .poset import PosetMap
    n = len(sigma) - 1
    src = delta_tilde(n)
    return PosetMap(src, P, {a: tuple(sigma[i] for i in a) for a in src})


@dataclass
class LambdaResult:
    f: SimplicialMap
    replacement: object


def lambda_map(F, T, base=None):
    """The simplicial map sending sigma to the replaced diagram restricted to sigma."""
    P = face_poset(T)
    if F.shape != P:
        raise DiagramError("diagram shape is not the face poset of the complex")
    if not dg.is_isotopy_functor(F):
        raise DiagramError("not an isotopy functor: some arrow is not a quasi-isomorphism")
    if base is not None:
        hb = ch.homology(base)
        for x in P.elements:
            if ch.homology(F.obj(x)) != hb:
                raise DiagramError(f"value at {x!r} is not quasi-isomorphic to the base")
    repl = dg.fibrant_replace(F, factorization=FACTORIZATION)
    return LambdaResult(_restrict_to_simplices(repl.diagram, T), repl)


def _restrict_to_simplices(R, T):
    values = {}
    for s in T.simplices():
        values[s] = AHSimplex(dg.precompose(R, simplex_inclusion(R.shape, s)))
    return SimplicialMap(T, values)


def theta_map(f):
    """F(sigma) = f_sigma([n]) with arrows the top arrows of f_sigma."""
    T = f.complex
    P = face_poset(T)
    objs, arrows = {}, {}
    for s in P.elements:
        objs[s] = f.values[s].top_obj()
    for a, b in P.covers:
        i = next(j for j in range(len(b)) if b[j] not in a)
        top = tuple(range(len(b)))
        arrows[(a, b)] = f.values[b].data.arrow(tuple(x for x in top if x != i), top)
    return Diagram(P, objs, arrows, check=False)


@dataclass
class RoundTrip:
    ok: bool
    detail: str
    witness: object = None


def roundtrip_check(obj, T):
    if isinstance(obj, SimplicialMap):
        f2 = lambda_map(theta_map(obj), T).f
        ok = f2 == obj
        return RoundTrip(ok, "Lambda(Theta(f)) == f" if ok else "Lambda(Theta(f)) differs from f")
    lam = lambda_map(obj, T)
    back = theta_map(lam.f)
    unit = lam.replacement.unit
    ok = back == lam.replacement.diagram and unit.target == back and unit.is_natural() and unit.is_weq()
    exact = back == obj
    return RoundTrip(ok, "Theta(Lambda(F)) == F" if exact else "unit F -> Theta(Lambda(F)) is a weak equivalence",
                     unit)


# -- weak equivalences and homotopies ---------------------------------------------------

def face_nat(g, i, n):
    tau = coface(i, n - 1)
    src = dg.precompose(g.source, tau)
    tgt = dg.precompose(g.target, tau)
    return NatTrans(src, tgt, {x: g[tau(x)] for x in src.shape.elements}, check=False)


_DMAP = {}


def degeneracy_map(g, src, tgt, theta):
    """theta^* applied to a map g : src -> tgt of nondegenerate simplices."""
    theta = tuple(theta)
    if is_identity(theta):
        return g
    key = (src.key(), tgt.key(), _nat_key(g), theta)
    if key in _DMAP:
        return _DMAP[key]
    for s in (src, tgt):
        if is_degenerate(s):
            raise DegenerateBaseError("map out of a degenerate simplex")
    S, Sp = build(src, theta), build(tgt, theta)
    m = src.n
    N = len(theta) - 1
    bmaps = []
    for l in range(N + 1):
        t = drop(theta, l)
        if sorted(set(t)) == list(range(m + 1)):
            bmaps.append(degeneracy_map(g, src, tgt, t))
        else:
            missing = theta[l]
            fs, ft = face(src, missing), face(tgt, missing)
            if is_degenerate(fs) or is_degenerate(ft):
                raise DegenerateBaseError("a face of the base is itself degenerate")
            bmaps.append(degeneracy_map(face_nat(g, missing, m), fs, ft, compress(t, missing)))
    top = tuple(range(N + 1))
    comps = {}
    for x in delta_tilde(N).elements:
        if x == top:
            continue
        l = next(l for l in top if l not in x)
        comps[x] = bmaps[l][relabel_out(x, l)]
    legs = []
    for (a, rho, _), (_, rho_p, _), inj in zip(S.parts.legs, Sp.parts.legs, Sp.parts.colim.inj):
        legs.append(compose(inj, bmaps[a + 1][rho.top]))
    comps[top] = S.parts.colim.factor(legs)
    eta = NatTrans(S.parts.glued, Sp.parts.glued, comps, check=True)
    out = dg.fibrant_replace_map(eta, S.parts.repl, Sp.parts.repl)
    _DMAP[key] = out
    return out


def _nat_key(g):
    import hashlib
    h = hashlib.blake2b(digest_size=16)
    for x in g.source.shape.elements:
        h.update(g[x].key())
    return h.digest()


class MapWeq:
    """beta_sigma : f_sigma -> f'_sigma for every simplex sigma of T_."""

    def __init__(self, f, fp, beta):
        self.f, self.fp = f, fp
        self.beta = beta

    def at(self, x):
        x = tuple(x)
        base, theta = SimplicialSetPresentation.normal_form(x)
        if is_identity(theta):
            return self.beta[base]
        return degeneracy_map(self.beta[base], self.f.values[base], self.fp.values[base], theta)


def nat_weq_to_map_weq(eta, T):
    if not eta.is_weq():
        raise DiagramError("transformation is not an objectwise quasi-isomorphism")
    lf, lfp = lambda_map(eta.source, T), lambda_map(eta.target, T)
    rbar = dg.fibrant_replace_map(eta, lf.replacement, lfp.replacement)
    beta = {}
    for s in T.simplices():
        inc = simplex_inclusion(rbar.source.shape, s)
        src, tgt = lf.f.values[s].data, lfp.f.values[s].data
        beta[s] = NatTrans(src, tgt, {x: rbar[inc(x)] for x in src.shape.elements}, check=False)
    return MapWeq(lf.f, lfp.f, beta)


@dataclass
class Homotopy:
    """Cells of T x Delta[1] keyed by (vertex word, level word), with maps from f."""
    complex: object
    f: SimplicialMap
    fp: SimplicialMap
    cells: dict
    thetas: dict = field(default_factory=dict)


def product_cells(T):
    """Nondegenerate simplices of T x Delta[1] as (vertex word, level word), by dimension."""
    return sorted(product_chains(T), key=lambda c: (len(c[0]), c))


def homotopy_from_weq(weq, T):
    f, fp = weq.f, weq.fp
    cells, thetas = {}, {}
    for sw, tw in product_cells(T):
        N = len(sw) - 1
        if all(t == 0 for t in tw):
            s = f.values[sw]
            cells[(sw, tw)] = s
            thetas[(sw, tw)] = dg.nat_identity(s.data)
            continue
        if all(t == 1 for t in tw):
            cells[(sw, tw)] = fp.values[sw]
            thetas[(sw, tw)] = weq.beta[sw]
            continue
        fs = f.value(sw)
        fcs = [(sw[:l] + sw[l + 1:], tw[:l] + tw[l + 1:]) for l in range(N + 1)]
        faces = [cells[c] for c in fcs]
        P, top, objs, arrows = _glue_boundary(N, faces, fs.data.p)
        bd = dg._Partial(P, fs.data.p)
        bd.objects.update(objs)
        bd.arrows.update(arrows)
        sub = P.subposet([x for x in P.elements if x != top])
        lim = ch.Limit(sub, bd.obj, bd.comp, p=fs.data.p)

        def leg(mx):
            l = next(j for j in top if j not in mx)
            return compose(thetas[fcs[l]][tuple(range(N))], fs.data.comp(top, mx))

        eta = lim.factor(leg)
        fac = ch.FACTORIZATIONS[FACTORIZATION](eta)
        objs[top] = fac.obj
        for l in range(N + 1):
            mx = tuple(x for x in top if x != l)
            arrows[(mx, top)] = compose(lim.proj(mx), fac.pbar)
        D = Diagram(P, objs, arrows, p=fs.data.p, check=True)
        cell = AHSimplex(D)
        comps = {}
        for x in P.elements:
            if x == top:
                comps[x] = fac.tau
            else:
                l = next(j for j in top if j not in x)
                comps[x] = thetas[fcs[l]][relabel_out(x, l)]
        cells[(sw, tw)] = cell
        thetas[(sw, tw)] = NatTrans(fs.data, D, comps, check=True)
    return Homotopy(T, f, fp, cells, thetas)


def homotopy_face_failures(H):
    bad = []
    for (sw, tw), c in H.cells.items():
        for l in range(len(sw)):
            if len(sw) < 2:
                break
            fc = (sw[:l] + sw[l + 1:], tw[:l] + tw[l + 1:])
            if dg.precompose(c.data, coface(l, len(sw) - 2)) != H.cells[fc].data:
                bad.append(((sw, tw), l))
    return bad


def theta_product(H):
    """Theta over T x I: the diagram of top values of the homotopy cells."""
    KI = product_with_interval(H.complex)
    P = face_poset(KI)

    def cell(s):
        return barycenter_label([KI.vertices[j] for j in s])

    objs = {s: H.cells[cell(s)].top_obj() for s in P.elements}
    arrows = {}
    for a, b in P.covers:
        i = next(j for j in range(len(b)) if b[j] not in a)
        top = tuple(range(len(b)))
        arrows[(a, b)] = H.cells[cell(b)].data.arrow(tuple(x for x in top if x != i), top)
    return KI, Diagram(P, objs, arrows, check=False)


def zigzag_from_homotopy(H):
    """Theta(f) <- F_0^B -> F_0^U = F_1^L <- ... -> F_n^U = Theta(f')."""
    T = H.complex
    n = len(T.vertices) - 1
    KI, Hbar = theta_product(H)
    P = face_poset(T)

    def to_ki(pairs):
        return tuple(sorted(KI.index[v] for v in pairs))

    def functor(i, kind):
        phi = {lam: to_ki(phi_map(i, kind, lam, n)) for lam in P.elements}
        arrows = {(a, b): Hbar.comp(phi[b], phi[a]) for a, b in P.covers}
        return Diagram(P, {lam: Hbar.obj(phi[lam]) for lam in P.elements}, arrows, check=False), phi

    steps = []
    start = None
    for i in range(n + 1):
        FL, phL = functor(i, "L")
        FB, phB = functor(i, "B")
        FU, phU = functor(i, "U")
        if start is None:
            start = FL
        to_l = NatTrans(FB, FL, {lam: Hbar.comp(phB[lam], phL[lam]) for lam in P.elements}, check=False)
        to_u = NatTrans(FB, FU, {lam: Hbar.comp(phB[lam], phU[lam]) for lam in P.elements}, check=False)
        steps.append((to_l, -1))
        steps.append((to_u, +1))
    return dg.Zigzag(start, steps)


# -- serialisation -------------------------------------------------------------

def _simplex_from_json(obj, p=None, where="simplex"):
    try:
        d = dg.diagram_from_json(obj, p=p)
    except (ValueError, KeyError) as exc:
        raise SimplexError(f"{where}: {exc}") from exc
    bad = simplex_failures(d)
    if bad:
        raise SimplexError(f"{where}: " + "; ".join(bad))
    return AHSimplex(d)


def simplicial_map_to_json(f):
    from .scomplex import complex_to_json
    return {"complex": complex_to_json(f.complex),
            "simplices": [{"simplex": list(s), "diagram": dg.diagram_to_json(v.data)}
                          for s, v in sorted(f.values.items(), key=lambda kv: (len(kv[0]), kv[0]))]}


def simplicial_map_from_json(obj, p=None):
    from .scomplex import complex_from_json
    if not isinstance(obj, dict) or not {"complex", "simplices"} <= set(obj):
        raise SimplexError("simplicial map: need 'complex' and 'simplices'")
    T = complex_from_json(obj["complex"])
    values = {}
    for n, item in enumerate(obj["simplices"]):
        s = tuple(item["simplex"])
        if not T.is_simplex(s) or list(s) != sorted(s):
            raise SimplexError(f"simplices[{n}]: {list(s)} is not an increasing simplex of the complex")
        values[s] = _simplex_from_json(item["diagram"], p, f"simplices[{n}]")
    missing = [s for s in T.simplices() if s not in values]
    if missing:
        raise SimplexError(f"simplicial map: no value on {list(missing[0])}")
    f = SimplicialMap(T, values)
    bad = f.compatibility_failures()
    if bad:
        s, i = bad[0]
        raise SimplexError(f"simplicial map: face {i} of {list(s)} disagrees with its value")
    return f


def faces_from_json(obj, p=None):
    """{"faces": [diagram or null, ...]} for horn filling."""
    if not isinstance(obj, dict) or "faces" not in obj:
        raise SimplexError("horn: need 'faces'")
    return [None if d is None else _simplex_from_json(d, p, f"faces[{i}]") for i, d in enumerate(obj["faces"])]


def faces_to_json(faces):
    return {"faces": [None if s is None else dg.diagram_to_json(s.data) for s in faces]}


def homotopy_to_json(H):
    from .scomplex import complex_to_json
    return {"complex": complex_to_json(H.complex),
            "cells": [{"vertices": list(sw), "levels": list(tw), "diagram": dg.diagram_to_json(c.data)}
                      for (sw, tw), c in sorted(H.cells.items(), key=lambda kv: (len(kv[0][0]), kv[0]))]}


def homotopy_from_json(obj, p=None):
    from .scomplex import complex_from_json
    if not isinstance(obj, dict) or not {"complex", "cells"} <= set(obj):
        raise SimplexError("homotopy: need 'complex' and 'cells'")
    T = complex_from_json(obj["complex"])
    wanted = set(product_chains(T))
    cells = {}
    for n, item in enumerate(obj["cells"]):
        key = (tuple(item["vertices"]), tuple(item["levels"]))
        if key not in wanted:
            raise SimplexError(f"cells[{n}]: not a nondegenerate simplex of T x Delta[1]")
        cells[key] = _simplex_from_json(item["diagram"], p, f"cells[{n}]")
    if set(cells) != wanted:
        raise SimplexError("homotopy: missing cells")
    H = Homotopy(T, None, None, cells)
    bad = homotopy_face_failures(H)
    if bad:
        raise SimplexError(f"homotopy: face {bad[0][1]} of cell {bad[0][0]} disagrees")
    return H


def zigzag_to_json(z):
    steps = []
    for eta, direction in z.steps:
        steps.append({"direction": direction,
                      "source": dg.diagram_to_json(eta.source),
                      "target": dg.diagram_to_json(eta.target),
                      "components": {dg._label(x): ch.map_to_json(eta[x]) for x in eta.source.shape.elements}})
    return {"start": dg.diagram_to_json(z.start), "steps": steps}


# -- serialisation -----------------------------------------------------------

def _key(t):
    return json.dumps(list(t), separators=(",", ":"))


def _unkey(s, what):
    try:
        v = json.loads(s)
    except ValueError as exc:
        raise SimplexError(f"{what}: bad key {s!r}") from exc
    if not isinstance(v, list):
        raise SimplexError(f"{what}: bad key {s!r}")
    return tuple(tuple(x) if isinstance(x, list) else x for x in v)


def map_to_json(f):
    return {"complex": sc.complex_to_json(f.complex),
            "simplices": {_key(s): dg.diagram_to_json(v.data) for s, v in sorted(f.values.items())}}


def map_from_json(obj, p=None):
    if not isinstance(obj, dict) or not {"complex", "simplices"} <= set(obj):
        raise SimplexError("simplicial map: need 'complex' and 'simplices'")
    T = sc.complex_from_json(obj["complex"])
    values = {}
    for k, d in obj["simplices"].items():
        s = _unkey(k, "simplicial map")
        if not T.is_simplex(s):
            raise SimplexError(f"simplicial map: {k} is not a simplex of the complex")
        try:
            values[s] = verify_simplex(dg.diagram_from_json(d, p=p))
        except (SimplexError, DiagramError, ch.ChainError) as exc:
            raise SimplexError(f"simplicial map: simplices.{k}: {exc}") from exc
    missing = [s for s in T.simplices() if s not in values]
    if missing:
        raise SimplexError(f"simplicial map: no value for {list(missing[0])}")
    f = SimplicialMap(T, values)
    bad = f.compatibility_failures()
    if bad:
        s, i = bad[0]
        raise SimplexError(f"simplicial map: face {i} of {list(s)} differs from the value there")
    return f


def homotopy_to_json(H):
    cells = [{"vertices": list(sw), "levels": list(tw), "diagram": dg.diagram_to_json(c.data)}
             for (sw, tw), c in sorted(H.cells.items())]
    return {"complex": sc.complex_to_json(H.complex), "cells": cells}


def homotopy_from_json(obj, p=None):
    if not isinstance(obj, dict) or not {"complex", "cells"} <= set(obj):
        raise SimplexError("homotopy: need 'complex' and 'cells'")
    T = sc.complex_from_json(obj["complex"])
    cells = {}
    for n, c in enumerate(obj["cells"]):
        try:
            key = (tuple(c["vertices"]), tuple(c["levels"]))
            cells[key] = verify_simplex(dg.diagram_from_json(c["diagram"], p=p))
        except (KeyError, TypeError) as exc:
            raise SimplexError(f"homotopy: cells[{n}] needs 'vertices', 'levels', 'diagram'") from exc
        except (SimplexError, DiagramError, ch.ChainError) as exc:
            raise SimplexError(f"homotopy: cells[{n}]: {exc}") from exc
    want = set(product_cells(T))
    if set(cells) != want:
        raise SimplexError("homotopy: cells do not match the simplices of T x Delta[1]")
    ends = [SimplicialMap(T, {sw: cells[(sw, tw)] for sw, tw in cells if set(tw) == {t}}) for t in (0, 1)]
    H = Homotopy(T, ends[0], ends[1], cells)
    bad = homotopy_face_failures(H)
    if bad:
        raise SimplexError(f"homotopy: face {bad[0][1]} of cell {bad[0][0]} differs from the stored cell")
    return H


def nat_to_json(eta):
    return {"source": dg.diagram_to_json(eta.source), "target": dg.diagram_to_json(eta.target),
            "components": {dg._label(x): ch.map_to_json(eta[x]) for x in eta.source.shape.elements}}


def zigzag_to_json(z):
    return {"start": dg.diagram_to_json(z.start),
            "steps": [{"direction": d, "map": nat_to_json(eta)} for eta, d in z.steps]}


def nat_from_json(obj, p=None):
    if not isinstance(obj, dict) or not {"source", "target", "components"} <= set(obj):
        raise DiagramError("transformation: need 'source', 'target', 'components'")
    F = dg.diagram_from_json(obj["source"], p=p)
    G = dg.diagram_from_json(obj["target"], p=p)
    comps = {}
    for x in F.shape.elements:
        lab = dg._label(x)
        if lab not in obj["components"]:
            raise DiagramError(f"transformation: no component at {lab}")
        comps[x] = ch.map_from_json(obj["components"][lab], F.obj(x), G.obj(x))
    eta = NatTrans(F, G, comps, check=False)
    if not eta.is_natural():
        raise DiagramError("transformation: a naturality square does not commute")
    return eta
