"""Random test objects: complexes, diagrams of inclusions, transformations."""
import numpy as np

from . import _fp
from . import chain as ch
from .diagram import Diagram, NatTrans
from .poset import Poset


def random_invertible(rng, n, p):
    while True:
        g = rng.integers(0, p, (n, n))
        if n == 0 or _fp.rank(g, p) == n:
            return g


def sphere(k, p, mult=1):
    return ch.ChainComplex({k: mult}, p=p)


def disk(k, p):
    """The contractible complex F_p -> F_p in degrees k, k-1."""
    return ch.ChainComplex({k: 1, k - 1: 1}, {k: [[1]]}, p=p)


def random_disks(rng, p, max_count=2, degrees=(1, 2)):
    return [disk(int(rng.choice(degrees)), p) for _ in range(int(rng.integers(0, max_count + 1)))]


def change_basis(X, mats, p):
    """Transport X along degreewise isomorphisms; returns (X', iso X -> X')."""
    d = {}
    for k in X.dims:
        if k - 1 in X.dims:
            inv = _fp.inverse(mats[k], p)
            d[k] = _fp.matmul(mats[k - 1], _fp.matmul(X.diff(k), inv, p), p)
    Y = ch.ChainComplex(X.dims, d, p=p, check=False)
    return Y, ch.ChainMap(X, Y, mats, check=False)


def scramble(X, rng):
    p = X.p
    return change_basis(X, {k: random_invertible(rng, n, p) for k, n in X.dims.items()}, p)


def base_complex(p, homology=None):
    """A minimal complex with the given homology dimensions (default F_p in degree 0)."""
    homology = homology or {0: 1}
    return ch.ChainComplex(homology, p=p)


def random_model(rng, base, max_disks=2):
    """A scrambled complex quasi-isomorphic to ``base`` with the inclusion as witness."""
    p = base.p
    S = ch.direct_sum([base] + random_disks(rng, p, max_disks), p=p)
    Y, iso = scramble(S.obj, rng)
    return Y, ch.compose(iso, S.inc[0])


def random_complex(rng, p, max_deg=2, max_parts=3):
    parts = []
    for _ in range(int(rng.integers(1, max_parts + 1))):
        k = int(rng.integers(0, max_deg + 1))
        parts.append(sphere(k, p) if rng.random() < 0.5 or k == 0 else disk(k, p))
    return scramble(ch.direct_sum(parts, p=p).obj, rng)[0]


def random_nullhomotopy(rng, X, Y):
    """A random h : X -> Y of degree +1 and the map d h + h d."""
    p = X.p
    h = {k: rng.integers(0, p, (Y.dim(k + 1), X.dim(k))) for k in set(X.dims) | {k - 1 for k in Y.dims}}
    zero = np.zeros
    mats = {}
    for k in X.dims:
        a = h.get(k, zero((Y.dim(k + 1), X.dim(k)), dtype=np.int64))
        b = h.get(k - 1, zero((Y.dim(k), X.dim(k - 1)), dtype=np.int64))
        mats[k] = (_fp.matmul(Y.diff(k + 1), a, p) + _fp.matmul(b, X.diff(k), p)) % p
    return ch.ChainMap(X, Y, mats), h


def random_map(rng, X, Y):
    """A random chain map X -> Y: a null-homotopic part plus a random map on homology."""
    p = X.p
    null, _ = random_nullhomotopy(rng, X, Y)
    sx, sy = ch.splitting(X), ch.splitting(Y)
    hom = {k: rng.integers(0, p, (sy.H.dim(k), sx.H.dim(k))) for k in sx.H.dims if sy.H.dim(k)}
    w = ch.ChainMap(sx.H, sy.H, hom, check=False)
    return ch.add(null, ch.compose_all(sy.incl, w, sx.proj))


def random_lift_square(rng, p):
    """Data (g0, g1, f0, f1, f0', f1', g, h0, h1) with squares commuting up to the homotopies.

    (f0', f1') is a projection off a sum, hence a fibration.
    """
    B = random_complex(rng, p)
    C0 = random_complex(rng, p)
    D0, D1 = random_complex(rng, p), random_complex(rng, p)
    S = ch.direct_sum([C0, D0, D1], p=p)
    C = S.obj
    f0p = ch.add(S.proj[1], ch.compose(random_map(rng, C0, D0), S.proj[0]))
    f1p = S.proj[2]
    g = random_map(rng, B, C)
    f0 = ch.identity(B)
    A1, iso = scramble(B, rng)
    f1 = iso
    n0, k0 = random_nullhomotopy(rng, B, D0)
    n1, k1 = random_nullhomotopy(rng, B, D1)
    g0 = ch.compose(f0p, g) - n0
    g1 = ch.compose(ch.compose(f1p, g) - n1, ch.inverse_map(iso))
    h0 = ch.ChainHomotopy(ch.compose(f0p, g), ch.compose(g0, f0), k0)
    h1 = ch.ChainHomotopy(ch.compose(f1p, g), ch.compose(g1, f1), k1)
    return g0, g1, f0, f1, f0p, f1p, g, h0, h1


def inclusion_diagram(P, base, pieces, rng=None, scrambled=True):
    """X(a) = base + sum of pieces[c] over c >= a, arrows the evident inclusions.

    With ``scrambled`` every object is transported along a random basis change.
    """
    p = base.p
    order = list(P.elements)
    objs, incs = {}, {}
    summands = {}
    for a in order:
        above = [c for c in order if P.leq(a, c)]
        summands[a] = above
        S = ch.direct_sum([base] + [pieces[c] for c in above], p=p)
        objs[a] = S
    arrows = {}
    for a, b in P.covers:
        Sa, Sb = objs[a], objs[b]
        legs = [Sa.inc[0]] + [Sa.inc[1 + summands[a].index(c)] for c in summands[b]]
        arrows[(a, b)] = ch.map_out_of_sum(Sb, legs)
    plain = Diagram(P, {a: objs[a].obj for a in order}, arrows, p=p, check=False)
    if not scrambled:
        return plain
    return transport(plain, rng)


def transport(F, rng):
    """F with every object moved along a random isomorphism."""
    isos = {}
    objs = {}
    for x in F.shape.elements:
        objs[x], isos[x] = scramble(F.obj(x), rng)
    arrows = {}
    for a, b in F.shape.covers:
        inv_b = ch.inverse_map(isos[b])
        arrows[(a, b)] = ch.compose_all(isos[a], F.arrow(a, b), inv_b)
    return Diagram(F.shape, objs, arrows, p=F.p, check=False)


def random_isotopy_diagram(rng, P, base, max_disks=1, scrambled=True):
    p = base.p
    pieces = {}
    for c in P.elements:
        ds = random_disks(rng, p, max_disks)
        pieces[c] = ch.direct_sum(ds, p=p).obj if ds else ch.zero_complex(p)
    return inclusion_diagram(P, base, pieces, rng, scrambled)


def random_weq(rng, F, max_disks=1):
    """F -> F' with F' = F plus contractible pieces, then scrambled."""
    P = F.shape
    p = F.p
    extra = {}
    for c in P.elements:
        ds = random_disks(rng, p, max_disks)
        extra[c] = ch.direct_sum(ds, p=p).obj if ds else ch.zero_complex(p)
    E = inclusion_diagram(P, ch.zero_complex(p), extra, scrambled=False)
    sums = {x: ch.direct_sum([F.obj(x), E.obj(x)], p=p) for x in P.elements}
    arrows = {}
    for a, b in P.covers:
        sa, sb = sums[a], sums[b]
        arrows[(a, b)] = ch.map_into_sum(sa, [ch.compose(F.arrow(a, b), sb.proj[0]),
                                              ch.compose(E.arrow(a, b), sb.proj[1])])
    G = Diagram(P, {x: sums[x].obj for x in P.elements}, arrows, p=p, check=False)
    eta = NatTrans(F, G, {x: sums[x].inc[0] for x in P.elements}, check=False)
    isos = {}
    objs = {}
    for x in P.elements:
        objs[x], isos[x] = scramble(G.obj(x), rng)
    arrows2 = {(a, b): ch.compose_all(isos[a], G.arrow(a, b), ch.inverse_map(isos[b])) for a, b in P.covers}
    G2 = Diagram(P, objs, arrows2, p=p, check=False)
    eta2 = NatTrans(F, G2, {x: ch.compose(isos[x], eta[x]) for x in P.elements}, check=False)
    return eta2


def constant_diagram(P, X):
    return Diagram(P, {x: X for x in P.elements}, {ab: ch.identity(X) for ab in P.covers}, p=X.p, check=False)


def glued_disk():
    """The cone on the boundary of a triangle: three triangles around the apex 3."""
    from .scomplex import SimplicialComplex
    return SimplicialComplex(range(4), [(0, 1, 3), (1, 2, 3), (0, 2, 3)])


def finite_poset(elements, covers):
    return Poset(elements, covers)
