"""Bounded chain complexes of finite-dimensional F_p vector spaces.

Weak equivalences are quasi-isomorphisms, fibrations are degreewise
surjections, cofibrations are degreewise injections.  Every object is
fibrant and cofibrant.
"""
import hashlib
from dataclasses import dataclass

import numpy as np

from . import _fp


def _arr(m, shape=None):
    a = np.asarray(m, dtype=np.int64)
    if shape is not None and a.size == 0:
        a = a.reshape(shape)
    return a


class ChainError(ValueError):
    pass


class ChainComplex:
    """A complex with differentials d_k : C_k -> C_{k-1}.

    ``dims`` maps degree to dimension; ``d`` maps degree k to the
    (dim_{k-1} x dim_k) matrix of d_k.  Missing entries are zero.
    """

    __slots__ = ("p", "dims", "_d", "_key")

    def __init__(self, dims, d=None, p=2, check=True):
        self.p = int(p)
        self.dims = {int(k): int(v) for k, v in sorted(dims.items()) if int(v) > 0}
        self._d = {}
        self._key = None
        for k, m in (d or {}).items():
            k = int(k)
            m = _arr(m) % self.p
            want = (self.dim(k - 1), self.dim(k))
            if m.size == 0:
                if want[0] * want[1] != 0:
                    m = np.zeros(want, dtype=np.int64)
                else:
                    continue
            if m.shape != want:
                raise ChainError(f"d_{k} has shape {m.shape}, expected {want}")
            if m.any():
                self._d[k] = m
        if check:
            for k in self._d:
                if k - 1 in self._d and _fp.matmul(self._d[k - 1], self._d[k], self.p).any():
                    raise ChainError(f"d_{k - 1} d_{k} != 0")

    def dim(self, k):
        return self.dims.get(k, 0)

    def diff(self, k):
        m = self._d.get(k)
        if m is None:
            return np.zeros((self.dim(k - 1), self.dim(k)), dtype=np.int64)
        return m

    @property
    def lo(self):
        return min(self.dims) if self.dims else 0

    @property
    def hi(self):
        return max(self.dims) if self.dims else -1

    def degrees(self):
        return list(range(self.lo, self.hi + 1))

    def total_dim(self):
        return sum(self.dims.values())

    def is_zero(self):
        return not self.dims

    def key(self):
        if self._key is None:
            h = hashlib.blake2b(digest_size=16)
            h.update(repr((self.p, sorted(self.dims.items()))).encode())
            for k in sorted(self._d):
                h.update(str(k).encode())
                h.update(np.ascontiguousarray(self._d[k]).tobytes())
            self._key = h.digest()
        return self._key

    def __eq__(self, other):
        return isinstance(other, ChainComplex) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"ChainComplex(p={self.p}, dims={self.dims})"


class ChainMap:
    """A degree-0 map; ``mats[k]`` is the (target dim_k x source dim_k) matrix."""

    __slots__ = ("source", "target", "_m", "_key")

    def __init__(self, source, target, mats=None, check=True):
        self.source = source
        self.target = target
        self._m = {}
        self._key = None
        p = source.p
        for k, m in (mats or {}).items():
            k = int(k)
            want = (target.dim(k), source.dim(k))
            m = _arr(m) % p
            if m.size == 0 and want[0] * want[1] == 0:
                continue
            if m.shape != want:
                raise ChainError(f"map component in degree {k} has shape {m.shape}, expected {want}")
            if m.any():
                self._m[k] = m
        if check and not self.is_chain_map():
            raise ChainError("components do not commute with the differentials")

    @property
    def p(self):
        return self.source.p

    def mat(self, k):
        m = self._m.get(k)
        if m is None:
            return np.zeros((self.target.dim(k), self.source.dim(k)), dtype=np.int64)
        return m

    def degrees(self):
        return sorted(set(self.source.dims) | set(self.target.dims))

    def is_chain_map(self):
        p = self.p
        for k in self.degrees() + [self.target.hi + 1]:
            lhs = _fp.matmul(self.target.diff(k), self.mat(k), p)
            rhs = _fp.matmul(self.mat(k - 1), self.source.diff(k), p)
            if not np.array_equal(lhs, rhs):
                return False
        return True

    def key(self):
        if self._key is None:
            h = hashlib.blake2b(digest_size=16)
            h.update(self.source.key())
            h.update(self.target.key())
            for k in sorted(self._m):
                h.update(str(k).encode())
                h.update(np.ascontiguousarray(self._m[k]).tobytes())
            self._key = h.digest()
        return self._key

    def __eq__(self, other):
        return isinstance(other, ChainMap) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __matmul__(self, other):
        return compose(self, other)

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, scale(other, -1))

    def __repr__(self):
        return f"ChainMap({self.source.dims} -> {self.target.dims})"


def zero_complex(p=2):
    return ChainComplex({}, p=p)


def identity(X):
    return ChainMap(X, X, {k: np.eye(n, dtype=np.int64) for k, n in X.dims.items()}, check=False)


def zero_map(X, Y):
    return ChainMap(X, Y, {}, check=False)


def compose(g, f):
    """g o f."""
    if g.source != f.target:
        raise ChainError("cannot compose: target and source differ")
    p = f.p
    mats = {k: _fp.matmul(g.mat(k), f.mat(k), p) for k in f.source.dims if g.target.dim(k)}
    return ChainMap(f.source, g.target, mats, check=False)


def compose_all(*maps):
    out = maps[-1]
    for m in reversed(maps[:-1]):
        out = compose(m, out)
    return out


def add(f, g):
    if f.source != g.source or f.target != g.target:
        raise ChainError("cannot add maps with different endpoints")
    p = f.p
    return ChainMap(f.source, f.target, {k: (f.mat(k) + g.mat(k)) % p for k in f.degrees()}, check=False)


def scale(f, c):
    p = f.p
    return ChainMap(f.source, f.target, {k: (c * f.mat(k)) % p for k in f.degrees()}, check=False)


def is_injective(f):
    return all(_fp.rank(f.mat(k), f.p) == f.source.dim(k) for k in f.source.dims)


def is_surjective(f):
    return all(_fp.rank(f.mat(k), f.p) == f.target.dim(k) for k in f.target.dims)


def is_fibration(f):
    return is_surjective(f)


def is_cofibration(f):
    return is_injective(f)


def is_iso(f):
    return all(f.source.dim(k) == f.target.dim(k) for k in f.degrees()) and is_injective(f)


def homology(X):
    p = X.p
    out = {}
    for k in X.degrees():
        r_out = _fp.rank(X.diff(k), p)
        r_in = _fp.rank(X.diff(k + 1), p)
        h = X.dim(k) - r_out - r_in
        if h:
            out[k] = h
    return out


def mapping_cone(f):
    """cone(f)_n = X_{n-1} + Y_n with d(x, y) = (-dx, f x + dy)."""
    X, Y, p = f.source, f.target, f.p
    lo = min(X.lo + 1, Y.lo) if (X.dims or Y.dims) else 0
    hi = max(X.hi + 1, Y.hi)
    dims = {n: X.dim(n - 1) + Y.dim(n) for n in range(lo, hi + 1)}
    d = {}
    for n in range(lo + 1, hi + 1):
        top = np.concatenate([(-X.diff(n - 1)) % p, np.zeros((X.dim(n - 2), Y.dim(n)), dtype=np.int64)], axis=1)
        bot = np.concatenate([f.mat(n - 1), Y.diff(n)], axis=1)
        d[n] = np.concatenate([top, bot], axis=0)
    return ChainComplex(dims, d, p=p, check=False)


def is_acyclic(X):
    return not homology(X)


def is_quasi_iso(f):
    return is_acyclic(mapping_cone(f))


def homology_map_ranks(f):
    """Rank of H_k(f) per degree, via the canonical splittings."""
    sx, sy = splitting(f.source), splitting(f.target)
    w = compose_all(sy.proj, f, sx.incl)
    return {k: _fp.rank(w.mat(k), f.p) for k in w.degrees()}


# -- direct sums ----------------------------------------------------------------

@dataclass
class DirectSum:
    obj: ChainComplex
    inc: list
    proj: list
    offsets: list


def _offsets(objs, k):
    out, o = [], 0
    for X in objs:
        out.append(o)
        o += X.dim(k)
    return out, o


def direct_sum(objs, p=None):
    objs = list(objs)
    if p is None:
        p = objs[0].p if objs else 2
    degs = sorted(set().union(*[set(X.dims) for X in objs])) if objs else []
    dims = {k: sum(X.dim(k) for X in objs) for k in degs}
    d = {}
    for k in degs:
        blocks = [X.diff(k) for X in objs]
        d[k] = _block_diag(blocks)
    S = ChainComplex(dims, d, p=p, check=False)
    incs, projs, offs = [], [], []
    for idx, X in enumerate(objs):
        mi, mp = {}, {}
        for k in degs:
            o, tot = _offsets(objs, k)
            e = np.zeros((tot, X.dim(k)), dtype=np.int64)
            e[o[idx]:o[idx] + X.dim(k)] = np.eye(X.dim(k), dtype=np.int64)
            mi[k] = e
            mp[k] = e.T.copy()
        incs.append(ChainMap(X, S, mi, check=False))
        projs.append(ChainMap(S, X, mp, check=False))
    for k in degs:
        offs.append(_offsets(objs, k)[0])
    return DirectSum(S, incs, projs, offs)


def _block_diag(blocks):
    rows = sum(b.shape[0] for b in blocks)
    cols = sum(b.shape[1] for b in blocks)
    out = np.zeros((rows, cols), dtype=np.int64)
    r = c = 0
    for b in blocks:
        out[r:r + b.shape[0], c:c + b.shape[1]] = b
        r += b.shape[0]
        c += b.shape[1]
    return out


def map_into_sum(S, maps):
    """The map W -> S = sum of targets with the given components."""
    src = maps[0].source
    mats = {k: np.concatenate([m.mat(k) for m in maps], axis=0) for k in src.dims}
    return ChainMap(src, S.obj, mats, check=False)


def map_out_of_sum(S, maps):
    tgt = maps[0].target
    mats = {k: np.concatenate([m.mat(k) for m in maps], axis=1) for k in S.obj.dims}
    return ChainMap(S.obj, tgt, mats, check=False)


def pair(f, g):
    """(f, g): W -> X + Y."""
    S = direct_sum([f.target, g.target])
    return S, map_into_sum(S, [f, g])


# -- limits and colimits ----------------------------------------------------------

class Limit:
    """Limit of a contravariant diagram over a finite poset.

    ``obj(x)`` gives the value at x and ``comp(b, a)`` the map D(b) -> D(a)
    for a <= b.  The limit sits inside the sum over maximal elements, cut
    out by agreement below.  Coordinates are the free variables of the
    canonical kernel basis.
    """

    def __init__(self, shape, obj, comp, p=2):
        self.shape = shape
        self.p = p
        self.maxima = shape.maximal()
        self._obj = obj
        self._comp = comp
        mobjs = [obj(m) for m in self.maxima]
        self.ambient = direct_sum(mobjs, p=p)
        V = self.ambient.obj
        checks = []
        for y in shape.elements:
            above = [i for i, m in enumerate(self.maxima) if shape.leq(y, m)]
            if len(above) > 1:
                checks.append((y, above))
        self._checks = checks
        degs = sorted(V.dims)
        self._K, self._free = {}, {}
        for k in degs:
            rows = []
            for y, above in checks:
                i0 = above[0]
                base = self._embed(comp(self.maxima[i0], y).mat(k), i0, k, mobjs)
                for i in above[1:]:
                    rows.append((base - self._embed(comp(self.maxima[i], y).mat(k), i, k, mobjs)) % p)
            C = np.concatenate(rows, axis=0) if rows else np.zeros((0, V.dim(k)), dtype=np.int64)
            K, free = _fp.nullspace(C, p)
            self._K[k], self._free[k] = K, free
        dims = {k: self._K[k].shape[1] for k in degs}
        d = {}
        for k in degs:
            if dims.get(k) and dims.get(k - 1):
                img = _fp.matmul(V.diff(k), self._K[k], p)
                d[k] = img[self._free[k - 1]]
        self.obj = ChainComplex(dims, d, p=p, check=False)
        self.incl = ChainMap(self.obj, V, {k: self._K[k] for k in degs}, check=False)
        self._proj = {}

    def _embed(self, m, i, k, mobjs):
        o, tot = _offsets(mobjs, k)
        out = np.zeros((m.shape[0], tot), dtype=np.int64)
        out[:, o[i]:o[i] + mobjs[i].dim(k)] = m
        return out

    def proj(self, x):
        """Projection lim -> D(x)."""
        if x not in self._proj:
            m = next(m for m in self.maxima if self.shape.leq(x, m))
            i = self.maxima.index(m)
            pm = compose(self.ambient.proj[i], self.incl)
            self._proj[x] = pm if x == m else compose(self._comp(m, x), pm)
        return self._proj[x]

    def factor(self, cone):
        """The map W -> lim for a cone given as a callable or dict on maxima."""
        get = cone if callable(cone) else cone.__getitem__
        legs = [get(m) for m in self.maxima]
        if not legs:
            raise ChainError("empty limit: use zero_map")
        into = map_into_sum(self.ambient, legs)
        W = legs[0].source
        mats = {k: into.mat(k)[self._free[k]] for k in W.dims if self.obj.dim(k)}
        return ChainMap(W, self.obj, mats, check=False)

    def factor_from(self, W, cone):
        if not self.maxima:
            return zero_map(W, self.obj)
        return self.factor(cone)


def limit_over_poset(D):
    """Limit of a diagram object exposing ``shape``, ``obj`` and ``comp``."""
    lim = Limit(D.shape, D.obj, D.comp, p=D.p)
    if not _cone_commutes(D, lim):
        raise ChainError("diagram squares do not commute")
    return lim


def _cone_commutes(D, lim):
    for a, b in D.shape.covers:
        if compose(D.comp(b, a), lim.proj(b)) != lim.proj(a):
            return False
    return True


def pullback(f, g):
    """X x_Z Y for f: X -> Z, g: Y -> Z; returns (P, pX, pY)."""
    from .poset import Poset
    shape = Poset(["x", "y", "z"], [("z", "x"), ("z", "y")])
    objs = {"x": f.source, "y": g.source, "z": f.target}
    maps = {("x", "z"): f, ("y", "z"): g}

    def comp(b, a):
        return identity(objs[a]) if a == b else maps[(b, a)]

    lim = Limit(shape, objs.__getitem__, comp, p=f.p)
    return lim.obj, lim.proj("x"), lim.proj("y"), lim


class Quotient:
    """V / image(sub) for an injective chain map sub: W -> V (or any map)."""

    def __init__(self, sub):
        V, p = sub.target, sub.p
        self.p = p
        self.ambient = V
        self._q, self._s = {}, {}
        dims = {}
        for k in V.dims:
            rel = sub.mat(k)
            rows, piv = _fp.row_space_basis(rel.T, p)
            keep = np.setdiff1d(np.arange(V.dim(k)), piv)
            q = np.zeros((keep.size, V.dim(k)), dtype=np.int64)
            q[np.arange(keep.size), keep] = 1
            for r, c in zip(rows, piv):
                q[:, c] = (-r[keep]) % p
            s = np.zeros((V.dim(k), keep.size), dtype=np.int64)
            s[keep, np.arange(keep.size)] = 1
            self._q[k], self._s[k] = q, s
            dims[k] = keep.size
        d = {}
        for k in V.dims:
            if dims.get(k) and dims.get(k - 1):
                d[k] = _fp.matmul(self._q[k - 1], _fp.matmul(V.diff(k), self._s[k], p), p)
        self.obj = ChainComplex(dims, d, p=p, check=False)
        self.q = ChainMap(V, self.obj, {k: self._q[k] for k in V.dims}, check=False)
        self.section = ChainMap(self.obj, V, {k: self._s[k] for k in V.dims}, check=False)

    def factor(self, g):
        """Map V/sub -> W induced by g: V -> W killing the image."""
        return ChainMap(self.obj, g.target,
                        {k: _fp.matmul(g.mat(k), self._s[k], self.p) for k in self.obj.dims}, check=False)


class Colimit:
    """Colimit of a menorah: maps f_1..f_m with common source."""

    def __init__(self, maps):
        maps = list(maps)
        if not maps:
            raise ChainError("empty menorah")
        X = maps[0].source
        if any(f.source != X for f in maps):
            raise ChainError("menorah legs must share a source")
        self.maps = maps
        self.sum = direct_sum([f.target for f in maps], p=X.p)
        if len(maps) == 1:
            rel_maps = None
        else:
            first = compose(self.sum.inc[0], maps[0])
            diffs = [compose(self.sum.inc[a], maps[a]) - first for a in range(1, len(maps))]
            S2 = direct_sum([X] * len(diffs), p=X.p)
            rel_maps = map_out_of_sum(S2, diffs)
        if rel_maps is None:
            rel_maps = zero_map(X, self.sum.obj)
        self.quot = Quotient(rel_maps)
        self.obj = self.quot.obj
        self.inj = [compose(self.quot.q, i) for i in self.sum.inc]

    def factor(self, cocone):
        g = map_out_of_sum(self.sum, list(cocone))
        return self.quot.factor(g)


def colimit_menorah(maps):
    return Colimit(maps)


# -- cylinders, path objects, factorizations -----------------------------------

@dataclass
class Cylinder:
    obj: ChainComplex
    inc: ChainMap      # X + X -> Cyl
    i0: ChainMap
    i1: ChainMap
    proj: ChainMap     # Cyl -> X
    source: ChainComplex
    summands: DirectSum


def cylinder(X):
    """Cyl(X)_n = X_n + X_n + X_{n-1}, d(a, b, c) = (da - c, db + c, -dc)."""
    p = X.p
    degs = sorted(set(X.dims) | {k + 1 for k in X.dims})
    dims = {n: 2 * X.dim(n) + X.dim(n - 1) for n in degs}
    d = {}
    for n in degs:
        a, a1, a2 = X.dim(n), X.dim(n - 1), X.dim(n - 2)
        m = np.zeros((2 * a1 + a2, 2 * a + a1), dtype=np.int64)
        m[:a1, :a] = X.diff(n)
        m[a1:2 * a1, a:2 * a] = X.diff(n)
        m[:a1, 2 * a:] = (-np.eye(a1, dtype=np.int64)) % p
        m[a1:2 * a1, 2 * a:] = np.eye(a1, dtype=np.int64)
        m[2 * a1:, 2 * a:] = (-X.diff(n - 1)) % p
        d[n] = m
    C = ChainComplex(dims, d, p=p, check=False)
    XX = direct_sum([X, X], p=p)
    inc, i0, i1, pr = {}, {}, {}, {}
    for n in degs:
        a, a1 = X.dim(n), X.dim(n - 1)
        e = np.zeros((2 * a + a1, 2 * a), dtype=np.int64)
        e[:2 * a, :2 * a] = np.eye(2 * a, dtype=np.int64)
        inc[n] = e
        i0[n] = e[:, :a]
        i1[n] = e[:, a:]
        q = np.zeros((a, 2 * a + a1), dtype=np.int64)
        q[:, :a] = np.eye(a, dtype=np.int64)
        q[:, a:2 * a] = np.eye(a, dtype=np.int64)
        pr[n] = q
    return Cylinder(C, ChainMap(XX.obj, C, inc, check=False), ChainMap(X, C, i0, check=False),
                    ChainMap(X, C, i1, check=False), ChainMap(C, X, pr, check=False), X, XX)


def cylinder_third(X, cyl, n):
    """Inclusion of the X_{n-1} block of Cyl(X)_n (used to read off homotopies)."""
    a, a1 = X.dim(n), X.dim(n - 1)
    e = np.zeros((2 * a + a1, a1), dtype=np.int64)
    e[2 * a:, :] = np.eye(a1, dtype=np.int64)
    return e


def homotopy_to_cylinder_map(u, v, h):
    """The map Cyl(X) -> Y equal to u on i0, v on i1, for a homotopy dh + hd = v - u."""
    X, Y, p = u.source, u.target, u.p
    cyl = cylinder(X)
    mats = {}
    for n in cyl.obj.dims:
        mats[n] = np.concatenate([u.mat(n), v.mat(n), h.get(n - 1, np.zeros((Y.dim(n), X.dim(n - 1)), dtype=np.int64))],
                                 axis=1) % p
    return cyl, ChainMap(cyl.obj, Y, mats)


@dataclass
class PathObject:
    obj: ChainComplex
    const: ChainMap
    ev0: ChainMap
    ev1: ChainMap


def path_object(Y):
    """Path(Y)_n = Y_n + Y_n + Y_{n+1}, d(a, b, h) = (da, db, b - a - dh)."""
    p = Y.p
    degs = sorted(set(Y.dims) | {k - 1 for k in Y.dims})
    dims = {n: 2 * Y.dim(n) + Y.dim(n + 1) for n in degs}
    d = {}
    for n in degs:
        a, a1, b1 = Y.dim(n), Y.dim(n - 1), Y.dim(n + 1)
        m = np.zeros((2 * a1 + a, 2 * a + b1), dtype=np.int64)
        m[:a1, :a] = Y.diff(n)
        m[a1:2 * a1, a:2 * a] = Y.diff(n)
        m[2 * a1:, :a] = (-np.eye(a, dtype=np.int64)) % p
        m[2 * a1:, a:2 * a] = np.eye(a, dtype=np.int64)
        m[2 * a1:, 2 * a:] = (-Y.diff(n + 1)) % p
        d[n] = m
    P = ChainComplex(dims, d, p=p, check=False)
    c, e0, e1 = {}, {}, {}
    for n in degs:
        a, b1 = Y.dim(n), Y.dim(n + 1)
        m = np.zeros((2 * a + b1, a), dtype=np.int64)
        m[:a] = np.eye(a, dtype=np.int64)
        m[a:2 * a] = np.eye(a, dtype=np.int64)
        c[n] = m
        z = np.zeros((a, 2 * a + b1), dtype=np.int64)
        z0 = z.copy()
        z0[:, :a] = np.eye(a, dtype=np.int64)
        z1 = z.copy()
        z1[:, a:2 * a] = np.eye(a, dtype=np.int64)
        e0[n], e1[n] = z0, z1
    return PathObject(P, ChainMap(Y, P, c, check=False), ChainMap(P, Y, e0, check=False), ChainMap(P, Y, e1, check=False))


@dataclass
class Factorization:
    """f = pbar o tau with tau an acyclic cofibration and pbar a fibration."""
    f: ChainMap
    obj: ChainComplex
    tau: ChainMap
    pbar: ChainMap
    back: ChainMap   # Z -> X, back o tau = id
    kind: str = "cocylinder"


def factor_acof_fib(f):
    """Mapping cocylinder Z = X x_Y Path(Y), coordinates (x, b, h) in X_n + Y_n + Y_{n+1}.

    d(x, b, h) = (dx, db, b - f x - dh); tau x = (x, f x, 0); pbar (x, b, h) = b.
    """
    X, Y, p = f.source, f.target, f.p
    degs = sorted(set(X.dims) | set(Y.dims) | {k - 1 for k in Y.dims})
    dims = {n: X.dim(n) + Y.dim(n) + Y.dim(n + 1) for n in degs}
    d = {}
    for n in degs:
        x, x1, y, y1, y2 = X.dim(n), X.dim(n - 1), Y.dim(n), Y.dim(n - 1), Y.dim(n + 1)
        m = np.zeros((x1 + y1 + y, x + y + y2), dtype=np.int64)
        m[:x1, :x] = X.diff(n)
        m[x1:x1 + y1, x:x + y] = Y.diff(n)
        m[x1 + y1:, :x] = (-f.mat(n)) % p
        m[x1 + y1:, x:x + y] = np.eye(y, dtype=np.int64)
        m[x1 + y1:, x + y:] = (-Y.diff(n + 1)) % p
        d[n] = m
    Z = ChainComplex(dims, d, p=p, check=False)
    tau, pbar, back = {}, {}, {}
    for n in degs:
        x, y, y2 = X.dim(n), Y.dim(n), Y.dim(n + 1)
        t = np.zeros((x + y + y2, x), dtype=np.int64)
        t[:x] = np.eye(x, dtype=np.int64)
        t[x:x + y] = f.mat(n)
        tau[n] = t
        pb = np.zeros((y, x + y + y2), dtype=np.int64)
        pb[:, x:x + y] = np.eye(y, dtype=np.int64)
        pbar[n] = pb
        bk = np.zeros((x, x + y + y2), dtype=np.int64)
        bk[:, :x] = np.eye(x, dtype=np.int64)
        back[n] = bk
    return Factorization(f, Z, ChainMap(X, Z, tau, check=False), ChainMap(Z, Y, pbar, check=False),
                         ChainMap(Z, X, back, check=False))


def factor_minimal(f):
    """f = pbar o tau with Z = X plus disks on a canonical complement of the image.

    Working down from the top degree, the disk tops in degree k are the
    standard vectors completing im f_k + d(disk tops in degree k+1) to Y_k.
    """
    X, Y, p = f.source, f.target, f.p
    degs = sorted(set(X.dims) | set(Y.dims))
    tops = {}
    for k in reversed(degs):
        cols = [f.mat(k)]
        if k + 1 in tops:
            cols.append(_fp.matmul(Y.diff(k + 1), tops[k + 1], p))
        M = np.concatenate(cols, axis=1) % p
        piv = set(_fp.rref(M.T, p)[1].tolist()) if M.size else set()
        miss = [j for j in range(Y.dim(k)) if j not in piv]
        V = np.zeros((Y.dim(k), len(miss)), dtype=np.int64)
        V[miss, np.arange(len(miss))] = 1
        tops[k] = V
    nt = {k: tops.get(k, np.zeros((Y.dim(k), 0), dtype=np.int64)).shape[1] for k in degs}
    zdegs = sorted(set(degs) | {k - 1 for k in degs if nt[k]})
    ntop = lambda k: nt.get(k, 0)
    dims = {k: X.dim(k) + ntop(k) + ntop(k + 1) for k in zdegs}
    d, tau, pbar, back = {}, {}, {}, {}
    for k in zdegs:
        x, t, b = X.dim(k), ntop(k), ntop(k + 1)
        x1, t1, b1 = X.dim(k - 1), ntop(k - 1), ntop(k)
        m = np.zeros((x1 + t1 + b1, x + t + b), dtype=np.int64)
        m[:x1, :x] = X.diff(k)
        m[x1 + t1:, x:x + t] = np.eye(t, dtype=np.int64)
        d[k] = m
        tau[k] = np.eye(x + t + b, x, dtype=np.int64)
        back[k] = np.eye(x, x + t + b, dtype=np.int64)
        parts = [f.mat(k)]
        if t:
            parts.append(tops[k])
        if b:
            parts.append(_fp.matmul(Y.diff(k + 1), tops[k + 1], p))
        pbar[k] = (np.concatenate(parts, axis=1) if Y.dim(k) else np.zeros((0, x + t + b), dtype=np.int64)) % p
    Z = ChainComplex(dims, d, p=p, check=False)
    return Factorization(f, Z, ChainMap(X, Z, tau, check=False), ChainMap(Z, Y, pbar, check=False),
                         ChainMap(Z, X, back, check=False), kind="minimal")


FACTORIZATIONS = {"cocylinder": factor_acof_fib, "minimal": factor_minimal}


def factorization_map(fa, fb, u, v):
    """Z(fa) -> Z(fb) induced by a commuting square fb u = v fa.

    Block-diagonal between cocylinders; otherwise a lift against fb.pbar.
    """
    if compose(fb.f, u) != compose(v, fa.f):
        raise ChainError("square does not commute")
    if fa.kind != "cocylinder" or fb.kind != "cocylinder":
        return lift(fa.tau, fb.pbar, compose(fb.tau, u), compose(v, fa.pbar))
    mats = {}
    for n in fa.obj.dims:
        mats[n] = _block_diag([u.mat(n), v.mat(n), v.mat(n + 1)])
    return ChainMap(fa.obj, fb.obj, mats, check=False)


# -- homotopies, splittings, lifting, homotopy inverses --------------------------

class ChainHomotopy:
    """h_k : X_k -> Y_{k+1} with d h + h d = f - g."""

    def __init__(self, f, g, h):
        self.f, self.g = f, g
        X, Y = f.source, f.target
        self.h = {}
        for k, m in h.items():
            m = _arr(m) % f.p
            if m.size and m.any():
                if m.shape != (Y.dim(k + 1), X.dim(k)):
                    raise ChainError("homotopy block has the wrong shape")
                self.h[int(k)] = m

    def mat(self, k):
        m = self.h.get(k)
        if m is None:
            return np.zeros((self.f.target.dim(k + 1), self.f.source.dim(k)), dtype=np.int64)
        return m

    def check(self):
        f, g = self.f, self.g
        X, Y, p = f.source, f.target, f.p
        for k in sorted(set(X.dims) | set(Y.dims)):
            lhs = (_fp.matmul(Y.diff(k + 1), self.mat(k), p) + _fp.matmul(self.mat(k - 1), X.diff(k), p)) % p
            if not np.array_equal(lhs, (f.mat(k) - g.mat(k)) % p):
                return False
        return True

    def is_zero(self):
        return not self.h


def zero_homotopy(f, g):
    return ChainHomotopy(f, g, {})


@dataclass
class Splitting:
    """X = H + B + C with i: H -> X, proj: X -> H and id - i proj = dh + hd."""
    X: ChainComplex
    H: ChainComplex
    incl: ChainMap
    proj: ChainMap
    h: dict


def splitting(X):
    p = X.p
    cbasis, piv_of = {}, {}
    for n in X.degrees() + [X.hi + 1]:
        _, piv = _fp.rref(X.diff(n), p) if X.diff(n).size else (None, np.zeros(0, dtype=np.int64))
        piv_of[n] = piv
    Hb, Bb, Cb = {}, {}, {}
    for n in X.degrees():
        dim = X.dim(n)
        C = np.zeros((dim, piv_of[n].size), dtype=np.int64)
        C[piv_of[n], np.arange(piv_of[n].size)] = 1
        piv_in = piv_of.get(n + 1, np.zeros(0, dtype=np.int64))
        B = X.diff(n + 1)[:, piv_in] if piv_in.size else np.zeros((dim, 0), dtype=np.int64)
        K, free = _fp.nullspace(X.diff(n), p) if X.diff(n).shape[0] else (np.eye(dim, dtype=np.int64), np.arange(dim))
        Bk = B[free] if B.size else np.zeros((free.size, 0), dtype=np.int64)
        _, piv_b = _fp.row_space_basis(Bk.T, p) if Bk.shape[1] else (None, np.zeros(0, dtype=np.int64))
        keep = np.setdiff1d(np.arange(free.size), piv_b)
        Hb[n], Bb[n], Cb[n] = K[:, keep], B, C
    Hdims = {n: Hb[n].shape[1] for n in Hb}
    H = ChainComplex(Hdims, {}, p=p, check=False)
    incl, proj, hmats = {}, {}, {}
    Minv = {}
    for n in X.degrees():
        M = np.concatenate([Hb[n], Bb[n], Cb[n]], axis=1)
        Mi = _fp.inverse(M, p)
        if Mi is None:
            raise ChainError("internal: splitting basis is singular")
        Minv[n] = Mi
        incl[n] = Hb[n]
        proj[n] = Mi[:Hb[n].shape[1]]
    for n in X.degrees():
        # h : X_{n-1} -> X_n sends d(c_j) to c_j
        if n - 1 in Minv:
            hb, bb = Hb[n - 1].shape[1], Bb[n - 1].shape[1]
            rows = Minv[n - 1][hb:hb + bb]
            hm = _fp.matmul(Cb[n], rows, p) if Cb[n].shape[1] == bb else None
            if hm is None:
                raise ChainError("internal: boundary/complement mismatch")
            hmats[n - 1] = hm
    return Splitting(X, H, ChainMap(H, X, incl, check=False), ChainMap(X, H, proj, check=False), hmats)


def inverse_map(f):
    mats = {}
    for k in f.degrees():
        inv = _fp.inverse(f.mat(k), f.p)
        if inv is None:
            raise ChainError("map is not invertible")
        mats[k] = inv
    return ChainMap(f.target, f.source, mats, check=False)


def _hmat(h, k, rows, cols):
    m = h.get(k)
    return m if m is not None else np.zeros((rows, cols), dtype=np.int64)


def homotopy_inverse(w):
    """(g, H1, H2) with H1: g w ~ id_X and H2: w g ~ id_Y."""
    if not is_quasi_iso(w):
        raise ChainError("not a quasi-isomorphism")
    X, Y, p = w.source, w.target, w.p
    if is_iso(w):
        g = inverse_map(w)
        return g, zero_homotopy(compose(g, w), identity(X)), zero_homotopy(compose(w, g), identity(Y))
    sx, sy = splitting(X), splitting(Y)
    wstar = compose_all(sy.proj, w, sx.incl)
    winv = inverse_map(wstar)
    g = compose_all(sx.incl, winv, sy.proj)
    h1, h2 = {}, {}
    for k in sorted(set(X.dims) | {k - 1 for k in X.dims}):
        hx = _hmat(sx.h, k, X.dim(k + 1), X.dim(k))
        K = _fp.matmul(sy.proj.mat(k + 1), _fp.matmul(w.mat(k + 1), hx, p), p)
        t = _fp.matmul(sx.incl.mat(k + 1), _fp.matmul(winv.mat(k + 1), K, p), p)
        h1[k] = (t - hx) % p
    for k in sorted(set(Y.dims) | {k - 1 for k in Y.dims}):
        hy = _hmat(sy.h, k, Y.dim(k + 1), Y.dim(k))
        wi = _fp.matmul(w.mat(k), _fp.matmul(sx.incl.mat(k), _fp.matmul(winv.mat(k), sy.proj.mat(k), p), p), p)
        M = _fp.matmul(_hmat(sy.h, k, Y.dim(k + 1), Y.dim(k)), wi, p)
        h2[k] = (M - hy) % p
    H1 = ChainHomotopy(compose(g, w), identity(X), h1)
    H2 = ChainHomotopy(compose(w, g), identity(Y), h2)
    return g, H1, H2


class LiftError(ChainError):
    pass


def disk_basis(Q):
    """For an acyclic Q: generators e (per degree) with Q_n = span(e_n) + d(span e_{n+1})."""
    p = Q.p
    gens = {}
    for n in Q.degrees():
        dn = Q.diff(n)
        piv = _fp.rref(dn, p)[1] if dn.size else np.zeros(0, dtype=np.int64)
        G = np.zeros((Q.dim(n), piv.size), dtype=np.int64)
        G[piv, np.arange(piv.size)] = 1
        gens[n] = G
    return gens


def lift(i, p_, top, bottom):
    """Diagonal h: B -> X with h i = top and p h = bottom.

    i: A -> B an acyclic cofibration, p: X -> Y a fibration, square commuting.
    """
    P = i.p
    if not is_injective(i) or not is_quasi_iso(i):
        raise LiftError("left map is not an acyclic cofibration")
    if not is_surjective(p_):
        raise LiftError("right map is not a fibration")
    if compose(p_, top) != compose(bottom, i):
        raise LiftError("square does not commute")
    A, B, X = i.source, i.target, p_.source
    quot = Quotient(i)
    Q = quot.obj
    if not is_acyclic(Q):
        raise LiftError("cokernel is not acyclic")
    gens = disk_basis(Q)
    lifted = {}
    for n, G in gens.items():
        if G.shape[1] == 0:
            continue
        b = _fp.solve(quot.q.mat(n), G, P)
        lifted[n] = b
    lift_x = {}
    for n, b in lifted.items():
        rhs = _fp.matmul(bottom.mat(n), b, P)
        x = _fp.solve(p_.mat(n), rhs, P)
        if x is None:
            raise LiftError("no preimage under the fibration")
        lift_x[n] = x
    mats = {}
    for n in B.dims:
        cols_basis = [i.mat(n)]
        cols_val = [top.mat(n)]
        if n in lifted:
            cols_basis.append(lifted[n])
            cols_val.append(lift_x[n])
        if n + 1 in lifted:
            cols_basis.append(_fp.matmul(B.diff(n + 1), lifted[n + 1], P))
            cols_val.append(_fp.matmul(X.diff(n + 1), lift_x[n + 1], P))
        basis = np.concatenate(cols_basis, axis=1)
        vals = np.concatenate(cols_val, axis=1)
        binv = _fp.inverse(basis, P)
        if binv is None:
            raise LiftError("internal: disk basis does not span")
        mats[n] = _fp.matmul(vals, binv, P)
    h = ChainMap(B, X, mats, check=False)
    if not h.is_chain_map() or compose(h, i) != top or compose(p_, h) != bottom:
        raise LiftError("internal: lift failed verification")
    return h


# -- serialisation -------------------------------------------------------------

def complex_to_json(X):
    return {"p": X.p, "dims": {str(k): v for k, v in X.dims.items()},
            "d": {str(k): X.diff(k).tolist() for k in sorted(X._d)}}


def complex_from_json(obj, p=None):
    if not isinstance(obj, dict) or "dims" not in obj:
        raise ChainError("complex: missing 'dims'")
    pp = int(obj.get("p", p or 2))
    if p is not None and pp != p:
        raise ChainError(f"complex: prime {pp} differs from {p}")
    if not _fp.is_prime(pp):
        raise ChainError(f"complex: {pp} is not prime")
    dims = {int(k): int(v) for k, v in obj["dims"].items()}
    d = {}
    for k, m in obj.get("d", {}).items():
        a = np.asarray(m, dtype=np.int64)
        if a.size and (a.min() < 0 or a.max() >= pp):
            raise ChainError(f"complex: d.{k} has an entry outside [0, {pp})")
        d[int(k)] = a
    return ChainComplex(dims, d, p=pp)


def map_to_json(f):
    return {"mats": {str(k): f.mat(k).tolist() for k in f.degrees() if f.mat(k).size}}


def map_from_json(obj, src, tgt):
    mats = {}
    for k, m in obj.get("mats", {}).items():
        a = np.asarray(m, dtype=np.int64)
        if a.size and (a.min() < 0 or a.max() >= src.p):
            raise ChainError(f"map: degree {k} has an entry outside [0, {src.p})")
        mats[int(k)] = a.reshape(tgt.dim(int(k)), src.dim(int(k))) if a.size == 0 else a
    return ChainMap(src, tgt, mats)
