"""Finite simplicial complexes, subdivision, stars, and the prism on a complex.

Simplices are stored as increasing tuples of vertex *indices*; the vertex
list fixes both the labels and the total order used throughout.
"""
from itertools import combinations, permutations

from .poset import Poset, sort_key


class ComplexError(ValueError):
    pass


class SimplicialComplex:
    def __init__(self, vertices, facets):
        self.vertices = list(vertices)
        if len(set(map(_hashable, self.vertices))) != len(self.vertices):
            raise ComplexError("repeated vertex label")
        self.index = {_hashable(v): i for i, v in enumerate(self.vertices)}
        raw = []
        for f in facets:
            try:
                idx = sorted(self.index[_hashable(v)] for v in f)
            except KeyError as exc:
                raise ComplexError(f"facet {f!r} uses an unknown vertex") from exc
            if not idx or len(set(idx)) != len(idx):
                raise ComplexError(f"facet {f!r} is empty or repeats a vertex")
            raw.append(tuple(idx))
        seen = set((i,) for i in range(len(self.vertices)))
        for f in raw:
            for k in range(1, len(f) + 1):
                seen.update(combinations(f, k))
        self._simplices = tuple(sorted(seen, key=sort_key))
        self._set = frozenset(self._simplices)
        self.facets = tuple(s for s in self._simplices
                            if not any(len(t) == len(s) + 1 and set(s) < set(t) for t in self._simplices))

    @classmethod
    def simplex(cls, n):
        return cls(range(n + 1), [tuple(range(n + 1))])

    @classmethod
    def boundary(cls, n):
        full = tuple(range(n + 1))
        return cls(range(n + 1), [tuple(x for x in full if x != i) for i in full])

    @property
    def dim(self):
        return max(len(s) for s in self._simplices) - 1 if self._simplices else -1

    def simplices(self, k=None):
        if k is None:
            return list(self._simplices)
        return [s for s in self._simplices if len(s) == k + 1]

    def is_simplex(self, s):
        return tuple(sorted(s)) in self._set and len(set(s)) == len(s)

    def label(self, s):
        return tuple(self.vertices[i] for i in s)

    def __len__(self):
        return len(self._simplices)

    def __eq__(self, other):
        return isinstance(other, SimplicialComplex) and self.vertices == other.vertices and self._set == other._set

    def __hash__(self):
        return hash(self._set)

    def __repr__(self):
        return f"SimplicialComplex({len(self.vertices)} vertices, {len(self.facets)} facets)"


def _hashable(v):
    if isinstance(v, list):
        return tuple(_hashable(x) for x in v)
    return v


def _jsonable(v):
    if isinstance(v, tuple):
        return [_jsonable(x) for x in v]
    return v


def complex_to_json(K):
    return {"vertices": [_jsonable(v) for v in K.vertices],
            "facets": [[_jsonable(K.vertices[i]) for i in f] for f in K.facets]}


def complex_from_json(obj):
    if not isinstance(obj, dict) or "vertices" not in obj or "facets" not in obj:
        raise ComplexError("complex: need 'vertices' and 'facets'")
    return SimplicialComplex([_hashable(v) for v in obj["vertices"]], obj["facets"])


def face_poset(K):
    """Simplices of K ordered by the face relation."""
    simp = K.simplices()
    rel = [(s[:j] + s[j + 1:], s) for s in simp if len(s) > 1 for j in range(len(s))]
    return Poset(simp, rel)


def _chains_through(simplex):
    """Maximal flags of faces of a simplex, as tuples of faces ordered by inclusion."""
    out = []
    for perm in permutations(simplex):
        out.append(tuple(tuple(sorted(perm[:k])) for k in range(1, len(perm) + 1)))
    return out


def barycentric_subdivide(K):
    """Vertices are the simplices of K (labelled by their vertex labels); facets are maximal flags."""
    simp = K.simplices()
    labels = [K.label(s) for s in simp]
    facets = set()
    for f in K.facets:
        for flag in _chains_through(f):
            facets.add(tuple(K.label(s) for s in flag))
    return SimplicialComplex(labels, sorted(facets, key=lambda fl: [simp.index(tuple(K.index[_hashable(v)] for v in s)) for s in fl]))


def count_chains(P):
    """Number of nonempty chains of a poset, by brute force."""
    total = 0

    def extend(last, depth):
        nonlocal total
        for y in P.up_set(last, strict=True):
            total += 1
            extend(y, depth + 1)

    for x in P.elements:
        total += 1
        extend(x, 1)
    return total


class StarPoset:
    """The poset of open stars with their double-subdivision data.

    ``poset`` is literally the face poset of K; ``annotation(sigma)`` lists
    the simplices of sd(sd(K)) that meet sd(sd(sigma)).
    """

    def __init__(self, K):
        self.complex = K
        self.poset = face_poset(K)
        self._sd2 = None
        self._ann = {}

    def _second(self):
        if self._sd2 is None:
            self._sd2 = barycentric_subdivide(barycentric_subdivide(self.complex))
        return self._sd2

    def annotation(self, sigma):
        sigma = tuple(sigma)
        if sigma not in self._ann:
            K = self.complex
            sd2 = self._second()
            faces = {K.label(t) for t in self.poset.down_set(sigma)}
            # a vertex of sd2 is a flag of simplices of K; it lies in sd2(sigma) when every entry does
            inside = {i for i, v in enumerate(sd2.vertices) if all(s in faces for s in v)}
            self._ann[sigma] = frozenset(s for s in sd2.simplices() if inside.intersection(s))
        return self._ann[sigma]

    def open_star_order_ok(self):
        """Containment of the annotations reproduces the face order."""
        P = self.poset
        for a in P.elements:
            for b in P.elements:
                if (self.annotation(a) <= self.annotation(b)) != P.leq(a, b):
                    return False
        return True


def star_poset(K):
    return StarPoset(K)


class SimplicialSetPresentation:
    """The simplicial set of an ordered complex.

    An n-simplex is a nondecreasing sequence of n + 1 vertex indices whose
    underlying set is a simplex of K.  Its normal form is the pair
    (distinct vertices, surjection [n] -> [m]).
    """

    def __init__(self, K):
        self.complex = K
        self.nondegenerate = {}
        for s in K.simplices():
            self.nondegenerate.setdefault(len(s) - 1, []).append(s)

    def simplices(self, n):
        out = []
        for base in self.complex.simplices():
            m = len(base) - 1
            if m > n:
                continue
            for theta in surjections(n, m):
                out.append(tuple(base[t] for t in theta))
        return sorted(out)

    @staticmethod
    def face(x, i):
        if not 0 <= i < len(x) or len(x) < 2:
            raise ComplexError("face index out of range")
        return x[:i] + x[i + 1:]

    @staticmethod
    def degeneracy(x, j):
        if not 0 <= j < len(x):
            raise ComplexError("degeneracy index out of range")
        return x[:j + 1] + x[j:]

    @staticmethod
    def normal_form(x):
        base = tuple(sorted(set(x)))
        return base, tuple(base.index(v) for v in x)

    @staticmethod
    def from_normal_form(base, theta):
        return tuple(base[t] for t in theta)

    def is_nondegenerate(self, x):
        return len(set(x)) == len(x)

    def identity_failures(self, max_dim):
        """Exhaustively check the simplicial identities up to dimension ``max_dim``."""
        bad = []
        d, s = self.face, self.degeneracy
        for n in range(1, max_dim + 1):
            for x in self.simplices(n):
                for i in range(n + 1):
                    for j in range(i + 1, n + 1):
                        if n >= 2 and d(d(x, j), i) != d(d(x, i), j - 1):
                            bad.append(("dd", x, i, j))
        for n in range(0, max_dim):
            for x in self.simplices(n):
                for i in range(n + 1):
                    for j in range(i, n + 1):
                        if s(s(x, j), i) != s(s(x, i), j + 1):
                            bad.append(("ss", x, i, j))
                for j in range(n + 1):
                    y = s(x, j)
                    for i in range(n + 2):
                        if i < j:
                            ok = n >= 1 and d(y, i) == s(d(x, i), j - 1)
                        elif i in (j, j + 1):
                            ok = d(y, i) == x
                        else:
                            ok = n >= 1 and d(y, i) == s(d(x, i - 1), j)
                        if not ok and not (n == 0 and i not in (j, j + 1)):
                            bad.append(("ds", x, i, j))
        return bad


def surjections(n, m):
    """Monotone surjections [n] -> [m] as tuples."""
    if m > n or m < 0:
        return []
    out = []
    for cuts in combinations(range(1, n + 1), m):
        theta, level, c = [], 0, set(cuts)
        for a in range(n + 1):
            if a in c:
                level += 1
            theta.append(level)
        out.append(tuple(theta))
    return out


def triangulation_simplicial_set(K):
    return SimplicialSetPresentation(K)


# -- prisms --------------------------------------------------------------------

def prism_decomposition(n):
    """The n + 1 top simplices of Delta^n x I, as lists of (vertex, level)."""
    if n < 0:
        raise ComplexError("n must be non-negative")
    out = []
    for i in range(n + 1):
        c = n - i
        out.append([(a, 0) for a in range(c + 1)] + [(a, 1) for a in range(c, n + 1)])
    return out


def phi_map(i, kind, lam, n, K=None):
    """Send a simplex of T (inside Delta^n) into the i-th prism simplex.

    With c = n - i: kind B keeps level-0 copies of vertices <= c and level-1
    copies of vertices >= c; L drops (c, 1) and U drops (c, 0) when c is a
    vertex of ``lam``.
    """
    lam = tuple(sorted(lam))
    if not lam or lam[0] < 0 or lam[-1] > n or len(set(lam)) != len(lam):
        raise ComplexError(f"{lam!r} is not a simplex of Delta^{n}")
    if K is not None and not K.is_simplex(lam):
        raise ComplexError(f"{lam!r} is not a simplex of the complex")
    if not 0 <= i <= n:
        raise ComplexError("prism index out of range")
    c = n - i
    if kind == "B":
        low, high = [a for a in lam if a <= c], [a for a in lam if a >= c]
    elif kind == "L":
        low, high = [a for a in lam if a <= c], [a for a in lam if a > c]
    elif kind == "U":
        low, high = [a for a in lam if a < c], [a for a in lam if a >= c]
    else:
        raise ComplexError(f"unknown kind {kind!r}")
    return tuple([(a, 0) for a in low] + [(a, 1) for a in high])


def barycenter_label(sigma):
    """(vertex word, level word) of a prism simplex."""
    sigma = list(sigma)
    return tuple(v for v, _ in sigma), tuple(t for _, t in sigma)


def product_with_interval(K):
    """K x I as an ordered complex on pairs (i, t), i a vertex index of K.

    Simplices are chains in the product order whose projection is a simplex
    of K.  Vertex order is lexicographic in (i, t).
    """
    verts = [(i, t) for i in range(len(K.vertices)) for t in (0, 1)]
    facets = []
    for f in K.facets:
        m = len(f) - 1
        for c in range(m + 1):
            facets.append([(f[a], 0) for a in range(c + 1)] + [(f[a], 1) for a in range(c, m + 1)])
    return SimplicialComplex(verts, facets)


def product_chains(K):
    """Nondegenerate simplices of K x Delta[1] as (vertex word, level word)."""
    KI = product_with_interval(K)
    out = []
    for s in KI.simplices():
        pts = [KI.vertices[j] for j in s]
        out.append(barycenter_label(pts))
    return out
