"""Finite posets, the cosimplicial family of subset posets, boundaries and horns."""
from itertools import combinations


def sort_key(x):
    if isinstance(x, tuple):
        return (len(x), x)
    return (0, x)


class Poset:
    """A finite poset.

    ``leq`` may be any set of pairs; it is closed reflexively and
    transitively and then checked for antisymmetry.  Covers are always
    recomputed from the order.
    """

    def __init__(self, elements, leq=(), order_fn=None):
        els = sorted(set(elements), key=sort_key)
        self.elements = tuple(els)
        self.index = {x: i for i, x in enumerate(self.elements)}
        if order_fn is not None:
            up = {x: {y for y in els if order_fn(x, y)} | {x} for x in els}
        else:
            up = {x: {x} for x in els}
            for a, b in leq:
                if a not in self.index or b not in self.index:
                    raise ValueError(f"relation ({a!r}, {b!r}) mentions an unknown element")
                up[a].add(b)
            changed = True
            while changed:
                changed = False
                for x in els:
                    new = set(up[x])
                    for y in up[x]:
                        new |= up[y]
                    if new != up[x]:
                        up[x] = new
                        changed = True
        for x in els:
            for y in up[x]:
                if y != x and x in up[y]:
                    raise ValueError(f"not antisymmetric: {x!r} and {y!r}")
        self._up = {x: frozenset(s) for x, s in up.items()}
        down = {x: set() for x in els}
        for x in els:
            for y in self._up[x]:
                down[y].add(x)
        self._down = {x: frozenset(s) for x, s in down.items()}
        covers = []
        for b in els:
            strict = [a for a in self._down[b] if a != b]
            for a in strict:
                if not any(a in self._down[c] and c != a for c in strict if c != a):
                    covers.append((a, b))
        self.covers = tuple(sorted(covers, key=lambda ab: (sort_key(ab[1]), sort_key(ab[0]))))
        self._lower_covers = {x: [] for x in els}
        self._upper_covers = {x: [] for x in els}
        for a, b in self.covers:
            self._lower_covers[b].append(a)
            self._upper_covers[a].append(b)
        self._height = {}
        for x in sorted(els, key=lambda e: len(self._down[e])):
            lc = self._lower_covers[x]
            self._height[x] = 1 + max((self._height[a] for a in lc), default=-1)

    def __len__(self):
        return len(self.elements)

    def __contains__(self, x):
        return x in self.index

    def __iter__(self):
        return iter(self.elements)

    def __eq__(self, other):
        return isinstance(other, Poset) and self.elements == other.elements and self._up == other._up

    def __hash__(self):
        return hash((self.elements, len(self.covers)))

    def __repr__(self):
        return f"Poset({len(self.elements)} elements, {len(self.covers)} covers)"

    def leq(self, a, b):
        return b in self._up[a]

    def relations(self):
        return [(a, b) for a in self.elements for b in sorted(self._up[a], key=sort_key)]

    def down_set(self, x, strict=False):
        s = self._down[x]
        return s - {x} if strict else s

    def up_set(self, x, strict=False):
        s = self._up[x]
        return s - {x} if strict else s

    def lower_covers(self, x):
        return list(self._lower_covers[x])

    def upper_covers(self, x):
        return list(self._upper_covers[x])

    def height(self, x):
        return self._height[x]

    def by_height(self):
        return sorted(self.elements, key=lambda e: (self._height[e], sort_key(e)))

    def maximal(self, subset=None):
        s = set(self.elements if subset is None else subset)
        return sorted((x for x in s if not (self._up[x] - {x}) & s), key=sort_key)

    def subposet(self, subset):
        sub = [x for x in self.elements if x in set(subset)]
        return Poset(sub, [(a, b) for a in sub for b in sub if self.leq(a, b)])

    def is_down_closed(self, subset):
        s = set(subset)
        return all(self._down[x] <= s for x in s)

    def transitive_reduction_ok(self):
        """Covers are exactly the relations not implied by composition."""
        for a, b in self.relations():
            if a == b:
                continue
            between = [c for c in self.elements if c not in (a, b) and self.leq(a, c) and self.leq(c, b)]
            if ((a, b) in set(self.covers)) == bool(between):
                return False
        return True


class PosetMap:
    """An order-preserving map given by an element assignment."""

    def __init__(self, source, target, assignment):
        self.source = source
        self.target = target
        self.assignment = dict(assignment)
        for x in source:
            if self.assignment.get(x) not in target:
                raise ValueError(f"{x!r} is not sent into the target")

    def __call__(self, x):
        return self.assignment[x]

    def __eq__(self, other):
        return (isinstance(other, PosetMap) and self.source == other.source
                and self.target == other.target and self.assignment == other.assignment)

    def compose(self, inner):
        """self o inner."""
        return PosetMap(inner.source, self.target, {x: self(inner(x)) for x in inner.source})

    def is_order_preserving(self):
        return all(self.target.leq(self(a), self(b)) for a, b in self.source.relations())

    def is_injective(self):
        return len(set(self.assignment.values())) == len(self.assignment)

    def is_surjective(self):
        return set(self.assignment.values()) == set(self.target.elements)


def subsets(n):
    """Nonempty subsets of [n] = {0..n} as increasing tuples."""
    return [c for k in range(1, n + 2) for c in combinations(range(n + 1), k)]


def _subset_poset(els):
    return Poset(els, order_fn=lambda a, b: set(a) <= set(b))


_DT = {}


def delta_tilde(n):
    if n < 0:
        raise ValueError("n must be non-negative")
    if n not in _DT:
        _DT[n] = _subset_poset(subsets(n))
    return _DT[n]


def coface_index(i, x):
    return x if x < i else x + 1


def codegeneracy_index(k, x):
    return x if x <= k else x - 1


def coface(i, n):
    """The map Delta~^n -> Delta~^{n+1} induced by the injection skipping i."""
    if not 0 <= i <= n + 1:
        raise ValueError(f"coface index {i} out of range for n={n}")
    src, tgt = delta_tilde(n), delta_tilde(n + 1)
    return PosetMap(src, tgt, {a: tuple(coface_index(i, x) for x in a) for a in src})


def codegeneracy(k, n):
    """The map Delta~^{n+1} -> Delta~^n induced by the surjection collapsing k, k+1."""
    if not 0 <= k <= n:
        raise ValueError(f"codegeneracy index {k} out of range for n={n}")
    src, tgt = delta_tilde(n + 1), delta_tilde(n)
    return PosetMap(src, tgt, {a: tuple(sorted({codegeneracy_index(k, x) for x in a})) for a in src})


def simplex_map(func, n, m):
    """Delta~^n -> Delta~^m induced by a monotone map func: [n] -> [m] (given as a tuple)."""
    src, tgt = delta_tilde(n), delta_tilde(m)
    return PosetMap(src, tgt, {a: tuple(sorted({func[x] for x in a})) for a in src})


def boundary_poset(n):
    if n < 1:
        raise ValueError("the boundary of Delta~^0 is empty")
    full = tuple(range(n + 1))
    return _subset_poset([a for a in subsets(n) if a != full])


def horn_poset(n, k):
    if n < 1 or not 0 <= k <= n:
        raise ValueError(f"horn ({n}, {k}) out of range")
    full = tuple(range(n + 1))
    opp = tuple(x for x in full if x != k)
    return _subset_poset([a for a in subsets(n) if a not in (full, opp)])


def face_subposet(n, i):
    """The i-th face of Delta~^n: subsets avoiding i."""
    return _subset_poset([a for a in subsets(n) if i not in a])


def comma_below(P, S, x):
    if x not in P:
        raise ValueError(f"{x!r} is not an element")
    s = set(S.elements if isinstance(S, Poset) else S)
    return P.subposet([y for y in P.down_set(x) if y in s])


def is_connected(P):
    if len(P) == 0:
        return True
    seen = {P.elements[0]}
    stack = [P.elements[0]]
    while stack:
        x = stack.pop()
        for y in P.up_set(x) | P.down_set(x):
            if y not in seen:
                seen.add(y)
                stack.append(y)
    return len(seen) == len(P)


def decompose_inclusion(a, b):
    """Write a subset inclusion a <= b as a sequence of generator deletions.

    Returns the list of (removed element, intermediate set) steps, removing
    larger elements first.  Debugging aid only.
    """
    if not set(a) <= set(b):
        raise ValueError("not an inclusion")
    steps = []
    cur = tuple(b)
    for x in sorted(set(b) - set(a), reverse=True):
        i = cur.index(x)
        cur = cur[:i] + cur[i + 1:]
        steps.append((i, cur))
    return steps


def poset_to_json(P):
    return {"elements": [list(x) if isinstance(x, tuple) else x for x in P.elements],
            "leq": [[_j(a), _j(b)] for a, b in P.relations()]}


def _j(x):
    if isinstance(x, tuple):
        return [_j(y) for y in x]
    return x


def _t(x):
    if isinstance(x, list):
        return tuple(_t(y) for y in x)
    return x


def poset_from_json(obj):
    if not isinstance(obj, dict) or "elements" not in obj:
        raise ValueError("poset: missing 'elements'")
    els = [_t(e) for e in obj["elements"]]
    rel = [(_t(a), _t(b)) for a, b in obj.get("leq", [])]
    return Poset(els, rel)
