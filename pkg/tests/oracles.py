"""Slow, obviously-correct reference computations used only by the tests."""
from itertools import product


def rank_mod_p(rows, p):
    """Gaussian elimination on Python lists."""
    m = [[int(x) % p for x in r] for r in rows]
    rank, col = 0, 0
    ncols = len(m[0]) if m else 0
    while rank < len(m) and col < ncols:
        piv = next((i for i in range(rank, len(m)) if m[i][col]), None)
        if piv is None:
            col += 1
            continue
        m[rank], m[piv] = m[piv], m[rank]
        inv = pow(m[rank][col], p - 2, p)
        m[rank] = [x * inv % p for x in m[rank]]
        for i in range(len(m)):
            if i != rank and m[i][col]:
                f = m[i][col]
                m[i] = [(a - f * b) % p for a, b in zip(m[i], m[rank])]
        rank += 1
        col += 1
    return rank, m


def kernel_vectors(rows, ncols, p):
    """Every vector v with rows @ v = 0, by enumeration (tiny sizes only)."""
    out = []
    for v in product(range(p), repeat=ncols):
        if all(sum(a * b for a, b in zip(r, v)) % p == 0 for r in rows):
            out.append(v)
    return out


def betti(dims, diffs, p):
    """Homology dimensions from ranks: dim C_k - rank d_k - rank d_{k+1}."""
    def rk(k):
        m = diffs.get(k)
        if m is None or len(m) == 0 or len(m[0]) == 0:
            return 0
        return rank_mod_p(m, p)[0]
    return {k: n - rk(k) - rk(k + 1) for k, n in dims.items() if n - rk(k) - rk(k + 1)}


def monotone_compose(outer, inner):
    return tuple(outer[x] for x in inner)


def coface_tuple(i, n):
    """d^i : [n] -> [n+1] as a tuple."""
    return tuple(x if x < i else x + 1 for x in range(n + 1))


def codegeneracy_tuple(j, n):
    """s^j : [n+1] -> [n]."""
    return tuple(x if x <= j else x - 1 for x in range(n + 2))


def all_chains(elements, leq):
    """Nonempty chains of a finite poset by brute force over subsets."""
    els = list(elements)
    count = 0
    for mask in range(1, 1 << len(els)):
        sub = [els[i] for i in range(len(els)) if mask >> i & 1]
        if all(leq(a, b) or leq(b, a) for a in sub for b in sub):
            count += 1
    return count

