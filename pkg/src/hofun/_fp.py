"""Exact linear algebra over the prime field F_p.

Two interchangeable backends compute the reduced row echelon form:
a numba kernel and a vectorised numpy routine.  Everything else
(rank, nullspace, solve, inverse) is derived from it.

Set ``HOFUN_BACKEND=numpy`` (or ``HOFUN_NO_NUMBA=1``) to force the numpy
route.  The default is numba whenever it imports.
"""
import os

import numpy as np

try:
    from numba import njit

    NUMBA_AVAILABLE = True
except ImportError:  # pragma: no cover
    NUMBA_AVAILABLE = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]):
            return args[0]
        return lambda f: f


def _pick_backend():
    if os.environ.get("HOFUN_NO_NUMBA", "").strip() not in ("", "0"):
        return "numpy"
    name = os.environ.get("HOFUN_BACKEND", "").strip().lower()
    if name == "numpy":
        return "numpy"
    if name == "numba" and not NUMBA_AVAILABLE:
        raise RuntimeError("HOFUN_BACKEND=numba but numba is not importable")
    return "numba" if NUMBA_AVAILABLE else "numpy"


BACKEND = _pick_backend()

_INV_CACHE = {}


def inverse_table(p):
    """Multiplicative inverses mod p, index 0 unused."""
    t = _INV_CACHE.get(p)
    if t is None:
        t = np.zeros(p, dtype=np.int64)
        for a in range(1, p):
            t[a] = pow(a, p - 2, p)
        _INV_CACHE[p] = t
    return t


def is_prime(p):
    if not isinstance(p, (int, np.integer)) or p < 2:
        return False
    k = 2
    while k * k <= p:
        if p % k == 0:
            return False
        k += 1
    return True


@njit(cache=True)
def _rref_numba(a, p, inv):
    m, n = a.shape
    r = a.copy()
    piv = np.empty(min(m, n), dtype=np.int64)
    row = 0
    for c in range(n):
        if row == m:
            break
        k = -1
        for i in range(row, m):
            if r[i, c] != 0:
                k = i
                break
        if k < 0:
            continue
        if k != row:
            for j in range(c, n):
                t = r[row, j]
                r[row, j] = r[k, j]
                r[k, j] = t
        s = inv[r[row, c]]
        if s != 1:
            for j in range(c, n):
                r[row, j] = (r[row, j] * s) % p
        for i in range(m):
            if i != row:
                f = r[i, c]
                if f != 0:
                    for j in range(c, n):
                        r[i, j] = (r[i, j] - f * r[row, j]) % p
        piv[row] = c
        row += 1
    return r, piv[:row].copy()


def _rref_numpy(a, p, inv):
    r = a.copy()
    m, n = r.shape
    pivots = []
    row = 0
    for c in range(n):
        if row == m:
            break
        nz = np.flatnonzero(r[row:, c])
        if nz.size == 0:
            continue
        k = row + nz[0]
        if k != row:
            r[[row, k]] = r[[k, row]]
        s = inv[r[row, c]]
        if s != 1:
            r[row] = (r[row] * s) % p
        f = r[:, c].copy()
        f[row] = 0
        hit = np.flatnonzero(f)
        if hit.size:
            r[hit] = (r[hit] - np.outer(f[hit], r[row])) % p
        pivots.append(c)
        row += 1
    return r, np.array(pivots, dtype=np.int64)


def rref(a, p, backend=None):
    """Reduced row echelon form of ``a`` mod p.

    Returns
    -------
    (R, pivots)
        R has the same shape as ``a``; pivots lists pivot columns in order.
    """
    a = np.ascontiguousarray(np.asarray(a, dtype=np.int64) % p)
    if a.size == 0:
        return a.copy(), np.zeros(0, dtype=np.int64)
    inv = inverse_table(p)
    b = backend or BACKEND
    if b == "numba":
        return _rref_numba(a, np.int64(p), inv)
    return _rref_numpy(a, p, inv)


def matmul(a, b, p):
    """Product mod p.  Uses float64 BLAS when it is exact."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape[1] == 0 or a.shape[0] == 0 or b.shape[1] == 0:
        return np.zeros((a.shape[0], b.shape[1]), dtype=np.int64)
    if a.shape[1] * (p - 1) ** 2 < 2 ** 52:
        c = a.astype(np.float64) @ b.astype(np.float64)
        return (np.rint(c).astype(np.int64)) % p
    return (a.astype(object) @ b.astype(object) % p).astype(np.int64)


def rank(a, p):
    a = np.asarray(a)
    if a.size == 0:
        return 0
    return int(rref(a, p)[1].size)


def nullspace(a, p):
    """Canonical basis of ker(a) as columns.

    Column j has a 1 in the j-th free coordinate and 0 in the other
    free coordinates, so a kernel vector v equals N @ v[free].
    """
    a = np.asarray(a, dtype=np.int64)
    m, n = a.shape
    if n == 0:
        return np.zeros((0, 0), dtype=np.int64), np.zeros(0, dtype=np.int64)
    if m == 0:
        return np.eye(n, dtype=np.int64), np.arange(n, dtype=np.int64)
    r, piv = rref(a, p)
    free = np.setdiff1d(np.arange(n), piv)
    basis = np.zeros((n, free.size), dtype=np.int64)
    for j, f in enumerate(free):
        basis[f, j] = 1
        basis[piv, j] = (-r[: piv.size, f]) % p
    return basis, free


def solve(a, b, p):
    """A particular solution X of A X = B (free variables set to zero), or None."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    m, n = a.shape
    k = b.shape[1]
    if m == 0:
        return np.zeros((n, k), dtype=np.int64)
    aug = np.concatenate([a, b], axis=1)
    r, piv = rref(aug, p)
    if piv.size and piv[-1] >= n:
        return None
    x = np.zeros((n, k), dtype=np.int64)
    x[piv] = r[: piv.size, n:]
    return x


def inverse(a, p):
    a = np.asarray(a, dtype=np.int64)
    n = a.shape[0]
    if a.shape != (n, n):
        return None
    if n == 0:
        return np.zeros((0, 0), dtype=np.int64)
    x = solve(a, np.eye(n, dtype=np.int64), p)
    if x is None or rank(a, p) < n:
        return None
    return x


def row_space_basis(a, p):
    """Rows of the rref of ``a`` (nonzero only) and their pivots."""
    a = np.asarray(a, dtype=np.int64)
    if a.size == 0:
        return np.zeros((0, a.shape[1]), dtype=np.int64), np.zeros(0, dtype=np.int64)
    r, piv = rref(a, p)
    return r[: piv.size].copy(), piv
