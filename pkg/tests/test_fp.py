import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hofun import _fp

from oracles import kernel_vectors, rank_mod_p

primes = st.sampled_from([2, 3, 5, 7])


def matrices(max_rows=6, max_cols=6):
    return st.tuples(primes, st.integers(0, max_rows), st.integers(0, max_cols), st.integers(0, 2**32 - 1))


def _mat(spec):
    p, m, n, seed = spec
    return p, np.random.default_rng(seed).integers(0, p, (m, n))


@settings(max_examples=150, deadline=None)
@given(matrices())
def test_rank_matches_reference_elimination(spec):
    p, a = _mat(spec)
    want = rank_mod_p(a.tolist(), p)[0] if a.size else 0
    assert _fp.rank(a, p) == want


@settings(max_examples=100, deadline=None)
@given(matrices())
def test_rref_matches_reference(spec):
    p, a = _mat(spec)
    if a.size == 0:
        return
    r, piv = _fp.rref(a, p)
    k, ref = rank_mod_p(a.tolist(), p)
    assert piv.size == k
    assert r.tolist() == ref


@settings(max_examples=100, deadline=None)
@given(matrices())
def test_backends_agree(spec):
    p, a = _mat(spec)
    r1, p1 = _fp.rref(a, p, backend="numpy")
    if not _fp.NUMBA_AVAILABLE:
        pytest.skip("numba missing")
    r2, p2 = _fp.rref(a, p, backend="numba")
    assert np.array_equal(r1, r2) and np.array_equal(p1, p2)


@settings(max_examples=60, deadline=None)
@given(st.tuples(st.sampled_from([2, 3]), st.integers(1, 3), st.integers(1, 4), st.integers(0, 2**32 - 1)))
def test_nullspace_spans_every_kernel_vector(spec):
    p, a = _mat(spec)
    N, free = _fp.nullspace(a, p)
    assert not (_fp.matmul(a, N, p)).any()
    vecs = kernel_vectors(a.tolist(), a.shape[1], p)
    assert len(vecs) == p ** N.shape[1]
    # canonical: identity on the free coordinates
    assert np.array_equal(N[free], np.eye(free.size, dtype=np.int64))


@settings(max_examples=100, deadline=None)
@given(matrices(), st.integers(0, 2**32 - 1))
def test_solve_finds_solutions_exactly_when_they_exist(spec, seed):
    p, a = _mat(spec)
    rng = np.random.default_rng(seed)
    x0 = rng.integers(0, p, (a.shape[1], 2))
    b = _fp.matmul(a, x0, p)
    x = _fp.solve(a, b, p)
    assert x is not None and np.array_equal(_fp.matmul(a, x, p), b)


def test_solve_reports_inconsistent_system():
    a = np.array([[1, 0], [1, 0]])
    b = np.array([[0], [1]])
    assert _fp.solve(a, b, 2) is None


@settings(max_examples=60, deadline=None)
@given(primes, st.integers(1, 6), st.integers(0, 2**32 - 1))
def test_inverse(p, n, seed):
    a = np.random.default_rng(seed).integers(0, p, (n, n))
    inv = _fp.inverse(a, p)
    if rank_mod_p(a.tolist(), p)[0] < n:
        assert inv is None
    else:
        assert np.array_equal(_fp.matmul(a, inv, p), np.eye(n, dtype=np.int64))


def test_matmul_large_prime_uses_exact_route():
    p = 2**31 - 1
    a = np.full((3, 3), p - 1, dtype=np.int64)
    want = (a.astype(object) @ a.astype(object)) % p
    assert np.array_equal(_fp.matmul(a, a, p), want.astype(np.int64))


@pytest.mark.parametrize("p,ok", [(2, True), (3, True), (4, False), (1, False), (97, True), (91, False)])
def test_is_prime(p, ok):
    assert _fp.is_prime(p) is ok


def test_inverse_table():
    t = _fp.inverse_table(7)
    assert all(a * t[a] % 7 == 1 for a in range(1, 7))
