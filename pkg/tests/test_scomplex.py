from itertools import combinations

import pytest

from hofun import fixtures as fx
from hofun.poset import boundary_poset, delta_tilde, decompose_inclusion
from hofun.scomplex import (ComplexError, SimplicialComplex, SimplicialSetPresentation, barycenter_label,
                            barycentric_subdivide, complex_from_json, complex_to_json, count_chains,
                            face_poset, phi_map, prism_decomposition, product_chains,
                            product_with_interval, star_poset, surjections)

from oracles import all_chains


def f_vector(K):
    return [len(K.simplices(k)) for k in range(K.dim + 1)]


@pytest.mark.parametrize("n", range(4))
def test_face_poset_of_simplex_is_subset_poset(n):
    assert face_poset(SimplicialComplex.simplex(n)) == delta_tilde(n)


@pytest.mark.parametrize("n", range(1, 4))
def test_face_poset_of_boundary(n):
    assert face_poset(SimplicialComplex.boundary(n)) == boundary_poset(n)


def test_point():
    assert len(face_poset(SimplicialComplex.simplex(0))) == 1


@pytest.mark.parametrize("n,expected", [(0, [1]), (1, [3, 2]), (2, [7, 12, 6])])
def test_subdivision_counts(n, expected):
    assert f_vector(barycentric_subdivide(SimplicialComplex.simplex(n))) == expected


@pytest.mark.parametrize("K", [SimplicialComplex.simplex(2), SimplicialComplex.boundary(2), fx.glued_disk()])
def test_subdivision_simplices_are_chains(K):
    P = face_poset(K)
    sd = barycentric_subdivide(K)
    assert len(sd) == all_chains(P.elements, P.leq) == count_chains(P)


def test_star_poset_on_an_edge():
    st = star_poset(SimplicialComplex.simplex(1))
    assert set(st.poset.covers) == {((0,), (0, 1)), ((1,), (0, 1))}
    assert st.open_star_order_ok()


@pytest.mark.parametrize("K", [SimplicialComplex.simplex(2), fx.glued_disk()])
def test_star_poset_is_face_poset(K):
    st = star_poset(K)
    assert st.poset == face_poset(K)
    assert st.open_star_order_ok()
    for a, b in st.poset.covers:
        assert len(decompose_inclusion(a, b)) == 1


def test_simplicial_set_counts():
    S = SimplicialSetPresentation(SimplicialComplex.simplex(1))
    assert [s for s in S.simplices(0)] == [(0,), (1,)]
    assert [s for s in S.simplices(1) if S.is_nondegenerate(s)] == [(0, 1)]
    # Delta[1]_n has n + 2 elements
    assert [len(S.simplices(n)) for n in range(5)] == [2, 3, 4, 5, 6]


@pytest.mark.parametrize("K", [SimplicialComplex.simplex(2), fx.glued_disk()])
def test_simplicial_identities_exhaustive(K):
    assert SimplicialSetPresentation(K).identity_failures(4) == []


def test_normal_form_round_trip():
    for x in SimplicialSetPresentation(fx.glued_disk()).simplices(3):
        b, th = SimplicialSetPresentation.normal_form(x)
        assert SimplicialSetPresentation.from_normal_form(b, th) == x


@pytest.mark.parametrize("n,m", [(3, 1), (4, 2), (2, 2), (3, 0)])
def test_surjection_count(n, m):
    from math import comb
    assert len(surjections(n, m)) == comb(n, m)


def test_prism_n1():
    got = [tuple(s) for s in prism_decomposition(1)]
    assert set(got) == {((0, 0), (0, 1), (1, 1)), ((0, 0), (1, 0), (1, 1))}


@pytest.mark.parametrize("n", range(5))
def test_prisms(n):
    pr = prism_decomposition(n)
    assert len(pr) == n + 1
    assert all((0, 0) in s and (n, 1) in s for s in pr)
    for a, b in zip(pr, pr[1:]):
        assert len(set(a) & set(b)) == n + 1


def test_phi_examples():
    assert phi_map(0, "B", (1, 2), 2) == ((1, 0), (2, 0), (2, 1))
    # every vertex below n - i: level 0 copy for all kinds
    for kind in "BLU":
        assert phi_map(1, kind, (0,), 3) == ((0, 0),)
    for kind in "LU":
        assert phi_map(0, kind, (0, 1), 3) == phi_map(0, "B", (0, 1), 3)


def test_phi_rejects_bad_input():
    with pytest.raises(ComplexError):
        phi_map(0, "B", (0, 0), 2)
    with pytest.raises(ComplexError):
        phi_map(0, "X", (0,), 2)
    with pytest.raises(ComplexError):
        phi_map(0, "B", (0, 2), 2, K=SimplicialComplex(range(3), [(0, 1), (1, 2)]))


def test_barycenters():
    assert barycenter_label([(0, 0), (1, 0), (1, 1)]) == ((0, 1, 1), (0, 0, 1))
    assert barycenter_label([(0, 0), (0, 1), (1, 1)]) == ((0, 0, 1), (0, 1, 1))
    assert barycenter_label([(0, 0)]) == ((0,), (0,))


def test_product_with_interval():
    KI = product_with_interval(SimplicialComplex.simplex(1))
    assert f_vector(KI) == [4, 5, 2]
    assert len(product_chains(SimplicialComplex.simplex(2))) == len(product_with_interval(SimplicialComplex.simplex(2)))


def test_json_round_trip_and_errors():
    K = fx.glued_disk()
    assert complex_from_json(complex_to_json(K)) == K
    with pytest.raises(ComplexError):
        complex_from_json({"vertices": [0, 1]})
    with pytest.raises(ComplexError):
        complex_from_json({"vertices": [0, 1], "facets": [[0, 2]]})
    with pytest.raises(ComplexError):
        SimplicialComplex([0, 0], [[0]])
