from itertools import combinations

import pytest
from hypothesis import given, settings, strategies as st

from hofun.poset import (Poset, PosetMap, boundary_poset, codegeneracy, coface, comma_below,
                         decompose_inclusion, delta_tilde, face_subposet, horn_poset, is_connected,
                         poset_from_json, poset_to_json, simplex_map, subsets)

from oracles import all_chains, codegeneracy_tuple, coface_tuple, monotone_compose


@pytest.mark.parametrize("n", range(5))
def test_subset_poset_size(n):
    assert len(delta_tilde(n)) == 2 ** (n + 1) - 1


def test_delta_tilde_1_covers():
    P = delta_tilde(1)
    assert set(P.covers) == {((0,), (0, 1)), ((1,), (0, 1))}
    assert P.maximal() == [(0, 1)]


def induced(func, n, m):
    """PosetMap oracle: image sets of a monotone function given as a tuple."""
    return {a: tuple(sorted({func[x] for x in a})) for a in subsets(n)}


@pytest.mark.parametrize("n", range(4))
def test_coface_is_image_of_the_injection(n):
    for i in range(n + 2):
        assert coface(i, n).assignment == induced(coface_tuple(i, n), n, n + 1)


@pytest.mark.parametrize("n", range(4))
def test_codegeneracy_is_image_of_the_surjection(n):
    for j in range(n + 1):
        assert codegeneracy(j, n).assignment == induced(codegeneracy_tuple(j, n), n + 1, n)


@pytest.mark.parametrize("n", range(4))
def test_cosimplicial_identities_against_tuples(n):
    # every identity is checked twice: on tuples and on the induced poset maps
    for j in range(n + 2):
        for i in range(j):
            lhs = monotone_compose(coface_tuple(j, n + 1), coface_tuple(i, n))
            rhs = monotone_compose(coface_tuple(i, n + 1), coface_tuple(j - 1, n))
            assert lhs == rhs
            assert coface(j, n + 1).compose(coface(i, n)) == coface(i, n + 1).compose(coface(j - 1, n))
    for j in range(n + 1):
        for i in range(j + 1):
            a = monotone_compose(codegeneracy_tuple(j, n), codegeneracy_tuple(i, n + 1))
            b = monotone_compose(codegeneracy_tuple(i, n), codegeneracy_tuple(j + 1, n + 1))
            assert a == b
        for i in (j, j + 1):
            assert monotone_compose(codegeneracy_tuple(j, n), coface_tuple(i, n)) == tuple(range(n + 1))
            assert codegeneracy(j, n).compose(coface(i, n)) == simplex_map(tuple(range(n + 1)), n, n)


def test_coface_range_error():
    with pytest.raises(ValueError):
        coface(3, 1)
    with pytest.raises(ValueError):
        codegeneracy(2, 1)


@pytest.mark.parametrize("n", range(1, 4))
def test_boundary_and_horn(n):
    assert len(boundary_poset(n)) == 2 ** (n + 1) - 2
    for k in range(n + 1):
        H = horn_poset(n, k)
        assert len(H) == 2 ** (n + 1) - 3
        assert tuple(x for x in range(n + 1) if x != k) not in H
        assert H.is_down_closed(H.elements) and delta_tilde(n).is_down_closed(H.elements)


def test_face_subposet_is_image_of_coface():
    for n in range(1, 4):
        for i in range(n + 1):
            assert set(face_subposet(n, i).elements) == set(coface(i, n - 1).assignment.values())


def test_every_chain_count_matches_brute_force():
    P = delta_tilde(2)
    # chains of the subset poset of [2] = simplices of its subdivision
    assert all_chains(P.elements, P.leq) == 25


def test_comma_below():
    P = delta_tilde(2)
    S = [x for x in P.elements if len(x) == 1]
    assert set(comma_below(P, S, (0, 2)).elements) == {(0,), (2,)}
    with pytest.raises(ValueError):
        comma_below(P, S, (5,))


def test_rejects_cycles_and_unknowns():
    with pytest.raises(ValueError):
        Poset([1, 2], [(1, 2), (2, 1)])
    with pytest.raises(ValueError):
        Poset([1], [(1, 3)])


def test_map_must_land_in_target():
    with pytest.raises(ValueError):
        PosetMap(delta_tilde(0), delta_tilde(0), {(0,): (1,)})


def test_decompose_inclusion():
    steps = decompose_inclusion((0,), (0, 1, 2))
    assert [s[1] for s in steps] == [(0, 1), (0,)]


@st.composite
def random_posets(draw):
    n = draw(st.integers(1, 6))
    rel = draw(st.lists(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=10))
    # orient every pair forward so the relation is acyclic
    return Poset(range(n), [(min(a, b), max(a, b)) for a, b in rel if a != b])


@settings(max_examples=100, deadline=None)
@given(random_posets())
def test_order_is_reflexive_transitive_and_covers_reduce_it(P):
    for a in P.elements:
        assert P.leq(a, a)
        for b in P.elements:
            for c in P.elements:
                if P.leq(a, b) and P.leq(b, c):
                    assert P.leq(a, c)
    assert P.transitive_reduction_ok()
    h = {x: P.height(x) for x in P.elements}
    assert all(h[a] < h[b] for a, b in P.covers)
    assert all_chains(P.elements, P.leq) >= len(P)


@settings(max_examples=50, deadline=None)
@given(random_posets())
def test_json_round_trip(P):
    assert poset_from_json(poset_to_json(P)) == P


def test_connectedness():
    assert is_connected(delta_tilde(2))
    assert not is_connected(Poset([0, 1]))
