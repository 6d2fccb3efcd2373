from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from oracles import cayley_isomorphic_by_aut, color_automorphisms, digraph_isomorphic
from schurkit.census import subset_census
from schurkit.errors import InvalidArgument
from schurkit.groups import Group, automorphism_group
from schurkit.iso import (FormCache, _coprime_split, atomic_write, cayley_color_graph,
                          cayley_digraph, cayley_iso, ci_sring, ci_subset,
                          color_automorphisms as auts_of, g_complete_leq,
                          min_family_elements, sring_automorphisms, subset_form, two_closure,
                          verify_subset_witness)
from schurkit.perms import close_group, right_regular, symmetric_group
from schurkit.sring import group_ring, rank_two, validate_sring

C4 = Group.parse("C4")
C8 = Group.parse("C8")


def wreath_c4():
    return validate_sring(C4, [[0], [2], [1, 3]])


def test_color_graph():
    C2 = Group.parse("C2")
    assert cayley_color_graph(group_ring(C2)).matrix() == [[0, 1], [1, 0]]
    C3 = Group.parse("C3")
    m = cayley_color_graph(rank_two(C3)).matrix()
    assert {m[i][i] for i in range(3)} == {0}
    assert {m[i][j] for i in range(3) for j in range(3) if i != j} == {1}
    D = cayley_color_graph(wreath_c4())
    odd = D.palette - 1
    assert all((D.color(i, j) == odd) == (D.color(j, i) == odd) for i in range(4) for j in range(4))


def test_automorphism_orders_against_brute_force():
    cases = [(rank_two(Group.parse("C3")), 6), (group_ring(C4), 4), (wreath_c4(), 8)]
    for A, order in cases:
        D = cayley_color_graph(A)
        assert sring_automorphisms(A).order == order == len(color_automorphisms(D.matrix()))


def test_two_closure():
    K = close_group(list(right_regular(C4).generators) + list(automorphism_group(C4).elements))
    assert two_closure(K, C4).order == 8
    assert two_closure(symmetric_group(4), C4).order == 24
    C3 = Group.parse("C3")
    assert two_closure(right_regular(C3), C3).order == 3


def test_cayley_iso():
    assert cayley_iso(C4, [1], [1]) == tuple(range(4))
    C3 = Group.parse("C3")
    assert cayley_iso(C3, [1], [2]) == (0, 2, 1)
    phi = cayley_iso(C8, [1], [3])
    assert phi[1] == 3 and all(phi[x] == 3 * x % 8 for x in range(8))
    assert cayley_iso(C8, [1], [2]) is None


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 63), st.integers(0, 63))
def test_forms_decide_isomorphism_on_c6(S, T):
    G = Group.parse("C6")
    same = subset_form(G, S) == subset_form(G, T)
    assert same == digraph_isomorphic(G, S, T)


def test_ci_subset_examples():
    for G in (C8, Group.parse("C6")):
        assert ci_subset(G, 0).status == "ci"
        assert ci_subset(G, G.full_mask & ~1).status == "ci"
        assert ci_subset(G, 0, method="regular-subgroup").status == "ci"
    with pytest.raises(InvalidArgument):
        ci_subset(C8, 1, method="guess")


@pytest.mark.parametrize("spec", ["C6", "C8", "C10", "C2^3"])
def test_methods_agree(spec):
    G = Group.parse(spec)
    for S in range(1 << G.order):
        a = ci_subset(G, S, method="orbit-census")
        b = ci_subset(G, S, method="regular-subgroup")
        assert a.status == b.status, S
        for v in (a, b):
            if v.status == "non-ci":
                T, f = v.witness
                assert verify_subset_witness(G, S, T, f)
                assert not cayley_isomorphic_by_aut(G, S, T, automorphism_group(G).elements)


def test_coprime_split_against_census():
    # C12 = C4 x C3 exercises the Sylow splitting of Aut(Cay(G, S))
    G = Group.parse("C12")
    census = subset_census(G)
    split_seen = 0
    for rec in census.records[::3]:
        v = ci_subset(G, rec.subset, method="regular-subgroup", budget=20_000)
        if v.decided:
            assert (v.status == "ci") == bool(rec.ci_flag)
        K = auts_of(cayley_digraph(G, rec.subset))
        split_seen += _coprime_split(K, G) is not None
    assert split_seen > 0


def test_ci_sring():
    assert ci_sring(group_ring(C4)).status == "ci"
    assert ci_sring(rank_two(Group.parse("C3^2"))).status == "ci"
    assert ci_sring(wreath_c4()).status == "ci"


def test_g_complete_order():
    Gr = right_regular(C4)
    D = sring_automorphisms(wreath_c4())
    assert g_complete_leq(D, D, C4) is True
    assert g_complete_leq(Gr, D, C4) is True
    V = Group.parse("C2^2")
    assert g_complete_leq(right_regular(V), symmetric_group(4), V) is True
    with pytest.raises(InvalidArgument):
        g_complete_leq(D, Gr, C4)


def test_min_family():
    Gr = right_regular(C4)
    D = sring_automorphisms(wreath_c4())
    assert min_family_elements([Gr], C4).minimal == [0]
    mf = min_family_elements([D, Gr], C4)
    assert mf.minimal == [1] and mf.excluded == {0: 1}


def test_form_cache(tmp_path):
    cache = FormCache(tmp_path)
    f1 = cache.subset_form(C8, 0b10110)
    f2 = cache.subset_form(C8, 0b10110)
    assert f1 == f2 and f1.labeling == f2.labeling
    assert len(list((tmp_path / "forms").rglob("*.json"))) == 1


def test_atomic_write(tmp_path):
    p = tmp_path / "a" / "b.txt"
    atomic_write(p, "one")
    atomic_write(p, "two")
    assert p.read_text() == "two"
    assert [x.name for x in p.parent.iterdir()] == ["b.txt"]
