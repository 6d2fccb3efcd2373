from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from oracles import all_subgroups, automorphisms, closure
from schurkit.errors import InvalidArgument
from schurkit.groups import (Group, automorphism_group, coset_order_lift, generate_subgroup,
                             in_class_ec, is_automorphism, make_section, mask_of, members,
                             radical, subgroup_from_mask, subgroup_lattice)

GROUPS = ["C1", "C2", "C4", "C6", "C8", "C3^2", "C2^3", "C4xC2^2", "C4xC3", "C4xC3^2"]


@pytest.mark.parametrize("spec,order", [("C4xC3^2", 36), ("4,3,3", 36), ("C2x C2", 4),
                                        ('{"factors": [4, 2]}', 8), ("C1", 1)])
def test_parse(spec, order):
    assert Group.parse(spec).order == order


@pytest.mark.parametrize("bad", ["C", "D4", "C4+C2", ""])
def test_parse_rejects(bad):
    with pytest.raises(InvalidArgument):
        Group.parse(bad)


def test_json_round_trip(g36):
    assert Group.from_json(g36.to_json()) == g36


@given(st.sampled_from(GROUPS[1:]), st.data())
def test_group_axioms(spec, data):
    G = Group.parse(spec)
    a, b, c = (data.draw(st.integers(0, G.order - 1)) for _ in range(3))
    assert G.mul(G.mul(a, b), c) == G.mul(a, G.mul(b, c))
    assert G.mul(a, b) == G.mul(b, a)
    assert G.mul(a, G.inv(a)) == 0
    assert G.pow(a, G.element_order(a)) == 0
    assert G.index(G.coords(a)) == a


def test_generate_subgroup(c4, g36):
    c = 1
    assert generate_subgroup(c4, [c]).order == 4
    assert generate_subgroup(g36, []).elements == (0,)
    x = g36.index([2, 1, 0])
    assert generate_subgroup(g36, [x]).order == 6


def test_radical(c4, g36):
    c = 1
    assert set(radical(c4, [c, c4.inv(c)]).elements) == {0, c4.pow(c, 2)}
    assert radical(c4, [c]).elements == (0,)
    H = mask_of(x for x in g36.elements() if g36.coords(x)[0] == 0)
    coset = g36.translate(H, g36.index([1, 0, 0]))
    assert radical(g36, members(coset)).mask == H


@pytest.mark.parametrize("spec", ["C4", "C6", "C8", "C3^2", "C2^3", "C4xC2^2", "C4xC3^2"])
def test_lattice_matches_brute_force(spec):
    G = Group.parse(spec)
    got = {frozenset(H.elements) for H in subgroup_lattice(G)}
    assert got == all_subgroups(G)
    for H in subgroup_lattice(G):
        assert G.order % H.order == 0
        assert closure(G, H.generators) == frozenset(H.elements)


def test_lattice_counts(c4, g36):
    assert len(subgroup_lattice(c4)) == 3
    assert len(subgroup_lattice(Group.parse("C3^2"))) == 6
    assert [H.order for H in subgroup_lattice(g36)].count(2) == 1


@pytest.mark.parametrize("spec,count", [("C4", 2), ("C3^2", 48), ("C4xC3^2", 96),
                                        ("C8", 4), ("C4xC2^2", 192), ("C2^3", 168)])
def test_automorphism_counts(spec, count):
    G = Group.parse(spec)
    auts = automorphism_group(G).elements
    assert len(auts) == count
    assert set(auts) == set(automorphisms(G))
    assert auts[0] == tuple(G.elements())
    assert all(is_automorphism(G, f) for f in auts)


def test_sections(c4, g36):
    full = subgroup_from_mask(c4, c4.full_mask)
    L = subgroup_from_mask(c4, mask_of([0, 2]))
    S = make_section(c4, full, L)
    assert S.order == 2
    assert make_section(c4, L, L).order == 1
    G = g36
    C1 = next(H for H in subgroup_lattice(G) if H.order == 2)
    S = make_section(G, subgroup_from_mask(G, G.full_mask), C1)
    assert S.order == 18 and S.quotient.primary_type == (2, 3, 3)
    # quotient multiplication agrees with representatives
    for a in G.elements():
        for b in G.elements():
            assert S.coset_of[G.mul(a, b)] == S.quotient.mul(S.coset_of[a], S.coset_of[b])


def test_class_ec():
    assert in_class_ec(Group.parse("C4xC3^2"))
    assert in_class_ec(Group.parse("C6"))
    assert not in_class_ec(Group.parse("C8"))
    assert not in_class_ec(Group.parse("C9"))


def test_coset_order_lift(g36):
    G = g36
    C1 = next(H for H in subgroup_lattice(G) if H.order == 2)
    x = G.index([0, 1, 0])
    y = G.index([2, 0, 1])  # L y has order 3 in G/L
    yp = coset_order_lift(G, C1, x, y)
    assert yp in {G.mul(l, y) for l in C1.elements} and G.element_order(yp) == 3
    assert coset_order_lift(G, C1, x, x) == x
    c = G.index([1, 0, 0])
    cz = G.mul(c, C1.generators[0])
    yp = coset_order_lift(G, C1, c, cz)
    assert G.element_order(yp) == 4


def test_coset_order_lift_rejects(g36):
    C1 = next(H for H in subgroup_lattice(g36) if H.order == 2)
    with pytest.raises(InvalidArgument):
        coset_order_lift(g36, C1, C1.generators[0], 1)
    with pytest.raises(InvalidArgument):
        coset_order_lift(Group.parse("C8"), subgroup_from_mask(Group.parse("C8"), 1), 1, 1)
