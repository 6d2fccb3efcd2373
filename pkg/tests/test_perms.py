from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from oracles import perm_closure
from schurkit.errors import BudgetExceeded, InvalidArgument
from schurkit.groups import Group, automorphism_group, make_section, mask_of, subgroup_from_mask
from schurkit.perms import (close_group, conjugate_subgroup_search, induced_section_action,
                            mul, point_stabilizer, regular_subgroups, right_regular,
                            symmetric_group)

perms = st.integers(2, 6).flatmap(
    lambda n: st.lists(st.permutations(list(range(n))).map(tuple), min_size=0, max_size=3)
    .map(lambda gs: (n, gs)))


@settings(max_examples=60, deadline=None)
@given(perms)
def test_close_group_matches_brute_force(case):
    n, gens = case
    K = close_group(gens, degree=n)
    elems = perm_closure(gens, n)
    assert K.order == len(elems)
    assert set(K.iter_elements()) == elems
    for g in elems:
        assert g in K


def test_close_group_basics():
    assert close_group([], degree=5).order == 1
    assert close_group([(1, 2, 3, 4, 5, 0)]).order == 6
    G = Group.parse("C3^2")
    assert close_group(automorphism_group(G).elements[1:], degree=9).order == 48
    with pytest.raises(BudgetExceeded):
        close_group(symmetric_group(7).generators, degree=7, cap=100)


def test_right_regular():
    for spec in ("C2", "C4", "C4xC3^2"):
        G = Group.parse(spec)
        R = right_regular(G)
        assert R.order == R.degree == G.order
        ident = tuple(range(G.order))
        assert all(all(g[x] != x for x in range(G.order)) for g in R.iter_elements() if g != ident)


def test_orbits_and_stabilizers():
    assert close_group([], degree=5).orbits() == [(0,), (1,), (2,), (3,), (4,)]
    G = Group.parse("C4xC3")
    assert len(right_regular(G).orbits()) == 1
    C4 = Group.parse("C4")
    K = close_group(list(right_regular(C4).generators) + list(automorphism_group(C4).elements))
    assert sorted(point_stabilizer(K, 0).orbits()) == [(0,), (1, 3), (2,)]
    assert point_stabilizer(right_regular(C4), 0).order == 1
    assert point_stabilizer(symmetric_group(3), 0).order == 2
    G36 = Group.parse("C4xC3^2")
    A = close_group(automorphism_group(G36).elements, degree=36)
    assert point_stabilizer(A, 0).order == 96


def test_induced_section_action():
    C4 = Group.parse("C4")
    full = subgroup_from_mask(C4, C4.full_mask)
    L = subgroup_from_mask(C4, mask_of([0, 2]))
    S = make_section(C4, full, L)
    K = induced_section_action(right_regular(C4), S)
    assert K.degree == 2 and K.order == 2
    assert induced_section_action(close_group([], degree=4), S).order == 1
    G = Group.parse("C4xC3^2")
    C1 = subgroup_from_mask(G, mask_of([0, G.index([2, 0, 0])]))
    S = make_section(G, subgroup_from_mask(G, G.full_mask), C1)
    A = close_group(automorphism_group(G).elements, degree=36)
    induced = induced_section_action(A, S)
    projected = set()
    for f in automorphism_group(G).elements:
        projected.add(tuple(S.coset_of[f[c[0]]] for c in S.cosets))
    assert set(induced.iter_elements()) == projected


def _dihedral8():
    return close_group([(1, 2, 3, 0), (0, 3, 2, 1)])


def test_regular_subgroups():
    C4 = Group.parse("C4")
    assert [R.order for R in regular_subgroups(right_regular(C4), C4)] == [4]
    D = _dihedral8()
    # brute force: subgroups of D generated by one or two elements
    elems = list(D.iter_elements())
    regular = set()
    for a in elems:
        for b in elems:
            H = perm_closure([a, b], 4)
            if len(H) == 4 and all(len({h[x] for h in H}) == 4 for x in range(4)):
                if any(_order(h) == 4 for h in H):
                    regular.add(frozenset(H))
    got = {frozenset(R.iter_elements()) for R in regular_subgroups(D, C4)}
    assert got == regular and len(got) == 1
    V = Group.parse("C2^2")
    # only the normal Klein four-group of Sym(4) is transitive
    assert len(regular_subgroups(symmetric_group(4), V)) == 1
    with pytest.raises(InvalidArgument):
        regular_subgroups(D, Group.parse("C3"))


def _order(p):
    k, q = 1, p
    while q != tuple(range(len(p))):
        q = mul(q, p)
        k += 1
    return k


def test_conjugate_subgroup_search():
    C4 = Group.parse("C4")
    Gr = right_regular(C4)
    assert conjugate_subgroup_search(symmetric_group(4), Gr, Gr) is not None
    D = _dihedral8()
    refl = close_group([(1, 0, 3, 2), (3, 2, 1, 0)])
    assert conjugate_subgroup_search(D, refl, Gr) is None
    other = close_group([(2, 3, 1, 0)])  # another 4-cycle, regular C4
    assert conjugate_subgroup_search(symmetric_group(4), other, Gr) is not None
