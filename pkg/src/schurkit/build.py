"""Constructions of S-rings and structural classifiers.

Orbit and cyclotomic S-rings, tensor and generalized wreath products, and
the predicates used to decide which decomposition an S-ring admits.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .errors import InvalidArgument, NotApplicable, PropertyViolation, SectionMismatch
from .groups import (AutGroup, Group, Section, Subgroup, automorphism_group, compose,
                     is_automorphism, is_prime, make_section, mask_of, members, radical_mask,
                     subgroup_from_mask)
from .perms import PermGroup, close_group, right_regular, translation
from .sring import SRing, quotient_sring, validate_sring


def _orbit_partition(n: int, gens: Iterable[Sequence[int]]) -> list[list[int]]:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for g in gens:
        for x in range(n):
            a, b = find(x), find(g[x])
            if a != b:
                parent[max(a, b)] = min(a, b)
    out: dict[int, list[int]] = {}
    for x in range(n):
        out.setdefault(find(x), []).append(x)
    return list(out.values())


def orbit_masks(n: int, gens: Iterable[Sequence[int]]) -> tuple[int, ...]:
    return tuple(sorted(mask_of(o) for o in _orbit_partition(n, gens)))


# constructions ---------------------------------------------------------------


def orbit_sring(G: Group, K: PermGroup) -> SRing:
    """V(K, G): classes are the orbits of the stabilizer of e in K."""
    if K.degree != G.order:
        raise InvalidArgument(f"K acts on {K.degree} points, |G| = {G.order}")
    for i in range(len(G.factors)):
        g = G.index([1 if j == i else 0 for j in range(len(G.factors))])
        if translation(G, g) not in K:
            raise InvalidArgument("K does not contain the right regular representation of G")
    stab = K.stabilizer(0)
    return validate_sring(G, stab.orbits())


def _automorphism_list(G: Group, K) -> list[tuple[int, ...]]:
    if isinstance(K, PermGroup):
        gens = list(K.generators)
    elif isinstance(K, AutGroup):
        gens = list(K.generators) or list(K.elements)
    else:
        gens = [tuple(k) for k in K]
    for g in gens:
        if not is_automorphism(G, g):
            raise InvalidArgument(f"{g} is not an automorphism of {G.name}")
    return gens


def cyclotomic_sring(G: Group, K, check: bool = True) -> SRing:
    """cyc(K, G): classes are the orbits of K <= Aut(G) on G.

    K may be an AutGroup, a PermGroup on G or a list of automorphisms (its
    generators are enough).  With ``check`` the result is compared against
    the orbit S-ring of the group generated by G_r and K.
    """
    gens = _automorphism_list(G, K)
    A = validate_sring(G, _orbit_partition(G.order, gens))
    if check:
        big = close_group(list(right_regular(G).generators) + gens, degree=G.order)
        if orbit_sring(G, big) != A:
            raise PropertyViolation("cyclotomic S-ring differs from the orbit S-ring of G_r K")
    return A


def tensor(A1: SRing, A2: SRing) -> SRing:
    """A1 ⊗ A2 over G1 × G2; element (g1, g2) has index g1 * |G2| + g2."""
    G1, G2 = A1.group, A2.group
    G = G1.direct_product(G2)
    n2 = G2.order
    classes = []
    for X1 in A1.classes:
        for X2 in A2.classes:
            classes.append([x1 * n2 + x2 for x1 in X1 for x2 in X2])
    return validate_sring(G, classes)


def _inside(A: SRing, mask: int) -> list[int]:
    return [m for m in A.masks if m & ~mask == 0]


def s_wreath(A_U: SRing, A_quot: SRing, S: Section) -> SRing:
    """The S-wreath product of A_U and A_quot for the section S = U/L of G.

    A_U is an S-ring over the quotient group of the section U/{e} (as made by
    :func:`restriction`) and A_quot one over the quotient group of G/L.
    """
    G = S.group
    U, L = S.upper, S.lower
    trivial = subgroup_from_mask(G, 1)
    whole = subgroup_from_mask(G, G.full_mask)
    SU = make_section(G, U, trivial)
    SG = make_section(G, whole, L)
    if A_U.group != SU.quotient:
        raise SectionMismatch(f"A_U is over {A_U.group.name}, U is {SU.quotient.name}")
    if A_quot.group != SG.quotient:
        raise SectionMismatch(f"A_quot is over {A_quot.group.name}, G/L is {SG.quotient.name}")
    inner = [SU.preimage(m) for m in A_U.masks]
    if not _is_a_set_of(inner, L.mask):
        raise SectionMismatch("L is not an A_U-subgroup")
    outer = [SG.preimage(m) for m in A_quot.masks]
    # agreement on U/L, compared as partitions of G/L
    upi = SG.project(U.mask)
    from_u = {SG.project(m) for m in inner}
    from_q = {m for m in A_quot.masks if m & ~upi == 0}
    if from_u != from_q:
        raise SectionMismatch("A_U and A_quot disagree on the section U/L")
    classes = inner + [m for m in outer if m & U.mask == 0]
    return validate_sring(G, [members(m) for m in classes])


def _is_a_set_of(masks: Sequence[int], target: int) -> bool:
    cover = 0
    for m in masks:
        if m & target:
            if m & ~target:
                return False
            cover |= m
    return cover == target


# decompositions ---------------------------------------------------------------


def _products(G: Group, xs: Sequence[int], ys: Sequence[int]) -> set[int]:
    return {G.set_mul(x, y) for x in xs for y in ys}


def detect_tensor(A: SRing) -> list[tuple[Subgroup, Subgroup]]:
    """All unordered pairs (G1, G2) of nontrivial A-subgroups with G = G1 × G2
    and A equal to the tensor product of its restrictions."""
    G = A.group
    subs = [m for m in A.a_subgroup_masks() if m != 1 and m != G.full_mask]
    target = set(A.masks)
    out = []
    for i, h1 in enumerate(subs):
        for h2 in subs[i + 1:]:
            if h1 & h2 != 1 or h1.bit_count() * h2.bit_count() != G.order:
                continue
            if _products(G, _inside(A, h1), _inside(A, h2)) == target:
                out.append((subgroup_from_mask(G, h1), subgroup_from_mask(G, h2)))
    return out


@dataclass(frozen=True)
class WreathWitness:
    section: Section
    nontrivial: bool

    def to_json(self) -> dict:
        return {"section": self.section.to_json(), "nontrivial": self.nontrivial}


def is_s_wreath(A: SRing, U: int, L: int) -> bool:
    G = A.group
    return all(L & ~radical_mask(G, X) == 0 for X in A.masks if X & ~U)


def detect_s_wreath(A: SRing, nontrivial_only: bool = False) -> list[WreathWitness]:
    """A-sections U/L for which A is the U/L-wreath product.

    Sections are ordered by |U| descending, then |L| ascending.
    """
    G = A.group
    subs = A.a_subgroup_masks()
    full = G.full_mask
    found = []
    for U in subs:
        for L in subs:
            if L & ~U or not is_s_wreath(A, U, L):
                continue
            nontriv = L != 1 and U != full
            if nontrivial_only and not nontriv:
                continue
            found.append((U, L, nontriv))
    found.sort(key=lambda t: (-t[0].bit_count(), t[1].bit_count(), t[0], t[1]))
    return [WreathWitness(make_section(G, subgroup_from_mask(G, U), subgroup_from_mask(G, L)), nt)
            for U, L, nt in found]


def section_rings(A: SRing, S: Section) -> tuple[SRing, SRing, SRing]:
    """(A_U, A_{G/L}, A_S) for an A-section S = U/L."""
    G = A.group
    A_U = quotient_sring(A, make_section(G, S.upper, subgroup_from_mask(G, 1)))
    A_GL = quotient_sring(A, make_section(G, subgroup_from_mask(G, G.full_mask), S.lower))
    return A_U, A_GL, quotient_sring(A, S)


def reconstruct_s_wreath(A: SRing, S: Section) -> SRing:
    A_U, A_GL, _ = section_rings(A, S)
    return s_wreath(A_U, A_GL, S)


# automorphisms and Cayley minimality ------------------------------------------


def aut_g(A: SRing) -> AutGroup:
    """Automorphisms of G fixing every basic set."""
    G = A.group
    auts = automorphism_group(G)
    keep = [f for f in auts.elements if all(_image(f, m) == m for m in A.masks)]
    return _as_autgroup(G, keep)


def _image(f: Sequence[int], mask: int) -> int:
    out = 0
    for x in members(mask):
        out |= 1 << f[x]
    return out


def _as_autgroup(G: Group, elems: Sequence[tuple[int, ...]]) -> AutGroup:
    gens: list[tuple[int, ...]] = []
    span = {tuple(G.elements())}
    for a in elems:
        if a in span:
            continue
        gens.append(a)
        span = _closure(span, gens)
    return AutGroup(G, tuple(elems), tuple(gens))


def _closure(start: set, gens: Sequence[tuple[int, ...]]) -> set:
    seen = set(start)
    frontier = list(seen)
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = compose(x, g)
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return seen


def cayley_equivalent(G: Group, K1, K2) -> bool:
    return (orbit_masks(G.order, _automorphism_list(G, K1))
            == orbit_masks(G.order, _automorphism_list(G, K2)))


def is_cyclotomic(A: SRing) -> bool:
    K = aut_g(A)
    return orbit_masks(A.group.order, K.elements) == tuple(sorted(A.masks))


def subgroups_of(elements: Sequence[tuple[int, ...]]) -> list[frozenset]:
    """All subgroups of a small permutation group given by its elements.

    Built by joining known subgroups with cyclic subgroups until nothing new
    appears.  Sorted by order, then by sorted element list.
    """
    ident = tuple(range(len(elements[0])))
    cyclic = set()
    for g in elements:
        cyc, cur = {ident}, g
        while cur != ident:
            cyc.add(cur)
            cur = compose(cur, g)
        cyclic.add(frozenset(cyc))
    cyclic = sorted(cyclic, key=lambda s: (len(s), sorted(s)))
    found = {frozenset([ident])}
    frontier = list(found)
    while frontier:
        nxt = []
        for H in frontier:
            for C in cyclic:
                if C <= H:
                    continue
                J = frozenset(_closure(set(H) | set(C), [g for g in C] + _gens_of(H)))
                if J not in found:
                    found.add(J)
                    nxt.append(J)
        frontier = nxt
    return sorted(found, key=lambda s: (len(s), sorted(s)))


def _gens_of(H: frozenset) -> list[tuple[int, ...]]:
    gens: list[tuple[int, ...]] = []
    span: set = set()
    for h in sorted(H):
        if h in span:
            continue
        gens.append(h)
        span = _closure(span | {h}, gens)
    return gens


def cayley_minimal(A: SRing) -> bool:
    """No proper subgroup of Aut_G(A) has the same orbits on G."""
    G = A.group
    K = aut_g(A)
    target = tuple(sorted(A.masks))
    if orbit_masks(G.order, K.elements) != target:
        raise NotApplicable("S-ring is not cyclotomic")
    if len(K) == 1:
        return True
    # a proper subgroup with these orbits lies in a maximal one; joining
    # cyclic subgroups upward finds one if it exists
    full = frozenset(K.elements)
    for H in subgroups_of(K.elements):
        if H != full and orbit_masks(G.order, H) == target:
            return False
    return True


# conditions on sections ----------------------------------------------------------


CONDITIONS = ("CA", "CAA", "CAAA")


def _cyclic_of_order(G: Group, mask: int, n: int) -> bool:
    return mask.bit_count() == n and any(G.element_order(x) == n for x in members(mask))


def caaa_target(A: SRing, U: int, V: int, L: int) -> tuple[int, ...]:
    """Partition of U for (ZL ⊗ A_V) wreathed over (V×L)/V with Z(U/V)."""
    G = A.group
    VL = G.set_mul(V, L)
    classes = set()
    for X in _inside(A, V):
        for l in members(L):
            classes.add(G.translate(X, l))
    rest = U & ~VL
    while rest:
        x = (rest & -rest).bit_length() - 1
        c = G.translate(V, x)
        classes.add(c)
        rest &= ~c
    return tuple(sorted(classes))


def section_condition(A: SRing, S: Section) -> frozenset[str]:
    """Which of CA, CAA, CAAA hold for the A-section S."""
    G = A.group
    U, L = S.upper.mask, S.lower.mask
    flags = set()
    A_U, A_GL, A_S = section_rings(A, S)
    if A_S.is_group_ring():
        flags.add("CA")
    if is_cyclotomic(A_U) or is_cyclotomic(A_GL):
        # A_S is cyclotomic as a section ring of a cyclotomic ring
        try:
            if cayley_minimal(A_S):
                flags.add("CAA")
        except NotApplicable:
            pass
    nU = U.bit_count()
    if nU % 4 == 0 and is_prime(nU // 4) and nU // 4 != 2 and _cyclic_of_order(G, U, nU) \
            and L.bit_count() == 2:
        p = nU // 4
        inside = tuple(sorted(_inside(A, U)))
        for V in A.a_subgroup_masks():
            if V.bit_count() == p and V & ~U == 0 and caaa_target(A, U, V, L) == inside:
                flags.add("CAAA")
                break
    return frozenset(flags)


# classifiers --------------------------------------------------------------------


def circ_classify(A: SRing) -> frozenset[str]:
    """Which statements of the cyclic-group classification hold for A."""
    G = A.group
    if not G.is_cyclic():
        raise InvalidArgument(f"{G.name} is not cyclic")
    out = set()
    if A.rank <= 2:
        out.add("rank2")
    if is_cyclotomic(A):
        out.add("cyclotomic")
    if detect_tensor(A):
        out.add("tensor")
    if detect_s_wreath(A, nontrivial_only=True):
        out.add("nontrivial-s-wreath")
    if not out:
        raise PropertyViolation(f"no statement holds for {A.classes}")
    return frozenset(out)


@dataclass
class DecompositionReport:
    kind: str
    statements: list[int]
    tensor_pairs: list[tuple[Subgroup, Subgroup]] = field(default_factory=list)
    sections: list[tuple[Section, frozenset]] = field(default_factory=list)
    group: Group | None = None

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "statements": list(self.statements),
            "tensor": [[list(a.elements), list(b.elements)] for a, b in self.tensor_pairs],
            "sections": [{"upper": list(s.upper.elements), "lower": list(s.lower.elements),
                          "conditions": sorted(f)} for s, f in self.sections],
        }


def _is_c4_cp2(G: Group) -> int:
    t = G.primary_type
    if len(t) == 3 and t[0] == 4 and t[1] == t[2] and is_prime(t[1]) and t[1] != 2:
        return t[1]
    return 0


def classify_main2(A: SRing, first_section_only: bool = False) -> DecompositionReport:
    """Check statements 1-3 of the C4 × Cp^2 classification for A.

    Every satisfied statement is reported together with its witnesses.
    """
    G = A.group
    if not _is_c4_cp2(G):
        raise InvalidArgument(f"{G.name} is not C4 x Cp^2 with p odd")
    statements = []
    if A.rank == 2:
        statements.append(1)
    pairs = detect_tensor(A)
    if pairs:
        statements.append(2)
    sections = []
    for w in detect_s_wreath(A, nontrivial_only=True):
        flags = section_condition(A, w.section)
        if flags:
            sections.append((w.section, flags))
            if first_section_only:
                break
    if sections:
        statements.append(3)
    kind = {1: "rank2", 2: "tensor", 3: "s-wreath"}[statements[0]] if statements else "none"
    return DecompositionReport(kind, statements, pairs, sections, G)


def revalidate(A: SRing, report: DecompositionReport) -> None:
    """Re-derive A from every witness in the report; raises on mismatch."""
    G = A.group
    for G1, G2 in report.tensor_pairs:
        if _products(G, _inside(A, G1.mask), _inside(A, G2.mask)) != set(A.masks):
            raise PropertyViolation("tensor witness does not reconstruct A")
    for S, flags in report.sections:
        if reconstruct_s_wreath(A, S) != A:
            raise PropertyViolation("wreath witness does not reconstruct A")
        if section_condition(A, S) != flags:
            raise PropertyViolation("section conditions changed on recomputation")
    if 1 in report.statements and A.rank != 2:
        raise PropertyViolation("rank witness is wrong")
