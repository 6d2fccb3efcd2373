"""S-rings over finite abelian groups.

An S-ring is stored by its partition of the group into basic sets.  Basic
sets are kept in canonical order (size, then smallest element) so two S-rings
over the same group are equal exactly when their partitions are.
"""

from __future__ import annotations

import csv
import io
from enum import Enum
from math import gcd
from typing import Iterable, Sequence

from .errors import (Axiom1Violation, Axiom2Violation, Axiom3Violation, InvalidArgument,
                     NotASection, PropertyViolation)
from .groups import (Group, Section, Subgroup, mask_of, members, prime_factors, radical_mask,
                     subgroup_from_mask, subgroup_masks, _join)


def _canonical(masks: Iterable[int]) -> tuple[int, ...]:
    return tuple(sorted(masks, key=lambda m: (m.bit_count(), (m & -m).bit_length())))


class SRing:
    """A validated S-ring; build one with :func:`validate_sring`."""

    def __init__(self, group: Group, masks: Sequence[int]):
        self.group = group
        self.masks = _canonical(masks)
        self.classes = tuple(tuple(members(m)) for m in self.masks)
        cls = [0] * group.order
        for i, m in enumerate(self.masks):
            for x in members(m):
                cls[x] = i
        self.class_of = tuple(cls)
        # (X, Y) -> {Z: c}; rows are filled on first use and never change
        self._rows: dict[tuple[int, int], dict[int, int]] = {}

    @property
    def rank(self) -> int:
        return len(self.masks)

    def __repr__(self) -> str:
        return f"SRing({self.group.name}, rank={self.rank})"

    def __eq__(self, other) -> bool:
        return isinstance(other, SRing) and self.group == other.group and self.masks == other.masks

    def __hash__(self) -> int:
        return hash((self.group, self.masks))

    def class_index(self, mask: int) -> int:
        """Index of the basic set equal to ``mask``, or -1."""
        if mask == 0:
            return -1
        i = self.class_of[(mask & -mask).bit_length() - 1]
        return i if self.masks[i] == mask else -1

    def is_basic(self, mask: int) -> bool:
        return self.class_index(mask) >= 0

    def is_a_set(self, mask: int) -> bool:
        seen = 0
        for x in members(mask):
            seen |= self.masks[self.class_of[x]]
        return seen == mask

    def row(self, i: int, j: int) -> dict[int, int]:
        """Nonzero structure constants c^Z_{X,Y} for X, Y = classes i, j."""
        key = (i, j)
        r = self._rows.get(key)
        if r is None:
            r = _product_row(self, i, j)
            self._rows.setdefault(key, r)
        return r

    def structure_constants(self) -> dict[tuple[int, int, int], int]:
        out = {}
        for i in range(self.rank):
            for j in range(self.rank):
                for k, c in self.row(i, j).items():
                    out[(i, j, k)] = c
        return out

    def constants_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["X", "Y", "Z", "c"])
        for (i, j, k), c in sorted(self.structure_constants().items()):
            w.writerow([i, j, k, c])
        return buf.getvalue()

    def a_subgroups(self) -> list[Subgroup]:
        return [subgroup_from_mask(self.group, m) for m in self.a_subgroup_masks()]

    def a_subgroup_masks(self) -> list[int]:
        return [m for m in subgroup_masks(self.group) if self.is_a_set(m)]

    def is_group_ring(self) -> bool:
        return self.rank == self.group.order

    def to_json(self) -> dict:
        return {"group": self.group.to_json(), "classes": [list(c) for c in self.classes]}

    @classmethod
    def from_json(cls, obj) -> "SRing":
        G = Group.from_json(obj["group"])
        return validate_sring(G, obj["classes"])


def _product_row(A: SRing, i: int, j: int) -> dict[int, int]:
    G = A.group
    counts = [0] * G.order
    ys = A.classes[j]
    table = G.mul_table
    for x in A.classes[i]:
        row = table[x]
        for y in ys:
            counts[row[y]] += 1
    out = {}
    for k, cls in enumerate(A.classes):
        vals = {counts[z] for z in cls}
        if len(vals) != 1:
            raise Axiom3Violation(
                f"product of classes {i} and {j} is not constant on class {k}",
                sets=(A.classes[i], A.classes[j], cls))
        c = vals.pop()
        if c:
            out[k] = c
    return out


def validate_sring(G: Group, partition: Iterable[Iterable[int]]) -> SRing:
    """Check the three S-ring axioms and return the S-ring.

    Axiom 3 is checked by counting representations z = xy for every pair of
    classes and requiring the count to be constant on each class.
    """
    masks = []
    cover = 0
    for part in partition:
        m = mask_of(part)
        if m == 0:
            raise InvalidArgument("empty class in partition")
        if m >> G.order:
            raise InvalidArgument("class contains elements outside the group")
        if cover & m:
            raise InvalidArgument("classes are not disjoint")
        cover |= m
        masks.append(m)
    if cover != G.full_mask:
        raise InvalidArgument("classes do not cover the group")
    A = SRing(G, masks)
    if A.masks[0] != 1:
        raise Axiom1Violation("{e} is not a class", sets=(A.classes[A.class_of[0]],))
    for i, m in enumerate(A.masks):
        if not A.is_basic(G.set_inv(m)):
            raise Axiom2Violation(f"inverse of class {A.classes[i]} is not a class",
                                  sets=(A.classes[i],))
    for i in range(A.rank):
        for j in range(A.rank):
            A.row(i, j)
    return A


def group_ring(G: Group) -> SRing:
    return validate_sring(G, [[x] for x in G.elements()])


def rank_two(G: Group) -> SRing:
    if G.order == 1:
        return validate_sring(G, [[0]])
    return validate_sring(G, [[0], list(range(1, G.order))])


# sections ------------------------------------------------------------------


def quotient_sring(A: SRing, S: Section) -> SRing:
    """A_S: images of the basic sets inside U under U -> U/L."""
    if not (A.is_a_set(S.upper.mask) and A.is_a_set(S.lower.mask)):
        raise NotASection("section is not an A-section")
    umask = S.upper.mask
    images = set()
    for m in A.masks:
        if m & ~umask == 0:
            images.add(S.project(m))
    return validate_sring(S.quotient, [members(m) for m in images])


def restriction(A: SRing, U: Subgroup) -> tuple[SRing, Section]:
    """A_U as an S-ring over a group isomorphic to U, with the identifying section."""
    from .groups import make_section

    S = make_section(A.group, U, subgroup_from_mask(A.group, 1))
    return quotient_sring(A, S), S


# the Schur-Wielandt lemmas as checked operations ---------------------------


def power_map_classes(A: SRing, X: int, m: int) -> int:
    """X^(m) for a basic set X (a bitmask), asserting it is basic."""
    G = A.group
    if gcd(m, G.order) != 1:
        raise InvalidArgument(f"m = {m} is not coprime to |G| = {G.order}")
    if not A.is_basic(X):
        raise InvalidArgument("X is not a basic set")
    Y = G.set_pow(X, m)
    if not A.is_basic(Y):
        raise PropertyViolation(f"X^({m}) is not a basic set for X = {members(X)}")
    return Y


def omega_mask(G: Group, p: int) -> int:
    return mask_of(x for x in G.elements() if G.pow(x, p) == 0)


def sylow_power_set(A: SRing, X: int, p: int) -> int:
    """X^[p] = {x^p : x in X, |X ∩ Hx| not divisible by p}, H = {g : g^p = e}."""
    G = A.group
    if p < 2 or G.order % p or prime_factors(p) != [p]:
        raise InvalidArgument(f"{p} is not a prime divisor of |G| = {G.order}")
    H = omega_mask(G, p)
    out = 0
    for x in members(X):
        if (X & G.translate(H, x)).bit_count() % p:
            out |= 1 << G.pow(x, p)
    if not A.is_a_set(out):
        raise PropertyViolation(f"X^[{p}] is not an A-set for X = {members(X)}")
    return out


def intersection_numbers(A: SRing, H: int, X: int) -> int:
    """The common value of |X ∩ Hx| over x in X."""
    G = A.group
    if not _is_subgroup(G, H) or not A.is_a_set(H):
        raise InvalidArgument("H is not an A-subgroup")
    vals = {(X & G.translate(H, x)).bit_count() for x in members(X)}
    if len(vals) != 1:
        raise PropertyViolation(f"|X ∩ Hx| takes values {sorted(vals)} on X = {members(X)}")
    return vals.pop()


def _is_subgroup(G: Group, mask: int) -> bool:
    if not mask & 1:
        return False
    xs = members(mask)
    return all((mask >> G.mul(a, b)) & 1 for a in xs for b in xs)


class Verdict(str, Enum):
    HOLDS = "holds"
    NOT_APPLICABLE = "not-applicable"


def generated_mask(G: Group, mask: int) -> int:
    out = 1
    for x in members(mask):
        out = _join(G, out, x)
    return out


def separat_check(A: SRing, X: int, H: int) -> Verdict:
    """If X ∩ H, X \\ H are nonempty and <X ∩ H> <= rad(X \\ H), check
    X = <X> \\ rad(X) and rad(X) <= H."""
    G = A.group
    inside, outside = X & H, X & ~H
    if not inside or not outside:
        return Verdict.NOT_APPLICABLE
    if generated_mask(G, inside) & ~radical_mask(G, outside):
        return Verdict.NOT_APPLICABLE
    rad = radical_mask(G, X)
    if X != generated_mask(G, X) & ~rad or rad & ~H:
        raise PropertyViolation(f"separation conclusion fails for X = {members(X)}")
    return Verdict.HOLDS


def is_p_sring(A: SRing, p: int) -> bool:
    n = A.group.order
    if prime_factors(n) not in ([p], []):
        raise InvalidArgument(f"{A.group.name} is not a {p}-group")

    def ppower(k):
        while k % p == 0:
            k //= p
        return k == 1

    return all(ppower(len(c)) for c in A.classes)


def rationality(A: SRing | Group, X: int) -> bool:
    """X^(m) = X for every m coprime to |G|; accepts an S-ring or its group."""
    G = getattr(A, "group", A)
    return all(G.set_pow(X, m) == X for m in G.units())


# generation by refinement --------------------------------------------------


def _split(classes: list[int], key) -> tuple[list[int], bool]:
    out, changed = [], False
    for Z in classes:
        pieces: dict = {}
        for z in members(Z):
            k = key(z)
            pieces[k] = pieces.get(k, 0) | (1 << z)
        if len(pieces) > 1:
            changed = True
            out.extend(pieces[k] for k in sorted(pieces))
        else:
            out.append(Z)
    return out, changed


def generated_sring(G: Group, sets: Iterable[int]) -> SRing:
    """The smallest S-ring in which every given set (a bitmask) is an A-set.

    Starts from {e}, the given sets and their inverses, then splits classes
    until every product of two classes is constant on each class.
    """
    full = G.full_mask
    classes = [1, full & ~1] if G.order > 1 else [1]
    for S in sets:
        for T in (S, G.set_inv(S)):
            classes, _ = _split(classes, lambda z, T=T: (T >> z) & 1)
    classes = [c for c in classes if c]
    table = G.mul_table
    while True:
        cls = [0] * G.order
        for i, m in enumerate(classes):
            for x in members(m):
                cls[x] = i
        classes, changed = _split(classes, lambda z: cls[G.inv(z)])
        if changed:
            continue
        elems = [members(m) for m in classes]
        for xs in elems:
            for ys in elems:
                counts = [0] * G.order
                for x in xs:
                    row = table[x]
                    for y in ys:
                        counts[row[y]] += 1
                classes, changed = _split(classes, counts.__getitem__)
                if changed:
                    break
            if changed:
                break
        if not changed:
            return SRing(G, classes)
