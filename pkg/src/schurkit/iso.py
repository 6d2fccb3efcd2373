"""Cayley digraphs, automorphism groups of S-rings, and CI tests.

Two CI tests are provided.  The census test compares the canonical form of
Cay(G, S) with every Cay(G, T), |T| = |S|, and needs |G| <= 16.  The
regular-subgroup test computes K = Aut(Cay(G, S)) and checks that every
regular subgroup of K isomorphic to G is conjugate in K to G_r.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import factorial, gcd
from pathlib import Path
from typing import Sequence

from .build import orbit_sring
from .canon import CanonicalForm, ColorDigraph, canonize, canonize_with_automorphisms, isomorphism
from .errors import BudgetExceeded, InternalError, InvalidArgument
from .groups import Group, automorphism_group, mask_of, members, prime_factors
from .perms import (PermGroup, _elements_of_regular, _iter_abelian_bases, close_group,
                    conjugate_subgroup_search, identity, mul, power, regular_subgroups,
                    right_regular)
from .sring import SRing

CENSUS_LIMIT = 16
DEFAULT_BUDGET = 200_000


# digraphs ---------------------------------------------------------------------


def cayley_color_graph(A: SRing) -> ColorDigraph:
    """color[g][h] is the index of the basic set containing h g^-1."""
    G = A.group
    n = G.order
    cls = A.class_of
    inv = [G.inv(g) for g in range(n)]
    cols = [cls[G.mul(h, inv[g])] for g in range(n) for h in range(n)]
    return ColorDigraph(n, cols, A.rank)


def cayley_digraph(G: Group, S: int) -> ColorDigraph:
    """Cay(G, S) with arcs (g, sg), s in S, as a two-color digraph."""
    n = G.order
    inv = [G.inv(g) for g in range(n)]
    cols = [(S >> G.mul(h, inv[g])) & 1 for g in range(n) for h in range(n)]
    return ColorDigraph(n, cols, 2)


def as_mask(S) -> int:
    return S if isinstance(S, int) else mask_of(S)


@lru_cache(maxsize=1 << 16)
def subset_form(G: Group, S: int) -> CanonicalForm:
    return canonize(cayley_digraph(G, S))


# automorphism groups ---------------------------------------------------------------


def color_automorphisms(D: ColorDigraph) -> PermGroup:
    """Aut(D), generated by the leaf equivalences of the canonization search."""
    _, gens = canonize_with_automorphisms(D)
    for g in gens:
        if not D.is_automorphism(g):
            raise InternalError("canonization produced a non-automorphism")
    return close_group(gens, degree=D.n, budget=0, cap=max(factorial(D.n), 1))


def sring_automorphisms(A: SRing) -> PermGroup:
    return color_automorphisms(cayley_color_graph(A))


def two_closure(K: PermGroup, G: Group) -> PermGroup:
    """K^(2) = Aut(V(K, G))."""
    K2 = sring_automorphisms(orbit_sring(G, K))
    if not K2.contains_group(K):
        raise InternalError("two-closure does not contain K")
    return K2


def cayley_iso(G: Group, S, T) -> tuple[int, ...] | None:
    """Some automorphism phi of G with S^phi = T (identity tried first)."""
    S, T = as_mask(S), as_mask(T)
    if S.bit_count() != T.bit_count():
        return None
    xs = members(S)
    for phi in automorphism_group(G).elements:
        if all((T >> phi[x]) & 1 for x in xs):
            return phi
    return None


def is_arc_isomorphism(G: Group, S: int, T: int, f: Sequence[int]) -> bool:
    """Whether f maps the arcs of Cay(G, S) exactly onto those of Cay(G, T)."""
    n = G.order
    if sorted(f) != list(range(n)):
        return False
    inv = [G.inv(g) for g in range(n)]
    for g in range(n):
        for h in range(n):
            a = (S >> G.mul(h, inv[g])) & 1
            b = (T >> G.mul(f[h], inv[f[g]])) & 1
            if a != b:
                return False
    return True


# verdicts ------------------------------------------------------------------------


@dataclass(frozen=True)
class CIVerdict:
    status: str  # "ci", "non-ci" or "undecided"
    method: str  # "orbit-census" or "regular-subgroup"
    witness: tuple | None = None  # (T mask or partition, f) for non-ci
    detail: str = ""

    @property
    def decided(self) -> bool:
        return self.status != "undecided"

    def to_json(self) -> dict:
        out = {"status": self.status, "method": self.method}
        if self.witness is not None:
            t, f = self.witness
            out["witness"] = {"T": t if isinstance(t, int) else [list(c) for c in t],
                              "f": list(f)}
        if self.detail:
            out["detail"] = self.detail
        return out


def verify_subset_witness(G: Group, S: int, T: int, f: Sequence[int]) -> bool:
    """Arc bijection holds and no automorphism of G maps S to T."""
    return is_arc_isomorphism(G, S, T, f) and cayley_iso(G, S, T) is None


def _census(G: Group, S: int) -> CIVerdict:
    if G.order > CENSUS_LIMIT:
        raise BudgetExceeded(f"orbit census needs |G| <= {CENSUS_LIMIT}")
    form = subset_form(G, S)
    auts = automorphism_group(G).elements
    orbit = {_image(phi, S) for phi in auts}
    size, has_e = S.bit_count(), S & 1
    rest = [x for x in range(1, G.order)]
    for k in combinations(rest, size - has_e):
        T = mask_of(k) | has_e
        if T in orbit:
            continue
        other = subset_form(G, T)
        if other == form:
            f = isomorphism(form, other)
            if not verify_subset_witness(G, S, T, f):
                raise InternalError("census witness failed re-verification")
            return CIVerdict("non-ci", "orbit-census", (T, f))
    return CIVerdict("ci", "orbit-census")


def _image(f: Sequence[int], mask: int) -> int:
    out = 0
    for x in members(mask):
        out |= 1 << f[x]
    return out


def _point_map(G: Group, R: PermGroup) -> list[int]:
    """lambda with lambda(g) = 0^psi(g) for an isomorphism psi: G -> R."""
    n = G.order
    basis = next(_iter_abelian_bases(_elements_of_regular(R), list(G.factors)))
    lam = [0] * n
    for g in range(n):
        p = identity(n)
        for b, e in zip(basis, G.coords(g)):
            p = mul(p, power(b, e))
        lam[g] = p[0]
    return lam


def holomorph_part(K: PermGroup, G: Group) -> int:
    """|K ∩ Aut(G)|, automorphisms acting on element indices."""
    return sum(1 for phi in automorphism_group(G).elements if phi in K)


@dataclass
class _Split:
    """K = K1 x K2 acting coordinatewise on G = G1 x G2."""

    G1: Group
    G2: Group
    K1: PermGroup
    K2: PermGroup
    point: dict[tuple[int, int], int]  # (q1, q2) -> element of G

    def lift(self, R: PermGroup, side: int) -> PermGroup:
        """R on one factor times the regular group of the other, acting on G."""
        other = right_regular(self.G2 if side == 0 else self.G1)
        gens = []
        for r in R.generators:
            gens.append(tuple(self.point[(r[a], b) if side == 0 else (a, r[b])]
                              for (a, b) in self._coords()))
        for t in other.generators:
            gens.append(tuple(self.point[(a, t[b]) if side == 0 else (t[a], b)]
                              for (a, b) in self._coords()))
        return close_group(gens, degree=len(self.point), budget=0,
                           cap=factorial(len(self.point)))

    def _coords(self) -> list[tuple[int, int]]:
        inv = {x: c for c, x in self.point.items()}
        return [inv[x] for x in range(len(inv))]


def _coprime_split(K: PermGroup, G: Group) -> _Split | None:
    """Split K along the Sylow p-part of G when K is a direct product there.

    Needs |K1| coprime to |G2| or |K2| coprime to |G1|.  Then a regular
    subgroup R of K isomorphic to G is R1 x R2 with Ri regular in Ki: the
    Hall part of R that K1 cannot see lies in 1 x K2 and is regular there,
    so the other Hall part centralizes a regular group of coprime order and
    has trivial image in K2.
    """
    from .groups import make_section, subgroup_from_mask

    n = G.order
    triv = subgroup_from_mask(G, 1)
    for p in sorted(set(prime_factors(n))):
        m1 = mask_of(x for x in G.elements() if set(prime_factors(G.element_order(x))) <= {p})
        m2 = mask_of(x for x in G.elements() if G.element_order(x) % p)
        if m1 == G.full_mask or m2 == G.full_mask:
            continue
        S1 = make_section(G, subgroup_from_mask(G, m1), triv)
        S2 = make_section(G, subgroup_from_mask(G, m2), triv)
        c1, c2 = [0] * n, [0] * n
        point = {}
        for a in members(m1):
            for b in members(m2):
                x = G.mul(a, b)
                c1[x], c2[x] = S1.coset_of[a], S2.coset_of[b]
                point[(c1[x], c2[x])] = x
        gens1, gens2 = [], []
        ok = True
        for k in K.generators:
            f1, f2 = {}, {}
            for x in range(n):
                y = k[x]
                if f1.setdefault(c1[x], c1[y]) != c1[y] or f2.setdefault(c2[x], c2[y]) != c2[y]:
                    ok = False
                    break
            if not ok:
                break
            gens1.append(tuple(f1[i] for i in range(S1.order)))
            gens2.append(tuple(f2[i] for i in range(S2.order)))
        if not ok:
            continue
        d1, d2 = S1.order, S2.order
        K1 = close_group(gens1, degree=d1, budget=0, cap=factorial(d1))
        K2 = close_group(gens2, degree=d2, budget=0, cap=factorial(d2))
        if K1.order * K2.order != K.order:
            continue
        if gcd(K1.order, d2) == 1 or gcd(K2.order, d1) == 1:
            return _Split(S1.quotient, S2.quotient, K1, K2, point)
    return None


def _nonconjugate_regular(K: PermGroup, G: Group, budget: int) -> PermGroup | None:
    """A regular subgroup of K isomorphic to G and not conjugate to G_r, or None.

    The conjugacy class of G_r in K has |K| / (|G| |K ∩ Aut(G)|) members, so
    comparing that with the number of regular subgroups settles the CI
    question; a representative is only searched for when they differ.
    """
    n = G.order
    if K.order == factorial(n):
        return None
    split = _coprime_split(K, G)
    if split is not None:
        for side, (Kf, Gf) in enumerate(((split.K1, split.G1), (split.K2, split.G2))):
            R = _nonconjugate_regular(Kf, Gf, budget)
            if R is not None:
                return split.lift(R, side)
        return None
    regs = regular_subgroups(K, G, budget=budget)
    cls = K.order // (n * holomorph_part(K, G))
    if len(regs) < cls:
        raise InternalError("fewer regular subgroups than conjugates of G_r")
    if len(regs) == cls:
        return None
    Gr = right_regular(G)
    for R in regs:
        if conjugate_subgroup_search(K, R, Gr, budget=budget) is None:
            return R
    raise InternalError("count mismatch but every regular subgroup is conjugate to G_r")


def _regular_method(G: Group, S: int, budget: int) -> CIVerdict:
    try:
        K = color_automorphisms(cayley_digraph(G, S))
        R = _nonconjugate_regular(K, G, budget)
    except BudgetExceeded as exc:
        return CIVerdict("undecided", "regular-subgroup", detail=str(exc))
    if R is None:
        return CIVerdict("ci", "regular-subgroup")
    lam = _point_map(G, R)
    T = mask_of(t for t in range(G.order) if (S >> lam[t]) & 1)
    f = [0] * G.order
    for g, v in enumerate(lam):
        f[v] = g
    f = tuple(f)
    if not verify_subset_witness(G, S, T, f):
        raise InternalError("regular-subgroup witness failed re-verification")
    return CIVerdict("non-ci", "regular-subgroup", (T, f))


def ci_subset(G: Group, S, method: str | None = None, budget: int = DEFAULT_BUDGET) -> CIVerdict:
    """Decide whether S is a CI-subset of G.

    The default method is the census for |G| <= 16, regular subgroups above.
    """
    S = as_mask(S)
    if S >> G.order:
        raise InvalidArgument("S contains elements outside G")
    if method is None:
        method = "orbit-census" if G.order <= CENSUS_LIMIT else "regular-subgroup"
    if method == "orbit-census":
        return _census(G, S)
    if method == "regular-subgroup":
        return _regular_method(G, S, budget)
    raise InvalidArgument(f"unknown method {method!r}")


def ci_sring(A: SRing, budget: int = DEFAULT_BUDGET) -> CIVerdict:
    """Whether A is a CI-S-ring, by the regular-subgroup criterion on Aut(A)."""
    G = A.group
    try:
        K = sring_automorphisms(A)
        R = _nonconjugate_regular(K, G, budget)
    except BudgetExceeded as exc:
        return CIVerdict("undecided", "regular-subgroup", detail=str(exc))
    if R is None:
        return CIVerdict("ci", "regular-subgroup")
    lam = _point_map(G, R)
    f = [0] * G.order
    for g, v in enumerate(lam):
        f[v] = g
    image = tuple(sorted(tuple(sorted(f[x] for x in X)) for X in A.classes))
    return CIVerdict("non-ci", "regular-subgroup", (image, tuple(f)))


# the G-complete order ------------------------------------------------------------


def _same_group(K1: PermGroup, K2: PermGroup) -> bool:
    return K1.order == K2.order and K2.contains_group(K1)


def g_complete_leq(K1: PermGroup, K2: PermGroup, G: Group,
                   budget: int = DEFAULT_BUDGET) -> bool | None:
    """Whether K1 <=_G K2; None when the search ran out of budget."""
    Gr = right_regular(G)
    if not (K1.contains_group(Gr) and K2.contains_group(K1)):
        raise InvalidArgument("expected G_r <= K1 <= K2")
    if K1.order == K2.order:
        return True
    try:
        if K1.order == G.order:
            return _nonconjugate_regular(K2, G, budget) is None
        regs2 = regular_subgroups(K2, G, budget=budget)
        regs1 = regular_subgroups(K1, G, budget=budget)
        for R in regs2:
            if K1.contains_group(R):
                continue
            if not any(conjugate_subgroup_search(K2, R, R1, budget=budget) is not None
                       for R1 in regs1):
                return False
        return True
    except BudgetExceeded:
        return None


@dataclass
class MinimalFamily:
    minimal: list[int]
    excluded: dict[int, int]  # i -> j with K_j < K_i and K_j <=_G K_i
    undecided: list[tuple[int, int]]


def min_family_elements(family: Sequence[PermGroup], G: Group,
                        budget: int = DEFAULT_BUDGET) -> MinimalFamily:
    """The <=_G-minimal members of a family of two-closed overgroups of G_r.

    Only comparisons inside the family are made.  A member stays in the
    minimal list unless some strictly smaller member is shown G-complete in
    it; undecided comparisons are listed.
    """
    order = sorted(range(len(family)), key=lambda i: (family[i].order, i))
    excluded: dict[int, int] = {}
    undecided: list[tuple[int, int]] = []
    for i in range(len(family)):
        Ki = family[i]
        for j in order:
            Kj = family[j]
            if j == i or Kj.order > Ki.order or not Ki.contains_group(Kj):
                continue
            if Kj.order == Ki.order:
                if j < i:
                    excluded[i] = j
                    break
                continue
            res = g_complete_leq(Kj, Ki, G, budget)
            if res is None:
                undecided.append((j, i))
                if Kj.order == G.order:
                    # the regular subgroups of K_i are out of reach, and every
                    # other comparison needs them too
                    break
            elif res:
                excluded[i] = j
                break
    minimal = [i for i in range(len(family)) if i not in excluded]
    return MinimalFamily(minimal, excluded, undecided)


# persistence -----------------------------------------------------------------------


class FormCache:
    """Canonical forms on disk, one file per (group, palette, input) key."""

    def __init__(self, root: str | os.PathLike):
        self.root = Path(root) / "forms"

    @staticmethod
    def key(G: Group, palette: int, payload: bytes) -> str:
        h = hashlib.sha256()
        h.update(json.dumps(G.to_json(), sort_keys=True).encode())
        h.update(b"|%d|" % palette)
        h.update(payload)
        return h.hexdigest()

    def _path(self, key: str) -> Path:
        return self.root / key[:2] / f"{key}.json"

    def get(self, key: str) -> CanonicalForm | None:
        p = self._path(key)
        if not p.exists():
            return None
        obj = json.loads(p.read_text())
        return CanonicalForm(bytes.fromhex(obj["matrix"]), tuple(obj["labeling"]),
                             int(obj["hash"]), int(obj["n"]))

    def put(self, key: str, form: CanonicalForm) -> None:
        p = self._path(key)
        p.parent.mkdir(parents=True, exist_ok=True)
        data = json.dumps({"hash": form.hash, "n": form.n, "matrix": form.canon_matrix.hex(),
                           "labeling": list(form.labeling)}, sort_keys=True)
        atomic_write(p, data)

    def subset_form(self, G: Group, S: int) -> CanonicalForm:
        key = self.key(G, 2, S.to_bytes(8, "big"))
        form = self.get(key)
        if form is None:
            form = subset_form(G, S)
            self.put(key, form)
        return form


def atomic_write(path: str | os.PathLike, data: str | bytes) -> None:
    """Write to a temporary file in the same directory, then rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, mode) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
