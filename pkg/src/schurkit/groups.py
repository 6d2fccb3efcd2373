"""Finite abelian groups given as products of cyclic factors.

Elements are dense integer indices 0..|G|-1 (mixed radix, first factor most
significant) so that element sets can be stored as Python int bitmasks.  The
group is written multiplicatively to match the usual S-ring notation, even
though the underlying arithmetic is componentwise addition.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import product
from math import gcd, prod
from typing import Iterable, Sequence

from .errors import BudgetExceeded, InternalError, InvalidArgument

MAX_ORDER = 64


def mask_of(elements: Iterable[int]) -> int:
    m = 0
    for x in elements:
        m |= 1 << x
    return m


def members(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def prime_factors(n: int) -> list[int]:
    ps, p = [], 2
    while p * p <= n:
        if n % p == 0:
            ps.append(p)
            while n % p == 0:
                n //= p
        p += 1
    if n > 1:
        ps.append(n)
    return ps


def is_prime(n: int) -> bool:
    return n >= 2 and prime_factors(n) == [n]


def abelian_type(element_orders: Sequence[int]) -> tuple[int, ...]:
    """Primary decomposition of an abelian group from its element orders.

    An abelian group is determined up to isomorphism by how many elements
    have order dividing each prime power, which is all this uses.  The result
    lists prime powers sorted by prime, larger powers first.
    """
    n = len(element_orders)
    out: list[int] = []
    for p in prime_factors(n):
        ranks = []  # ranks[k-1] = #{i : e_i >= k}
        prev, k = 0, 1
        while True:
            count = sum(1 for o in element_orders if (p**k) % o == 0)
            logc = 0
            while count > 1:
                count //= p
                logc += 1
            step = logc - prev
            if step == 0:
                break
            ranks.append(step)
            prev = logc
            k += 1
        # exponents are the conjugate partition of ranks
        exps = [sum(1 for r in ranks if r > i) for i in range(ranks[0])] if ranks else []
        out.extend(p**e for e in sorted(exps, reverse=True))
    return tuple(out)


class Group:
    """Finite abelian group C_{d1} x ... x C_{dk}.

    The trivial group is ``Group(())``.  Instances are immutable and cache
    their multiplication table, so construction is O(|G|^2).
    """

    __slots__ = ("factors", "order", "_weights", "_mul", "_inv", "_ord", "__weakref__")

    def __init__(self, factor_orders: Iterable[int]):
        factors = tuple(int(d) for d in factor_orders)
        if any(d < 2 for d in factors):
            raise InvalidArgument(f"factor orders must be >= 2, got {factors}")
        order = prod(factors)
        if order > MAX_ORDER:
            raise InvalidArgument(f"groups of order > {MAX_ORDER} are not supported")
        self.factors = factors
        self.order = order
        w = [1] * len(factors)
        for i in range(len(factors) - 2, -1, -1):
            w[i] = w[i + 1] * factors[i + 1]
        self._weights = tuple(w)
        vecs = [self.coords(i) for i in range(order)]
        self._mul = tuple(
            tuple(self.index([(a + b) % d for a, b, d in zip(u, v, factors)]) for v in vecs)
            for u in vecs
        )
        self._inv = tuple(self.index([(-a) % d for a, d in zip(u, factors)]) for u in vecs)
        orders = []
        for u in vecs:
            o = 1
            for a, d in zip(u, factors):
                o = o * (d // gcd(a, d)) // gcd(o, d // gcd(a, d))
            orders.append(o)
        self._ord = tuple(orders)

    # construction helpers -------------------------------------------------

    @classmethod
    def cyclic(cls, n: int) -> "Group":
        return cls(() if n == 1 else (n,))

    @classmethod
    def parse(cls, text: str) -> "Group":
        """Parse ``"C4xC3^2"``, ``"4,3,3"`` or ``'{"factors":[4,3,3]}'``."""
        text = text.strip()
        if text.startswith("{"):
            return cls.from_json(json.loads(text))
        if re.fullmatch(r"[\d,\s]+", text):
            return cls(int(t) for t in text.split(",") if t.strip())
        factors: list[int] = []
        for part in re.split(r"\s*[x×*]\s*", text):
            m = re.fullmatch(r"C_?(\d+)(?:\^(\d+))?", part.strip())
            if not m:
                raise InvalidArgument(f"cannot parse group {text!r}")
            d, e = int(m.group(1)), int(m.group(2) or 1)
            if d == 0:
                raise InvalidArgument(f"C0 is not a group in {text!r}")
            if d > 1:
                factors.extend([d] * e)
        return cls(factors)

    @classmethod
    def from_json(cls, obj) -> "Group":
        if not isinstance(obj, dict) or "factors" not in obj:
            raise InvalidArgument("group JSON needs a 'factors' list")
        return cls(obj["factors"])

    def to_json(self) -> dict:
        return {"factors": list(self.factors)}

    def direct_product(self, other: "Group") -> "Group":
        return Group(self.factors + other.factors)

    @property
    def name(self) -> str:
        return "x".join(f"C{d}" for d in self.factors) or "C1"

    def __repr__(self) -> str:
        return f"Group({list(self.factors)})"

    def __eq__(self, other) -> bool:
        return isinstance(other, Group) and self.factors == other.factors

    def __hash__(self) -> int:
        return hash(("Group", self.factors))

    def __len__(self) -> int:
        return self.order

    # element arithmetic ---------------------------------------------------

    identity = 0

    def elements(self) -> range:
        return range(self.order)

    def coords(self, i: int) -> tuple[int, ...]:
        if not 0 <= i < self.order:
            raise InvalidArgument(f"element index {i} out of range")
        return tuple((i // w) % d for w, d in zip(self._weights, self.factors))

    def index(self, coords: Sequence[int]) -> int:
        if len(coords) != len(self.factors):
            raise InvalidArgument(f"expected {len(self.factors)} coordinates")
        return sum((c % d) * w for c, d, w in zip(coords, self.factors, self._weights))

    def element(self, i: int) -> "GroupElement":
        return GroupElement(self, i)

    def mul(self, a: int, b: int) -> int:
        return self._mul[a][b]

    def inv(self, a: int) -> int:
        return self._inv[a]

    def pow(self, a: int, m: int) -> int:
        u = self.coords(a)
        return self.index([x * m for x in u])

    def element_order(self, a: int) -> int:
        return self._ord[a]

    @property
    def mul_table(self) -> tuple[tuple[int, ...], ...]:
        return self._mul

    @property
    def exponent(self) -> int:
        return max(self._ord)

    @property
    def primary_type(self) -> tuple[int, ...]:
        return abelian_type(self._ord)

    def is_cyclic(self) -> bool:
        return self.exponent == self.order

    def is_p_group(self) -> bool:
        return len(prime_factors(self.order)) <= 1

    # set operations, all on bitmasks ------------------------------------

    def set_mul(self, xmask: int, ymask: int) -> int:
        out = 0
        ys = members(ymask)
        for x in members(xmask):
            row = self._mul[x]
            for y in ys:
                out |= 1 << row[y]
        return out

    def translate(self, mask: int, g: int) -> int:
        row = self._mul[g]
        return mask_of(row[x] for x in members(mask))

    def set_inv(self, mask: int) -> int:
        return mask_of(self._inv[x] for x in members(mask))

    def set_pow(self, mask: int, m: int) -> int:
        return mask_of(self.pow(x, m) for x in members(mask))

    @property
    def full_mask(self) -> int:
        return (1 << self.order) - 1

    def units(self) -> list[int]:
        """Integers 1 <= m < exp(G) coprime to |G| (representatives of power maps)."""
        e = self.exponent
        return [m for m in range(1, max(e, 2)) if gcd(m, self.order) == 1] or [1]


@dataclass(frozen=True)
class GroupElement:
    group: Group = field(repr=False)
    index: int

    @property
    def coords(self) -> tuple[int, ...]:
        return self.group.coords(self.index)

    def __mul__(self, other: "GroupElement") -> "GroupElement":
        return GroupElement(self.group, self.group.mul(self.index, other.index))

    def __pow__(self, m: int) -> "GroupElement":
        return GroupElement(self.group, self.group.pow(self.index, m))

    def inverse(self) -> "GroupElement":
        return GroupElement(self.group, self.group.inv(self.index))

    @property
    def order(self) -> int:
        return self.group.element_order(self.index)


@dataclass(frozen=True)
class Subgroup:
    elements: tuple[int, ...]
    generators: tuple[int, ...]

    @property
    def order(self) -> int:
        return len(self.elements)

    @property
    def mask(self) -> int:
        return mask_of(self.elements)

    def __contains__(self, x: int) -> bool:
        return x in set(self.elements)

    def __le__(self, other: "Subgroup") -> bool:
        return self.mask & ~other.mask == 0

    def to_json(self) -> list[int]:
        return list(self.elements)


def _join(G: Group, mask: int, g: int) -> int:
    if (mask >> g) & 1:
        return mask
    out, cur = mask, g
    while not (mask >> cur) & 1:
        out |= G.translate(mask, cur)
        cur = G.mul(cur, g)
    return out


def subgroup_from_mask(G: Group, mask: int) -> Subgroup:
    elems = members(mask)
    gens: list[int] = []
    cur = 1  # mask of {e}
    for x in sorted(elems, key=lambda x: (-G.element_order(x), x)):
        if not (cur >> x) & 1:
            gens.append(x)
            cur = _join(G, cur, x)
    return Subgroup(tuple(elems), tuple(sorted(gens)))


def generate_subgroup(G: Group, X: Iterable[int]) -> Subgroup:
    """Smallest subgroup containing X (the trivial subgroup for empty X)."""
    mask = 1
    for x in X:
        if not 0 <= x < G.order:
            raise InvalidArgument(f"element {x} not in {G.name}")
        mask = _join(G, mask, x)
    return subgroup_from_mask(G, mask)


def radical_mask(G: Group, mask: int) -> int:
    xs = members(mask)
    out = 0
    for g in G.elements():
        row = G.mul_table[g]
        if all((mask >> row[x]) & 1 for x in xs):
            out |= 1 << g
    return out


def radical(G: Group, X: Iterable[int]) -> Subgroup:
    """rad(X) = {g : gX = X}."""
    mask = mask_of(X)
    if mask == 0:
        raise InvalidArgument("radical of the empty set is undefined")
    return subgroup_from_mask(G, radical_mask(G, mask))


def subgroup_masks(G: Group, bound: int = MAX_ORDER) -> list[int]:
    if G.order > bound:
        raise BudgetExceeded(f"|G| = {G.order} exceeds subgroup lattice bound {bound}")
    cyclic = sorted({_join(G, 1, g) for g in G.elements()})
    seen = set(cyclic)
    frontier = list(cyclic)
    while frontier:
        nxt = []
        for h in frontier:
            for c in cyclic:
                j = h
                for g in members(c & ~h):
                    j = _join(G, j, g)
                if j not in seen:
                    seen.add(j)
                    nxt.append(j)
        frontier = nxt
    return sorted(seen, key=lambda m: (m.bit_count(), members(m)))


def subgroup_lattice(G: Group, bound: int = MAX_ORDER) -> list[Subgroup]:
    """All subgroups of G, sorted by order then by element list."""
    return [subgroup_from_mask(G, m) for m in subgroup_masks(G, bound)]


# sections ---------------------------------------------------------------


def _find_basis(order_of, mul, identity, elems, target):
    """Elements b_i with |b_i| = target[i] generating a direct product.

    ``order_of`` and ``mul`` act on whatever element labels ``elems`` holds.
    Returns the list of basis elements; raises InternalError if none exists.
    """
    want = prod(target)

    def span(basis):
        cur = {identity}
        for b in basis:
            nxt = set()
            for x in cur:
                y = x
                for _ in range(order_of(b)):
                    nxt.add(y)
                    y = mul(y, b)
            cur = nxt
        return cur

    def rec(basis, size):
        if len(basis) == len(target):
            return basis if size == want else None
        d = target[len(basis)]
        for b in elems:
            if order_of(b) != d:
                continue
            s = span(basis + [b])
            if len(s) == size * d:
                r = rec(basis + [b], size * d)
                if r is not None:
                    return r
        return None

    basis = rec([], 1)
    if basis is None:
        raise InternalError(f"no basis of type {target} found")
    return basis


@dataclass(frozen=True)
class Section:
    """The section U/L with cosets listed in quotient-element order.

    ``coset_of[x]`` is the quotient index of Lx for x in U, and -1 outside U,
    so ``coset_of`` is the canonical epimorphism pi restricted to U.
    """

    group: Group = field(repr=False)
    upper: Subgroup
    lower: Subgroup
    cosets: tuple[tuple[int, ...], ...]
    coset_of: tuple[int, ...] = field(repr=False)
    quotient: Group = field(repr=False)

    @property
    def order(self) -> int:
        return len(self.cosets)

    def pi(self, x: int) -> int:
        q = self.coset_of[x]
        if q < 0:
            raise InvalidArgument(f"element {x} is not in the upper subgroup")
        return q

    def project(self, mask: int) -> int:
        return mask_of(self.coset_of[x] for x in members(mask))

    def preimage(self, qmask: int) -> int:
        out = 0
        for q in members(qmask):
            out |= mask_of(self.cosets[q])
        return out

    def to_json(self) -> dict:
        return {"upper": list(self.upper.elements), "lower": list(self.lower.elements)}


def make_section(G: Group, U: Subgroup, L: Subgroup) -> Section:
    umask, lmask = U.mask, L.mask
    if lmask & ~umask:
        raise InvalidArgument("lower subgroup is not contained in the upper subgroup")
    raw: list[int] = []
    rest = umask
    while rest:
        x = (rest & -rest).bit_length() - 1
        c = G.translate(lmask, x)
        raw.append(c)
        rest &= ~c
    rep = {c: min(members(c)) for c in raw}
    where = {}
    for i, c in enumerate(raw):
        for x in members(c):
            where[x] = i

    def qmul(i, j):
        return where[G.mul(rep[raw[i]], rep[raw[j]])]

    def qord(i):
        k, cur = 1, i
        while cur != 0:
            cur = qmul(cur, i)
            k += 1
        return k

    idx = list(range(len(raw)))
    qtype = abelian_type([qord(i) for i in idx])
    Q = Group(qtype)
    basis = _find_basis(qord, qmul, 0, idx, list(qtype))
    # quotient element with coords v is prod basis[i]^v[i]
    order_list = [0] * Q.order
    for q in Q.elements():
        cur = 0
        for b, v in zip(basis, Q.coords(q)):
            for _ in range(v):
                cur = qmul(cur, b)
        order_list[q] = cur
    coset_of = [-1] * G.order
    cosets = []
    for q, i in enumerate(order_list):
        elems = members(raw[i])
        cosets.append(tuple(elems))
        for x in elems:
            coset_of[x] = q
    return Section(G, U, L, tuple(cosets), tuple(coset_of), Q)


# automorphisms ----------------------------------------------------------


@dataclass(frozen=True)
class AutGroup:
    group: Group = field(repr=False)
    elements: tuple[tuple[int, ...], ...]
    generators: tuple[tuple[int, ...], ...]

    def __len__(self) -> int:
        return len(self.elements)

    def __iter__(self):
        return iter(self.elements)


def compose(f: Sequence[int], g: Sequence[int]) -> tuple[int, ...]:
    """Apply f first, then g."""
    return tuple(g[x] for x in f)


def automorphism_group(G: Group, bound: int = MAX_ORDER) -> AutGroup:
    """All automorphisms of G as permutations of element indices.

    Brute force over images of the factor generators with the right orders;
    identity comes first, then lexicographic order.
    """
    if G.order > bound:
        raise BudgetExceeded(f"|G| = {G.order} exceeds automorphism bound {bound}")
    return _automorphism_group(G)


@lru_cache(maxsize=None)
def _automorphism_group(G: Group) -> AutGroup:
    cands = [[y for y in G.elements() if G.element_order(y) == d] for d in G.factors]
    coords = [G.coords(x) for x in G.elements()]
    auts = []
    for images in product(*cands):
        # multiples[i][a] = images[i]^a
        mult = []
        for y, d in zip(images, G.factors):
            row, cur = [], 0
            for _ in range(d):
                row.append(cur)
                cur = G.mul(cur, y)
            mult.append(row)
        img = []
        for u in coords:
            cur = 0
            for i, a in enumerate(u):
                cur = G.mul(cur, mult[i][a])
            img.append(cur)
        if len(set(img)) == G.order:
            auts.append(tuple(img))
    ident = tuple(G.elements())
    auts.sort(key=lambda a: (a != ident, a))
    # greedy generating subset
    gens: list[tuple[int, ...]] = []
    closure = {ident}
    for a in auts:
        if a in closure:
            continue
        gens.append(a)
        frontier = list(closure)
        closure = set(closure)
        while frontier:
            nxt = []
            for x in frontier:
                for g in gens:
                    y = compose(x, g)
                    if y not in closure:
                        closure.add(y)
                        nxt.append(y)
            frontier = nxt
    return AutGroup(G, tuple(auts), tuple(gens))


def is_automorphism(G: Group, image: Sequence[int]) -> bool:
    if len(image) != G.order or sorted(image) != list(G.elements()):
        return False
    return all(
        image[G.mul(x, y)] == G.mul(image[x], image[y]) for x in G.elements() for y in G.elements()
    )


# the class E_c and coset order lifting ---------------------------------


def in_class_ec(G: Group) -> bool:
    """Every Sylow subgroup elementary abelian or cyclic of order 4."""
    by_prime: dict[int, list[int]] = {}
    for q in G.primary_type:
        by_prime.setdefault(prime_factors(q)[0], []).append(q)
    for p, qs in by_prime.items():
        if all(q == p for q in qs):
            continue
        if p == 2 and qs == [4]:
            continue
        return False
    return True


def coset_order_lift(G: Group, L: Subgroup, x: int, y: int) -> int:
    """Some y' in Ly with |y'| = |x|.

    Preconditions (checked): G in E_c, x, y outside L, |x| an odd prime or 4,
    and Lx, Ly of equal order in G/L.  Candidates are tried starting with y
    itself, then by increasing index.
    """
    lmask = L.mask
    if not in_class_ec(G):
        raise InvalidArgument(f"{G.name} is not in the class E_c")
    if (lmask >> x) & 1 or (lmask >> y) & 1:
        raise InvalidArgument("x and y must lie outside L")
    k = G.element_order(x)
    if not (k == 4 or (k % 2 == 1 and is_prime(k))):
        raise InvalidArgument(f"|x| = {k} is neither an odd prime nor 4")

    def coset_order(z):
        m, cur = 1, z
        while not (lmask >> cur) & 1:
            cur = G.mul(cur, z)
            m += 1
        return m

    if coset_order(x) != coset_order(y):
        raise InvalidArgument("Lx and Ly have different orders in G/L")
    coset = sorted(G.mul(l, y) for l in L.elements)
    coset.remove(y)
    for cand in [y] + coset:
        if G.element_order(cand) == k:
            return cand
    raise InternalError(f"no element of order {k} in the coset of {y}")
