"""Permutation groups of small degree.

Permutations are tuples of images and act on the right: ``mul(p, q)`` applies
p first, then q.  Groups are stored by a base and strong generating set built
with deterministic Schreier-Sims; explicit transversals are fine at degree
<= 64.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from math import factorial, gcd
from typing import Callable, Iterable, Iterator, Sequence

from .errors import BudgetExceeded, InvalidArgument
from .groups import Group, abelian_type

Perm = tuple[int, ...]

ORDER_CAP = 10**9
ENUM_BUDGET = 50_000


def identity(n: int) -> Perm:
    return tuple(range(n))


def mul(p: Perm, q: Perm) -> Perm:
    return tuple([q[i] for i in p])


def inv(p: Perm) -> Perm:
    out = [0] * len(p)
    for i, j in enumerate(p):
        out[j] = i
    return tuple(out)


def power(p: Perm, k: int) -> Perm:
    out = identity(len(p))
    base = p
    while k:
        if k & 1:
            out = mul(out, base)
        base = mul(base, base)
        k >>= 1
    return out


def cycles(p: Perm) -> list[tuple[int, ...]]:
    seen = [False] * len(p)
    out = []
    for i in range(len(p)):
        if seen[i]:
            continue
        c = [i]
        seen[i] = True
        j = p[i]
        while j != i:
            seen[j] = True
            c.append(j)
            j = p[j]
        out.append(tuple(c))
    return out


def perm_order(p: Perm) -> int:
    o = 1
    for c in cycles(p):
        o = o * len(c) // gcd(o, len(c))
    return o


def is_semiregular(p: Perm) -> bool:
    lengths = {len(c) for c in cycles(p)}
    return len(lengths) == 1


def check_perm(p: Sequence[int], n: int | None = None) -> Perm:
    p = tuple(int(x) for x in p)
    if sorted(p) != list(range(len(p))) or (n is not None and len(p) != n):
        raise InvalidArgument(f"not a permutation of degree {n}: {p}")
    return p


@dataclass
class _Level:
    point: int
    gens: list
    trans: dict  # orbit point b -> u with u[point] == b, insertion order = BFS order


def _transversal(point: int, gens: Sequence[Perm], n: int) -> dict:
    trans = {point: identity(n)}
    frontier = [point]
    while frontier:
        nxt = []
        for c in frontier:
            uc = trans[c]
            for s in gens:
                d = s[c]
                if d not in trans:
                    trans[d] = mul(uc, s)
                    nxt.append(d)
        frontier = nxt
    return trans


def _choose_point(h: Perm) -> int:
    # smallest cycle of h first, ties by point index
    best = None
    for c in cycles(h):
        if len(c) > 1:
            key = (len(c), min(c))
            if best is None or key < best:
                best = key
    return best[1]


def _schreier_sims(n: int, gens: Sequence[Perm], base_prefix: Sequence[int], cap: int):
    ident = identity(n)
    seen, sgens = set(), []
    for g in gens:
        if g != ident and g not in seen:
            seen.add(g)
            sgens.append(g)
    base = list(base_prefix)
    for g in sgens:
        if all(g[b] == b for b in base):
            base.append(_choose_point(g))
    levels = []
    for i, b in enumerate(base):
        lg = [g for g in sgens if all(g[c] == c for c in base[:i])]
        levels.append(_Level(b, lg, _transversal(b, lg, n)))

    def sift(h, start):
        for l in range(start, len(levels)):
            lev = levels[l]
            b = h[lev.point]
            u = lev.trans.get(b)
            if u is None:
                return h, l
            h = mul(h, inv(u))
        return h, len(levels)

    def bound():
        o = 1
        for lev in levels:
            o *= len(lev.trans)
        return o

    i = len(levels) - 1
    while i >= 0:
        restart = False
        lev = levels[i]
        for b in list(lev.trans):
            ub = lev.trans[b]
            for s in list(lev.gens):
                bs = s[b]
                ubs = mul(ub, s)
                ubs_t = lev.trans[bs]
                if ubs == ubs_t:
                    continue
                h, j = sift(mul(ubs, inv(ubs_t)), i + 1)
                if h == ident:
                    continue
                if j == len(levels):
                    levels.append(_Level(_choose_point(h), [], {}))
                for l in range(i + 1, j + 1):
                    levels[l].gens.append(h)
                    levels[l].trans = _transversal(levels[l].point, levels[l].gens, n)
                if bound() > cap:
                    raise BudgetExceeded(f"group order exceeds cap {cap}")
                i = j
                restart = True
                break
            if restart:
                break
        if not restart:
            i -= 1
    return levels


class PermGroup:
    """A permutation group with a base and strong generating set.

    ``elements`` is populated when the order is at most ``budget``.
    """

    def __init__(self, degree: int, generators: Sequence[Perm], levels, budget: int = ENUM_BUDGET):
        self.degree = degree
        self.generators = tuple(generators)
        self._levels = levels
        o = 1
        for lev in levels:
            o *= len(lev.trans)
        self.order = o
        self._based: dict[tuple, PermGroup] = {}
        self.elements: tuple[Perm, ...] | None = None
        if o <= budget:
            self.elements = tuple(sorted(self.iter_elements()))

    @property
    def base(self) -> tuple[int, ...]:
        return tuple(lev.point for lev in self._levels)

    @property
    def strong_generators(self) -> list[Perm]:
        out, seen = [], set()
        for lev in self._levels:
            for g in lev.gens:
                if g not in seen:
                    seen.add(g)
                    out.append(g)
        return out

    def __repr__(self) -> str:
        return f"PermGroup(degree={self.degree}, order={self.order})"

    def __len__(self) -> int:
        return self.order

    # membership and enumeration -------------------------------------------

    def sift(self, g: Perm) -> tuple[Perm, int]:
        for l, lev in enumerate(self._levels):
            u = lev.trans.get(g[lev.point])
            if u is None:
                return g, l
            g = mul(g, inv(u))
        return g, len(self._levels)

    def __contains__(self, g: Perm) -> bool:
        if len(g) != self.degree:
            return False
        h, l = self.sift(tuple(g))
        return l == len(self._levels) and h == identity(self.degree)

    def contains_group(self, other: "PermGroup") -> bool:
        return all(g in self for g in other.generators)

    def iter_elements(self) -> Iterator[Perm]:
        yield from self.elements_mapping({})

    def with_base(self, prefix: Sequence[int]) -> "PermGroup":
        """The same group with a BSGS whose base starts with ``prefix``."""
        prefix = tuple(prefix)
        if self.base[: len(prefix)] == prefix:
            return self
        g = self._based.get(prefix)
        if g is None:
            levels = _schreier_sims(self.degree, self.strong_generators, prefix, self.order)
            g = PermGroup(self.degree, self.generators, levels, budget=0)
            self._based[prefix] = g
        return g

    def elements_mapping(self, partial: dict) -> Iterator[Perm]:
        """All elements g with g[p] == partial[p] for every key p."""
        keys = tuple(partial)
        K = self.with_base(keys)
        levels = K._levels
        n = self.degree
        targets = [partial[k] for k in keys]

        def rec(l, r, rinv):
            if l == len(levels):
                yield r
                return
            lev = levels[l]
            if l < len(targets):
                u = lev.trans.get(rinv[targets[l]])
                if u is None:
                    return
                nr = mul(u, r)
                yield from rec(l + 1, nr, inv(nr) if l + 1 < len(targets) else None)
            else:
                for u in lev.trans.values():
                    yield from rec(l + 1, mul(u, r), None)

        ident = identity(n)
        yield from rec(0, ident, ident)

    def search(self, accept: Callable[[Perm], bool], prune: Callable[[dict], bool] | None = None,
               base_prefix: Sequence[int] = (), node_budget: int = 10**6) -> list[Perm]:
        """Backtrack over base images collecting elements passing ``accept``.

        ``prune(partial)`` receives the images of the base points fixed so far
        and returns True to cut the subtree.
        """
        K = self.with_base(base_prefix) if base_prefix else self
        levels = K._levels
        found: list[Perm] = []
        nodes = 0

        def rec(l, r, partial):
            nonlocal nodes
            nodes += 1
            if nodes > node_budget:
                raise BudgetExceeded("backtrack search exceeded node budget", partial=found)
            if l == len(levels):
                if accept(r):
                    found.append(r)
                return
            lev = levels[l]
            for u in lev.trans.values():
                nr = mul(u, r)
                p2 = dict(partial)
                p2[lev.point] = nr[lev.point]
                if prune is not None and prune(p2):
                    continue
                rec(l + 1, nr, p2)

        rec(0, identity(self.degree), {})
        return found

    # structure --------------------------------------------------------------

    def orbits(self, pts: Iterable[int] | None = None) -> list[tuple[int, ...]]:
        return orbits(self.generators, self.degree, pts)

    def stabilizer(self, pt: int) -> "PermGroup":
        K = self.with_base((pt,))
        rest = K._levels[1:]
        gens = rest[0].gens if rest else []
        return PermGroup(self.degree, gens, rest)

    def is_transitive(self) -> bool:
        return len(self.orbits()) == 1

    def is_abelian(self) -> bool:
        gs = self.generators
        return all(mul(a, b) == mul(b, a) for a in gs for b in gs)

    def to_json(self) -> dict:
        return {"degree": self.degree, "generators": [list(g) for g in self.generators],
                "order": self.order}

    @classmethod
    def from_json(cls, obj) -> "PermGroup":
        n = int(obj["degree"])
        K = close_group([check_perm(g, n) for g in obj["generators"]], degree=n)
        if "order" in obj and int(obj["order"]) != K.order:
            raise InvalidArgument(f"claimed order {obj['order']} but generators give {K.order}")
        return K


def orbits(gens: Sequence[Perm], n: int, pts: Iterable[int] | None = None) -> list[tuple[int, ...]]:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for g in gens:
        for i, j in enumerate(g):
            a, b = find(i), find(j)
            if a != b:
                parent[max(a, b)] = min(a, b)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    out = sorted(tuple(v) for v in groups.values())
    if pts is not None:
        want = set(pts)
        out = [o for o in out if want.intersection(o)]
    return out


def close_group(gens: Iterable[Sequence[int]], degree: int | None = None, budget: int = ENUM_BUDGET,
                cap: int = ORDER_CAP, base_prefix: Sequence[int] | None = None) -> PermGroup:
    """Build the group generated by ``gens`` (trivial if empty).

    Raises BudgetExceeded when the order passes ``cap``.
    """
    gens = [tuple(g) for g in gens]
    if degree is None:
        if not gens:
            raise InvalidArgument("degree required when there are no generators")
        degree = len(gens[0])
    for g in gens:
        check_perm(g, degree)
    if base_prefix is None:
        base_prefix = (0,) if degree > 0 else ()
    levels = _schreier_sims(degree, gens, base_prefix, cap)
    o = 1
    for lev in levels:
        o *= len(lev.trans)
    if o > cap:
        raise BudgetExceeded(f"group order {o} exceeds cap {cap}")
    return PermGroup(degree, gens, levels, budget=budget)


def symmetric_group(n: int) -> PermGroup:
    if n < 2:
        return close_group([], degree=n)
    gens = [tuple([1, 0] + list(range(2, n)))]
    if n > 2:
        gens.append(tuple(list(range(1, n)) + [0]))
    return close_group(gens, degree=n, cap=max(ORDER_CAP, factorial(n)))


def translation(G: Group, g: int) -> Perm:
    return tuple(G.mul(x, g) for x in G.elements())


def right_regular(G: Group) -> PermGroup:
    """G_r: all right translations x -> xg."""
    k = len(G.factors)
    gens = [translation(G, G.index([1 if j == i else 0 for j in range(k)])) for i in range(k)]
    return close_group(gens, degree=G.order)


def point_stabilizer(K: PermGroup, pt: int) -> PermGroup:
    return K.stabilizer(pt)


def group_elements(K: PermGroup, budget: int = ENUM_BUDGET) -> tuple[Perm, ...]:
    if K.elements is not None:
        return K.elements
    if K.order > budget:
        raise BudgetExceeded(f"|K| = {K.order} exceeds enumeration budget {budget}")
    return tuple(sorted(K.iter_elements()))


# sections -----------------------------------------------------------------


def induced_section_action(K: PermGroup, S, node_budget: int = 10**6) -> PermGroup:
    """K^S: the permutations of U/L induced by elements of K fixing S.

    ``S`` is a groups.Section; points of K are element indices of S.group.
    """
    coset_of = S.coset_of
    umask = S.upper.mask

    def respects(partial: dict) -> bool:
        # images must keep U, and map equal cosets to equal cosets
        seen: dict[int, int] = {}
        for p, q in partial.items():
            pin, qin = (umask >> p) & 1, (umask >> q) & 1
            if pin != qin:
                return False
            if pin:
                a, b = coset_of[p], coset_of[q]
                if seen.setdefault(a, b) != b:
                    return False
                if list(seen.values()).count(b) > 1:
                    return False
        return True

    def project(f: Perm):
        img = [-1] * S.order
        for q, coset in enumerate(S.cosets):
            images = {coset_of[f[x]] for x in coset}
            if len(images) != 1 or -1 in images:
                return None
            img[q] = images.pop()
        return tuple(img)

    if K.elements is not None:
        elems = K.elements
    else:
        elems = K.search(lambda f: project(f) is not None, prune=lambda p: not respects(p),
                         base_prefix=S.upper.elements, node_budget=node_budget)
    projected = {pr for f in elems if (pr := project(f)) is not None}
    return close_group(sorted(projected), degree=S.order)


# regular subgroups and conjugacy ---------------------------------------------


def _type_fits(sub: Sequence[int], sup: Sequence[int]) -> bool:
    """Whether an abelian group of primary type ``sub`` embeds in type ``sup``."""
    from .groups import prime_factors

    def split(t):
        d: dict[int, list[int]] = {}
        for q in t:
            d.setdefault(prime_factors(q)[0], []).append(q)
        return {p: sorted(v, reverse=True) for p, v in d.items()}

    a, b = split(sub), split(sup)
    for p, qs in a.items():
        big = b.get(p, [])
        if len(qs) > len(big) or any(x > y for x, y in zip(qs, big)):
            return False
    return True


def _abelian_closure(R: dict, k: Perm, ident: Perm) -> dict | None:
    """The group <R, k> keyed by image of point 0, or None if not semiregular.

    R is a semiregular abelian group keyed the same way; k commutes with R.
    """
    rset = set(R.values())
    out = dict(R)
    cur = k
    while cur not in rset:
        for r in R.values():
            g = mul(r, cur)
            if g[0] in out:
                return None
            if any(g[i] == i for i in range(len(g))):
                return None
            out[g[0]] = g
        cur = mul(cur, k)
    return out


def regular_subgroups(K: PermGroup, target: Group, budget: int = 200_000) -> list[PermGroup]:
    """All regular subgroups of K isomorphic to ``target``.

    A regular abelian subgroup R contains exactly one element mapping point 0
    to a given point x.  The search picks x outside the orbit of 0 under the
    part of R built so far, and tries every element of K sending 0 to x that
    commutes with that part.  Each R is reached exactly once.  Raises
    BudgetExceeded (with ``partial`` set to what was found) when more than
    ``budget`` candidate elements are examined.
    """
    n = K.degree
    if n != target.order:
        raise InvalidArgument(f"degree {n} differs from |target| = {target.order}")
    ttype = target.primary_type
    texp = target.exponent
    ident = identity(n)
    found: list[PermGroup] = []
    seen = 0

    def rec(R: dict, gens: list):
        nonlocal seen
        if len(R) == n:
            orders = [perm_order(g) for g in R.values()]
            if abelian_type(orders) == ttype:
                found.append(close_group(gens, degree=n))
            return
        x = min(p for p in range(n) if p not in R)
        partial = {p: r[x] for p, r in R.items()}
        for k in K.elements_mapping(partial):
            seen += 1
            if seen > budget:
                raise BudgetExceeded("regular subgroup search exceeded budget", partial=found)
            if texp % perm_order(k):
                continue
            if any(mul(k, g) != mul(g, k) for g in gens):
                continue
            R2 = _abelian_closure(R, k, ident)
            if R2 is None or n % len(R2):
                continue
            if not _type_fits(abelian_type([perm_order(g) for g in R2.values()]), ttype):
                continue
            rec(R2, gens + [k])

    rec({0: ident}, [])
    return found


def _iter_abelian_bases(elems: Sequence[Perm], ptype: Sequence[int]) -> Iterator[tuple[Perm, ...]]:
    """Ordered bases (b_1..b_k), |b_i| = ptype[i], of an abelian group.

    The span grows one cyclic factor at a time; <b> must meet it trivially.
    """
    n_total = len(elems)
    by_order: dict[int, list[Perm]] = {}
    for g in elems:
        by_order.setdefault(perm_order(g), []).append(g)
    ident = identity(len(elems[0]))

    def rec(basis, span):
        if len(basis) == len(ptype):
            if len(span) == n_total:
                yield tuple(basis)
            return
        d = ptype[len(basis)]
        for b in by_order.get(d, []):
            powers = [ident]
            for _ in range(d - 1):
                powers.append(mul(powers[-1], b))
            if any(q in span for q in powers[1:]):
                continue
            yield from rec(basis + [b], {mul(x, q) for x in span for q in powers})

    yield from rec([], {ident})


def _abelian_bases(elems: Sequence[Perm], ptype: Sequence[int]) -> list[tuple[Perm, ...]]:
    """All ordered bases (b_1..b_k), |b_i| = ptype[i], of an abelian group."""
    return list(_iter_abelian_bases(elems, ptype))


def _elements_of_regular(A: PermGroup) -> list[Perm]:
    if A.elements is not None:
        return list(A.elements)
    return list(A.iter_elements())


def conjugate_subgroup_search(K: PermGroup, A: PermGroup, B: PermGroup,
                              budget: int = 500_000) -> Perm | None:
    """Some k in K with k^-1 A k <= B, or None.

    Regular abelian A and B of equal order are handled exactly by running
    through the conjugators in Sym(n) (determined by a point image and an
    isomorphism A -> B) and testing membership in K.  Otherwise the elements
    of K are run through in transversal order with an order-profile prune.
    Raises BudgetExceeded if the budget is spent before a decision.
    """
    n = K.degree
    if B.order % A.order:
        return None
    ea, eb = _elements_of_regular(A), _elements_of_regular(B)
    prof_a: dict[int, int] = {}
    prof_b: dict[int, int] = {}
    for g in ea:
        prof_a[perm_order(g)] = prof_a.get(perm_order(g), 0) + 1
    for g in eb:
        prof_b[perm_order(g)] = prof_b.get(perm_order(g), 0) + 1
    if any(prof_b.get(o, 0) < c for o, c in prof_a.items()):
        return None

    def works(k):
        ki = inv(k)
        return all(mul(mul(ki, a), k) in B for a in A.generators)

    regular = (A.order == B.order == n and A.is_abelian() and B.is_abelian()
               and A.is_transitive() and B.is_transitive())
    if regular:
        ptype = abelian_type([perm_order(g) for g in ea])
        if ptype != abelian_type([perm_order(g) for g in eb]):
            return None
        basis_a = next(_iter_abelian_bases(ea, ptype))
        # each element a of A written in basis_a
        words = {}
        for exps in product(*[range(perm_order(b)) for b in basis_a]):
            g = identity(n)
            for b, e in zip(basis_a, exps):
                g = mul(g, power(b, e))
            words[g] = exps
        a_of_point = {a[0]: a for a in ea}
        tried = 0
        for basis_b in _iter_abelian_bases(eb, ptype):
            psi = {}
            for a, exps in words.items():
                g = identity(n)
                for b, e in zip(basis_b, exps):
                    g = mul(g, power(b, e))
                psi[a] = g
            for y in range(n):
                tried += 1
                if tried > budget:
                    raise BudgetExceeded("conjugacy search exceeded budget")
                # c maps 0^a to y^psi(a)
                c = [0] * n
                for p, a in a_of_point.items():
                    c[p] = psi[a][y]
                c = tuple(c)
                if c in K and works(c):
                    return c
        return None

    count = 0
    for k in K.iter_elements():
        count += 1
        if count > budget:
            raise BudgetExceeded("conjugacy search exceeded budget")
        if works(k):
            return k
    return None
