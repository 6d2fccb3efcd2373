"""Canonical labeling of arc-colored digraphs by individualization-refinement.

The search is exact: every leaf of the search tree that could be the
canonical one is visited, except those skipped by automorphisms already
found.  Leaves are ordered by the refinement trace along their path and then
by the relabeled color matrix; the largest leaf is canonical.  Automorphisms
come for free from pairs of leaves with equal matrices, and they generate the
full automorphism group.
"""

from __future__ import annotations

import hashlib
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from .errors import InvalidArgument

MAX_DEGREE = 64


class ColorDigraph:
    """n vertices with a color on every ordered pair, loops included."""

    __slots__ = ("n", "colors", "palette")

    def __init__(self, n: int, colors: Sequence[int], palette: int | None = None):
        if n > MAX_DEGREE:
            raise InvalidArgument(f"digraphs with more than {MAX_DEGREE} vertices are not supported")
        colors = tuple(int(c) for c in colors)
        if len(colors) != n * n:
            raise InvalidArgument(f"expected {n * n} colors, got {len(colors)}")
        top = max(colors, default=-1) + 1
        if palette is None:
            palette = top
        if top > palette or min(colors, default=0) < 0:
            raise InvalidArgument("colors must lie in 0..palette-1")
        self.n = n
        self.colors = colors
        self.palette = palette

    @classmethod
    def from_matrix(cls, rows: Sequence[Sequence[int]], palette: int | None = None) -> "ColorDigraph":
        n = len(rows)
        return cls(n, [c for r in rows for c in r], palette)

    def color(self, i: int, j: int) -> int:
        return self.colors[i * self.n + j]

    def matrix(self) -> list[list[int]]:
        n = self.n
        return [list(self.colors[i * n:(i + 1) * n]) for i in range(n)]

    def relabel(self, perm: Sequence[int]) -> "ColorDigraph":
        """The digraph with vertex v renamed perm[v]."""
        n = self.n
        out = [0] * (n * n)
        for i in range(n):
            pi = perm[i] * n
            for j in range(n):
                out[pi + perm[j]] = self.colors[i * n + j]
        return ColorDigraph(n, out, self.palette)

    def is_automorphism(self, perm: Sequence[int]) -> bool:
        n, c = self.n, self.colors
        return all(c[i * n + j] == c[perm[i] * n + perm[j]] for i in range(n) for j in range(n))

    def __eq__(self, other) -> bool:
        return isinstance(other, ColorDigraph) and self.n == other.n and self.colors == other.colors

    def __hash__(self) -> int:
        return hash((self.n, self.colors))


@dataclass(frozen=True)
class CanonicalForm:
    canon_matrix: bytes = field(repr=False)
    labeling: tuple[int, ...] = field(repr=False)  # vertex -> canonical position
    hash: int
    n: int

    def __eq__(self, other) -> bool:
        return isinstance(other, CanonicalForm) and self.canon_matrix == other.canon_matrix

    def __hash__(self) -> int:
        return self.hash


def digest64(data: bytes) -> int:
    return int.from_bytes(hashlib.blake2b(data, digest_size=8).digest(), "big")


class _Search:
    def __init__(self, D: ColorDigraph, node_budget: int | None = None):
        self.D = D
        n = self.n = D.n
        c = D.colors
        # pair colors (c(v,w), c(w,v)) as bitmask adjacency; the most common
        # one is implied by the others and left out
        pair_masks: dict[tuple[int, int], list[int]] = {}
        counts: dict[tuple[int, int], int] = {}
        for v in range(n):
            for w in range(n):
                if v == w:
                    continue
                pc = (c[v * n + w], c[w * n + v])
                masks = pair_masks.get(pc)
                if masks is None:
                    masks = pair_masks[pc] = [0] * n
                masks[v] |= 1 << w
                counts[pc] = counts.get(pc, 0) + 1
        keys = sorted(pair_masks)
        if keys:
            common = max(keys, key=lambda k: (counts[k], k))
            keys.remove(common)
        self.adj = [pair_masks[k] for k in keys]
        self.autos: list[tuple[int, ...]] = []
        self.first = None  # (path, traces, order, matrix)
        self.best = None
        self.nodes = 0
        self.node_budget = node_budget

    # partitions are dicts start -> list of vertices --------------------------

    def _refine(self, cells: dict, queue: deque, trace: int) -> int:
        inq = set(queue)
        adj = self.adj
        n = self.n
        while queue:
            if len(cells) == n:
                break
            ws = queue.popleft()
            inq.discard(ws)
            W = 0
            for v in cells[ws]:
                W |= 1 << v
            for s in sorted(cells):
                cell = cells[s]
                if len(cell) == 1:
                    continue
                keyed = {}
                for v in cell:
                    k = tuple([(a[v] & W).bit_count() for a in adj])
                    keyed.setdefault(k, []).append(v)
                if len(keyed) == 1:
                    continue
                order = sorted(keyed)
                pieces = [keyed[k] for k in order]
                trace = hash((trace, ws, s, tuple((k, len(p)) for k, p in zip(order, pieces))))
                starts = []
                pos = s
                for p in pieces:
                    cells[pos] = p
                    starts.append(pos)
                    pos += len(p)
                if s in inq:
                    add = starts[1:]
                else:
                    big = max(range(len(pieces)), key=lambda i: (len(pieces[i]), -i))
                    add = [st for i, st in enumerate(starts) if i != big]
                for st in add:
                    if st not in inq:
                        inq.add(st)
                        queue.append(st)
        return trace

    def _initial(self):
        n, c = self.n, self.D.colors
        groups: dict[int, list[int]] = {}
        for v in range(n):
            groups.setdefault(c[v * n + v], []).append(v)
        cells = {}
        pos = 0
        for k in sorted(groups):
            cells[pos] = groups[k]
            pos += len(groups[k])
        trace = hash(tuple((k, len(groups[k])) for k in sorted(groups)))
        return cells, self._refine(cells, deque(sorted(cells)), trace)

    def _leaf(self, cells):
        order = [cells[s][0] for s in sorted(cells)]
        n, c = self.n, self.D.colors
        rows = [v * n for v in order]
        mat = bytes([c[r + w] for r in rows for w in order]) if self.D.palette <= 256 else \
            b"".join(c[r + w].to_bytes(2, "big") for r in rows for w in order)
        return order, mat

    def _orbit_rep_filter(self, path, cell):
        fixing = [g for g in self.autos if all(g[v] == v for v in path)]
        if not fixing:
            return None
        parent = {v: v for v in range(self.n)}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for g in fixing:
            for v in range(self.n):
                a, b = find(v), find(g[v])
                if a != b:
                    parent[max(a, b)] = min(a, b)
        return find

    @staticmethod
    def _lcp(a, b):
        k = 0
        for x, y in zip(a, b):
            if x != y:
                break
            k += 1
        return k

    def run(self):
        cells, t0 = self._initial()
        self._rec(cells, [], [t0])

    def _rec(self, cells, path, traces):
        self.nodes += 1
        if self.node_budget is not None and self.nodes > self.node_budget:
            from .errors import BudgetExceeded
            raise BudgetExceeded("canonization exceeded node budget")
        if len(cells) == self.n:
            return self._at_leaf(cells, path, traces)
        s = min((st for st in cells if len(cells[st]) > 1), key=lambda st: (len(cells[st]), st))
        target = sorted(cells[s])
        explored: list[int] = []
        depth = len(path)
        for v in target:
            if explored:
                find = self._orbit_rep_filter(path, target)
                if find is not None and any(find(v) == find(u) for u in explored):
                    continue
            explored.append(v)
            child = dict(cells)
            rest = [u for u in cells[s] if u != v]
            child[s] = [v]
            child[s + 1] = rest
            t = self._refine(child, deque([s]), hash((traces[-1], s)))
            ctraces = traces + [t]
            if self.first is not None:
                k = len(ctraces)
                fpre = self.first[1][:k]
                bpre = self.best[1][:k]
                if ctraces != fpre and ctraces < bpre:
                    continue
            jump = self._rec(child, path + [v], ctraces)
            if jump is not None and jump < depth:
                return jump
        return None

    def _at_leaf(self, cells, path, traces):
        order, mat = self._leaf(cells)
        if self.first is None:
            self.first = self.best = (path, traces, order, mat)
            return None
        fpath, ftraces, forder, fmat = self.first
        if traces == ftraces and mat == fmat:
            self._add_auto(forder, order)
            return self._lcp(path, fpath)
        bpath, btraces, border, bmat = self.best
        key, bkey = (traces, mat), (btraces, bmat)
        if key == bkey:
            self._add_auto(border, order)
            return self._lcp(path, bpath)
        if key > bkey:
            self.best = (path, traces, order, mat)
        return None

    def _add_auto(self, o1, o2):
        g = [0] * self.n
        for a, b in zip(o1, o2):
            g[a] = b
        g = tuple(g)
        if g != tuple(range(self.n)):
            self.autos.append(g)


def _search(D: ColorDigraph, node_budget: int | None = None) -> _Search:
    s = _Search(D, node_budget)
    if D.n:
        s.run()
    return s


def canonize(D: ColorDigraph, node_budget: int | None = None) -> CanonicalForm:
    """Canonical form: equal for two digraphs iff they are isomorphic."""
    if D.n == 0:
        return CanonicalForm(b"", (), digest64(b""), 0)
    s = _search(D, node_budget)
    _, _, order, mat = s.best
    labeling = [0] * D.n
    for pos, v in enumerate(order):
        labeling[v] = pos
    return CanonicalForm(mat, tuple(labeling), digest64(mat), D.n)


def canonize_with_automorphisms(D: ColorDigraph, node_budget: int | None = None):
    """Canonical form plus a generating set of Aut(D)."""
    if D.n == 0:
        return canonize(D), []
    s = _search(D, node_budget)
    _, _, order, mat = s.best
    labeling = [0] * D.n
    for pos, v in enumerate(order):
        labeling[v] = pos
    return CanonicalForm(mat, tuple(labeling), digest64(mat), D.n), list(s.autos)


def isomorphism(fa: CanonicalForm, fb: CanonicalForm) -> tuple[int, ...] | None:
    """A map v -> f(v) taking the first digraph onto the second, if isomorphic."""
    if fa != fb:
        return None
    pos_to_b = [0] * fb.n
    for v, pos in enumerate(fb.labeling):
        pos_to_b[pos] = v
    return tuple(pos_to_b[fa.labeling[v]] for v in range(fa.n))
