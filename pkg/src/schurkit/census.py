"""Census workflows: subset censuses, CI sampling, S-ring enumeration,
lemma verification, and the persisted runs behind reports."""

from __future__ import annotations

import csv
import io
import json
import os
import time
from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from pathlib import Path
from typing import Callable, Iterator, Sequence

import numpy as np

from .build import cayley_minimal, circ_classify, classify_main2, orbit_masks, revalidate
from .canon import CanonicalForm
from .errors import (AxiomViolation, BudgetExceeded, InvalidArgument, NotApplicable,
                     PropertyViolation)
from .groups import (Group, automorphism_group, coset_order_lift, in_class_ec, is_prime,
                     make_section, mask_of, members, prime_factors, subgroup_from_mask,
                     subgroup_masks)
from .iso import (FormCache, atomic_write, ci_subset, isomorphism, min_family_elements, sring_automorphisms, subset_form,
                  verify_subset_witness)
from .sring import (SRing, generated_sring, intersection_numbers, is_p_sring, power_map_classes,
                    quotient_sring, rank_two, separat_check, sylow_power_set, validate_sring)

CACHE_ENV = "SCHURKIT_CACHE"
CENSUS_LIMIT = 16


def cache_dir() -> Path:
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "schurkit"


# orbit reduction on subsets ------------------------------------------------------


class SubsetAction:
    """Aut(G) acting on subset bitmasks through per-byte lookup tables."""

    def __init__(self, G: Group):
        self.group = G
        self.autos = automorphism_group(G).elements
        nbytes = (G.order + 7) // 8
        self.tables = []
        for phi in self.autos:
            tabs = []
            for b in range(nbytes):
                tab = [0] * 256
                for v in range(256):
                    out = 0
                    for bit in range(8):
                        x = 8 * b + bit
                        if v >> bit & 1 and x < G.order:
                            out |= 1 << phi[x]
                    tab[v] = out
                tabs.append(tab)
            self.tables.append(tabs)

    def image(self, k: int, mask: int) -> int:
        out = 0
        for tab in self.tables[k]:
            out |= tab[mask & 0xFF]
            mask >>= 8
        return out

    def orbit(self, mask: int) -> set[int]:
        return {self.image(k, mask) for k in range(len(self.autos))}


def orbit_representatives(G: Group) -> Iterator[tuple[int, int]]:
    """(smallest member, size) of every Aut(G)-orbit on subsets, in order."""
    act = SubsetAction(G)
    visited = bytearray(1 << G.order)
    for mask in range(1 << G.order):
        if visited[mask]:
            continue
        orb = act.orbit(mask)
        for m in orb:
            visited[m] = 1
        yield mask, len(orb)


@dataclass
class CensusRecord:
    subset: int
    orbit_size: int
    canonical_hash: int
    aut_orbit_id: int
    iso_class_id: int
    ci_flag: int  # 1 if the subset is CI, 0 otherwise


@dataclass
class NonCIPair:
    S: int
    T: int
    f: tuple[int, ...]

    def to_json(self) -> dict:
        return {"S": self.S, "T": self.T, "f": list(self.f)}


@dataclass
class CensusResult:
    group: Group
    records: list[CensusRecord]
    pairs: list[NonCIPair]
    reduced: bool

    @property
    def iso_classes(self) -> int:
        return len({r.iso_class_id for r in self.records})

    @property
    def orbits(self) -> int:
        return len({r.aut_orbit_id for r in self.records})

    def summary(self) -> dict:
        return {
            "group": self.group.name,
            "subsets": sum(r.orbit_size for r in self.records) if self.reduced else len(self.records),
            "aut_orbits": self.orbits,
            "iso_classes": self.iso_classes,
            "non_ci_pairs": len(self.pairs),
            "non_ci_orbits": sum(1 for r in self.records if not r.ci_flag) if self.reduced else None,
            "first_pair": self.pairs[0].to_json() if self.pairs else None,
        }

    def table(self) -> tuple[list[str], list[list]]:
        header = ["orbit_rep_bitmask", "orbit_size", "canonical_hash", "iso_class_id", "ci_flag"]
        rows = [[r.subset, r.orbit_size, f"{r.canonical_hash:016x}", r.iso_class_id, r.ci_flag]
                for r in self.records]
        return header, rows


def _load_checkpoint(path: Path | None, G: Group) -> dict[int, CanonicalForm]:
    if path is None or not path.exists():
        return {}
    obj = json.loads(path.read_text())
    if obj.get("group") != G.to_json():
        raise InvalidArgument(f"checkpoint {path} belongs to another group")
    return {int(k): CanonicalForm(bytes.fromhex(v["m"]), tuple(v["l"]), int(v["h"]), G.order)
            for k, v in obj["forms"].items()}


def _save_checkpoint(path: Path, G: Group, forms: dict[int, CanonicalForm]) -> None:
    data = {"group": G.to_json(),
            "forms": {str(k): {"m": f.canon_matrix.hex(), "l": list(f.labeling), "h": f.hash}
                      for k, f in sorted(forms.items())}}
    atomic_write(path, json.dumps(data, sort_keys=True))


def subset_census(G: Group, reduce: bool = True, checkpoint: str | os.PathLike | None = None,
                  every: int = 200, progress: Callable[[int, int], None] | None = None,
                  form_cache: FormCache | None = None) -> CensusResult:
    """Every subset of G up to Aut(G), grouped by Cayley digraph isomorphism.

    An isomorphism class holding two or more Aut(G)-orbits gives non-CI
    pairs; each pair is re-verified before it is reported.  With a
    checkpoint path, canonical forms computed so far are saved every
    ``every`` representatives and reused on the next call.
    """
    if G.order > CENSUS_LIMIT:
        raise BudgetExceeded(f"subset census needs |G| <= {CENSUS_LIMIT}, got {G.order}")
    ck = Path(checkpoint) if checkpoint is not None else None
    forms = _load_checkpoint(ck, G)
    act = SubsetAction(G)

    def form_of(S: int) -> CanonicalForm:
        f = forms.get(S)
        if f is None:
            f = form_cache.subset_form(G, S) if form_cache else subset_form(G, S)
            forms[S] = f
        return f

    if reduce:
        items = list(orbit_representatives(G))
        orbit_id = {rep: i for i, (rep, _) in enumerate(items)}
        rep_of = None
    else:
        items = [(m, 1) for m in range(1 << G.order)]
        rep_of = {}
        orbit_id = {}
        for m in range(1 << G.order):
            if m in rep_of:
                continue
            for x in act.orbit(m):
                rep_of[x] = m
            orbit_id[m] = len(orbit_id)
    fresh = 0
    total = len(items)
    buckets: dict[int, list[tuple[CanonicalForm, int]]] = {}
    class_of_rep: list[int] = []
    class_orbits: list[set[int]] = []
    class_first: list[int] = []
    for idx, (S, _) in enumerate(items):
        had = S in forms
        f = form_of(S)
        if not had:
            fresh += 1
            if ck is not None and fresh % every == 0:
                _save_checkpoint(ck, G, forms)
        if progress is not None:
            progress(idx + 1, total)
        cid = None
        for g, c in buckets.get(f.hash, []):
            if g.canon_matrix == f.canon_matrix:
                cid = c
                break
        if cid is None:
            cid = len(class_orbits)
            buckets.setdefault(f.hash, []).append((f, cid))
            class_orbits.append(set())
            class_first.append(S)
        class_of_rep.append(cid)
        oid = orbit_id[S] if reduce else orbit_id[rep_of[S]]
        class_orbits[cid].add(oid)
    if ck is not None:
        _save_checkpoint(ck, G, forms)
    records = []
    for (S, size), cid in zip(items, class_of_rep):
        oid = orbit_id[S] if reduce else orbit_id[rep_of[S]]
        flag = 1 if len(class_orbits[cid]) == 1 else 0
        records.append(CensusRecord(S, size, forms[S].hash, oid, cid, flag))
    pairs = []
    if reduce:
        for rec in records:
            if rec.ci_flag:
                continue
            S0 = class_first[rec.iso_class_id]
            if rec.subset == S0:
                continue
            f = isomorphism(forms[S0], forms[rec.subset])
            if not verify_subset_witness(G, S0, rec.subset, f):
                raise PropertyViolation(f"witness ({S0}, {rec.subset}) failed re-verification")
            pairs.append(NonCIPair(S0, rec.subset, f))
    else:
        done: set[tuple[int, int]] = set()
        for rec in records:
            if rec.ci_flag:
                continue
            S0 = class_first[rec.iso_class_id]
            key = (rec.iso_class_id, rec.aut_orbit_id)
            if rep_of[S0] == rep_of[rec.subset] or key in done:
                continue
            done.add(key)
            f = isomorphism(forms[S0], forms[rec.subset])
            if not verify_subset_witness(G, S0, rec.subset, f):
                raise PropertyViolation(f"witness ({S0}, {rec.subset}) failed re-verification")
            pairs.append(NonCIPair(S0, rec.subset, f))
    return CensusResult(G, records, pairs, reduce)


# seeded CI sampling -------------------------------------------------------------------


def sample_subsets(G: Group, count: int, seed: int) -> list[int]:
    """``count`` uniform subsets from the Philox stream keyed by ``seed``."""
    if not 0 <= seed < 1 << 64:
        raise InvalidArgument("seed must be a 64-bit unsigned integer")
    raw = np.random.Philox(key=seed).random_raw(count)
    full = (1 << G.order) - 1
    return [int(r) & full for r in raw]


@dataclass
class SampleRow:
    index: int
    subset: int
    status: str
    method: str
    witness: dict | None = None


@dataclass
class SampleResult:
    group: Group
    seed: int
    rows: list[SampleRow]
    halted: bool

    def counts(self) -> dict[str, int]:
        out = {"ci": 0, "non-ci": 0, "undecided": 0}
        for r in self.rows:
            out[r.status] += 1
        return out

    def summary(self) -> dict:
        c = self.counts()
        n = len(self.rows)
        return {"group": self.group.name, "seed": self.seed, "samples": n, **c,
                "decided_fraction": (c["ci"] + c["non-ci"]) / n if n else 1.0,
                "halted": self.halted,
                "witness": next((r.witness for r in self.rows if r.witness), None)}

    def table(self) -> tuple[list[str], list[list]]:
        return (["index", "subset", "status", "method"],
                [[r.index, r.subset, r.status, r.method] for r in self.rows])


def ci_sample(G: Group, count: int, seed: int, budget: int = 200_000,
              progress: Callable[[int, int], None] | None = None) -> SampleResult:
    """Regular-subgroup CI verdicts for seeded random subsets; stops at a non-CI one."""
    rows = []
    for i, S in enumerate(sample_subsets(G, count, seed)):
        v = ci_subset(G, S, method="regular-subgroup", budget=budget)
        w = None
        if v.status == "non-ci":
            T, f = v.witness
            w = {"S": S, "T": T, "f": list(f)}
        rows.append(SampleRow(i, S, v.status, v.method, w))
        if progress is not None:
            progress(i + 1, count)
        if v.status == "non-ci":
            return SampleResult(G, seed, rows, True)
    return SampleResult(G, seed, rows, False)


# S-ring enumeration --------------------------------------------------------------------


def _burn_ok(G: Group, T: int, units: Sequence[int]) -> bool:
    for m in units:
        img = G.set_pow(T, m)
        if img != T and img & T:
            return False
    return True


def _all_srings(G: Group, budget: int) -> list[SRing]:
    """Every S-ring over G, found by splitting basic sets of known ones.

    Any S-ring strictly finer than A has a basic set T inside some basic set
    X of A with min(X) in T; the S-ring generated by A and T lies between
    them, so a search from the rank-2 S-ring reaches every S-ring.
    """
    units = G.units()
    start = rank_two(G)
    seen = {start.masks: start}
    queue = deque([start])
    work = 0
    while queue:
        A = queue.popleft()
        for X in A.masks:
            if X.bit_count() < 2:
                continue
            x0 = (X & -X).bit_length() - 1
            rest = members(X & ~(1 << x0))
            for r in range(len(rest)):
                for comb in combinations(rest, r):
                    T = mask_of(comb) | (1 << x0)
                    if not _burn_ok(G, T, units):
                        continue
                    work += 1
                    if work > budget:
                        raise BudgetExceeded("S-ring enumeration exceeded budget",
                                             partial=list(seen.values()))
                    B = generated_sring(G, list(A.masks) + [T])
                    if B.masks not in seen:
                        seen[B.masks] = B
                        queue.append(B)
    return sorted(seen.values(), key=lambda A: (A.rank, A.masks))


def _p_srings(G: Group, budget: int) -> list[SRing]:
    """p-S-rings by direct search over partitions into p-power blocks."""
    ps = prime_factors(G.order)
    if len(ps) != 1:
        raise InvalidArgument(f"{G.name} is not a p-group")
    p = ps[0]
    sizes = []
    s = 1
    while s < G.order:
        sizes.append(s)
        s *= p
    units = G.units()
    out = []
    work = 0

    def rec(free: int, blocks: list[int]):
        nonlocal work
        work += 1
        if work > budget:
            raise BudgetExceeded("p-S-ring search exceeded budget")
        if not free:
            try:
                out.append(validate_sring(G, [members(b) for b in blocks]))
            except AxiomViolation:
                pass
            return
        x = (free & -free).bit_length() - 1
        rest = members(free & ~(1 << x))
        for k in sizes:
            if k - 1 > len(rest):
                break
            for comb in combinations(rest, k - 1):
                B = mask_of(comb) | (1 << x)
                if not _burn_ok(G, B, units):
                    continue
                Bi = G.set_inv(B)
                if Bi == B:
                    rec(free & ~B, blocks + [B])
                elif Bi & ~free == 0 and not Bi & B:
                    rec(free & ~B & ~Bi, blocks + [B, Bi])

    rec(G.full_mask & ~1, [1])
    return sorted(out, key=lambda A: (A.rank, A.masks))


@lru_cache(maxsize=32)
def cyclotomic_srings(G: Group, budget: int = 100_000) -> tuple[tuple[SRing, tuple[int, ...]], ...]:
    """Every cyclotomic S-ring with its Aut_G, as a list of automorphism indices.

    Search over Cayley-closed subgroups: from K, adding one automorphism g
    gives the orbits of <K, g>, and the closed group of that partition is
    the set of automorphisms fixing each orbit.
    """
    auts = automorphism_group(G).elements
    if len(auts) > budget:
        raise BudgetExceeded(f"|Aut(G)| = {len(auts)} exceeds budget")
    n = G.order

    def closed(part):
        out = []
        for i, f in enumerate(auts):
            if all(_img(f, m) == m for m in part):
                out.append(i)
        return tuple(out)

    start = tuple(sorted(1 << x for x in range(n)))
    seen = {start: closed(start)}
    frontier = [start]
    while frontier:
        nxt = []
        for part in frontier:
            K = seen[part]
            kset = set(K)
            for i in range(len(auts)):
                if i in kset:
                    continue
                p = orbit_masks(n, [auts[j] for j in K] + [auts[i]])
                if p not in seen:
                    seen[p] = closed(p)
                    nxt.append(p)
        frontier = nxt
    rings = [(SRing(G, part), K) for part, K in seen.items()]
    rings.sort(key=lambda t: (len(t[1]), t[0].rank, t[0].masks))
    return tuple(rings)


def _img(f, mask):
    out = 0
    for x in members(mask):
        out |= 1 << f[x]
    return out


MODES = ("all", "cyclotomic", "p-srings")


def enumerate_srings(G: Group, mode: str, budget: int = 2_000_000) -> list[SRing]:
    """Complete duplicate-free list of S-rings over G of the requested kind."""
    if mode == "all":
        if G.order > 12:
            raise BudgetExceeded("mode 'all' needs |G| <= 12")
        return _all_srings(G, budget)
    if mode == "cyclotomic":
        return [A for A, _ in cyclotomic_srings(G)]
    if mode == "p-srings":
        return _p_srings(G, budget)
    raise InvalidArgument(f"unknown mode {mode!r}; expected one of {', '.join(MODES)}")


def is_schurian(A: SRing) -> bool:
    from .build import orbit_sring

    return orbit_sring(A.group, sring_automorphisms(A)) == A


# the cyclotomic census over C4 x Cp^2 ------------------------------------------------------


@dataclass
class Main2Row:
    ring_id: int
    aut_g_order: int
    rank: int
    closure_order: int
    minimal: bool
    excluded_by: int | None
    statements: list[int]
    kind: str
    sections: list[dict]
    ci: str | None  # CI verdict for the ring, when computed


@dataclass
class Main2Census:
    group: Group
    rows: list[Main2Row]
    undecided_pairs: list[tuple[int, int]]
    rings: list[SRing] = field(repr=False, default_factory=list)

    @property
    def minimal(self) -> list[Main2Row]:
        return [r for r in self.rows if r.minimal]

    @property
    def unexplained(self) -> list[Main2Row]:
        return [r for r in self.rows if r.minimal and not r.statements]

    def summary(self) -> dict:
        return {
            "group": self.group.name,
            "cyclotomic_rings": len(self.rows),
            "minimal_in_family": [r.ring_id for r in self.minimal],
            "excluded": sum(1 for r in self.rows if not r.minimal),
            "undecided_pairs": [list(p) for p in self.undecided_pairs],
            "unexplained_none": [r.ring_id for r in self.unexplained],
            "statement_counts": {str(s): sum(1 for r in self.minimal if s in r.statements)
                                 for s in (1, 2, 3)},
            "scope_note": ("minimality is taken within the enumerated family of two-closures "
                           "of G_r K, K <= Aut(G), not within all two-closed overgroups"),
        }

    def table(self) -> tuple[list[str], list[list]]:
        header = ["ring_id", "aut_g_order", "rank", "closure_order", "minimal", "excluded_by",
                  "statements", "kind", "ci"]
        rows = [[r.ring_id, r.aut_g_order, r.rank, r.closure_order, int(r.minimal),
                 "" if r.excluded_by is None else r.excluded_by,
                 " ".join(map(str, r.statements)), r.kind, r.ci or ""] for r in self.rows]
        return header, rows


def main2_census(G: Group, budget: int = 20_000,
                 progress: Callable[[int, int], None] | None = None) -> Main2Census:
    """Classify every cyclotomic S-ring over G = C4 x Cp^2.

    The family is the two-closures Aut(A) of the cyclotomic S-rings A; its
    minimal members must satisfy one of the three statements, and the rest
    are reported with the smaller member that is G-complete in them.
    """
    rings = cyclotomic_srings(G)
    family = []
    for i, (A, _) in enumerate(rings):
        family.append(sring_automorphisms(A))
        if progress is not None:
            progress(i + 1, 2 * len(rings))
    mf = min_family_elements(family, G, budget)
    rows = []
    Gr_order = G.order
    for i, (A, K) in enumerate(rings):
        rep = classify_main2(A)
        revalidate(A, rep)
        j = mf.excluded.get(i)
        ci = None
        if j is not None and family[j].order == Gr_order:
            # G_r <=_G Aut(A) is exactly the CI property of A
            ci = "ci"
        rows.append(Main2Row(i, len(K), A.rank, family[i].order, i in mf.minimal, j,
                             rep.statements, rep.kind, rep.to_json()["sections"], ci))
        if progress is not None:
            progress(len(rings) + i + 1, 2 * len(rings))
    return Main2Census(G, rows, mf.undecided, [A for A, _ in rings])


# lemma verification -----------------------------------------------------------------------


@dataclass
class LemmaReport:
    lemma: str
    scope: str
    instances_checked: int
    failures: list[dict]
    runtime: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {"lemma": self.lemma, "scope": self.scope,
                "instances_checked": self.instances_checked, "failures": self.failures}


DEFAULT_SCOPES = {
    "burn": "cyclotomic:C4;C8;C3^2;C4xC3;C4xC2^2",
    "sch": "cyclotomic:C4;C8;C3^2;C4xC3;C4xC2^2",
    "intersection": "cyclotomic:C4;C8;C3^2;C4xC3;C4xC2^2",
    "separat": "cyclotomic:C4;C8;C3^2;C4xC3;C4xC2^2",
    "tenspr": "cyclotomic:C4;C8;C3^2;C4xC3;C4xC2^2",
    "circ": "all:C5;C7;C12",
    "circcaymin": "cyclotomic:C8;C12;C15",
    "minpring": "minimal:C4xC3^2",
    "orders": "groups:C4xC3^2;C4xC3;C3^2;C12",
    "main2": "minimal:C4xC3^2",
}
LEMMAS = tuple(DEFAULT_SCOPES)
SOURCES = ("all", "schurian", "cyclotomic", "p-srings", "minimal", "groups")


def parse_scope(scope: str) -> tuple[str, list[Group]]:
    if ":" not in scope:
        raise InvalidArgument(f"scope {scope!r} should look like 'cyclotomic:C4;C8'")
    source, groups = scope.split(":", 1)
    source = source.strip()
    if source not in SOURCES:
        raise InvalidArgument(f"unknown instance source {source!r}")
    gs = [Group.parse(g.strip()) for g in groups.split(";") if g.strip()]
    if not gs:
        raise InvalidArgument("scope names no groups")
    return source, gs


def scope_rings(source: str, G: Group) -> list[SRing]:
    if source == "all":
        return enumerate_srings(G, "all")
    if source == "schurian":
        return [A for A in enumerate_srings(G, "all") if is_schurian(A)]
    if source == "cyclotomic":
        return enumerate_srings(G, "cyclotomic")
    if source == "p-srings":
        return enumerate_srings(G, "p-srings")
    if source == "minimal":
        census = _minimal_census(G)
        return [census.rings[r.ring_id] for r in census.minimal]
    raise InvalidArgument(f"source {source!r} does not produce S-rings")


def _c4cp2(G: Group) -> bool:
    t = G.primary_type
    return len(t) == 3 and t[0] == 4 and t[1] == t[2] and t[1] != 2 and is_prime(t[1])


@lru_cache(maxsize=8)
def _minimal_census(G: Group) -> Main2Census:
    return main2_census(G) if _c4cp2(G) else _minimal_family(G)


def _minimal_family(G: Group) -> Main2Census:
    rings = cyclotomic_srings(G)
    family = [sring_automorphisms(A) for A, _ in rings]
    mf = min_family_elements(family, G)
    rows = [Main2Row(i, len(K), A.rank, family[i].order, i in mf.minimal, mf.excluded.get(i),
                     [], "", [], None) for i, (A, K) in enumerate(rings)]
    return Main2Census(G, rows, mf.undecided, [A for A, _ in rings])


def _fail(failures: list, **data) -> None:
    failures.append({k: v for k, v in data.items()})


def _check_ring(lemma: str, A: SRing, failures: list) -> int:
    """Run one lemma's checker on A; returns the number of instances."""
    G = A.group
    n = 0
    ident = {"group": G.name, "classes": [list(c) for c in A.classes]}
    if lemma == "burn":
        for X in A.masks:
            for m in G.units():
                n += 1
                try:
                    power_map_classes(A, X, m)
                except PropertyViolation as exc:
                    _fail(failures, **ident, X=members(X), m=m, error=str(exc))
    elif lemma == "sch":
        for X in A.masks:
            for p in sorted(set(prime_factors(G.order))):
                n += 1
                try:
                    sylow_power_set(A, X, p)
                except PropertyViolation as exc:
                    _fail(failures, **ident, X=members(X), p=p, error=str(exc))
    elif lemma == "intersection":
        for H in A.a_subgroup_masks():
            for X in A.masks:
                n += 1
                try:
                    intersection_numbers(A, H, X)
                except PropertyViolation as exc:
                    _fail(failures, **ident, H=members(H), X=members(X), error=str(exc))
    elif lemma == "separat":
        for H in A.a_subgroup_masks():
            for X in A.masks:
                n += 1
                try:
                    separat_check(A, X, H)
                except PropertyViolation as exc:
                    _fail(failures, **ident, H=members(H), X=members(X), error=str(exc))
    elif lemma == "tenspr":
        n += _check_tenspr(A, failures, ident)
    elif lemma == "circ":
        n += 1
        try:
            found = circ_classify(A)
            if is_prime(G.order) and "cyclotomic" not in found:
                _fail(failures, **ident, error="prime order but not cyclotomic")
        except PropertyViolation as exc:
            _fail(failures, **ident, error=str(exc))
    elif lemma == "circcaymin":
        n += 1
        try:
            if not cayley_minimal(A):
                _fail(failures, **ident, error="not Cayley minimal")
        except NotApplicable as exc:
            _fail(failures, **ident, error=str(exc))
    elif lemma == "minpring":
        for H in A.a_subgroup_masks():
            q = G.order // H.bit_count()
            ps = prime_factors(q)
            if len(ps) != 1:
                continue
            n += 1
            S = make_section(G, subgroup_from_mask(G, G.full_mask), subgroup_from_mask(G, H))
            if not is_p_sring(quotient_sring(A, S), ps[0]):
                _fail(failures, **ident, H=members(H), error="quotient is not a p-S-ring")
    elif lemma == "main2":
        n += 1
        rep = classify_main2(A)
        if not rep.statements:
            _fail(failures, **ident, error="no statement holds")
        else:
            try:
                revalidate(A, rep)
            except PropertyViolation as exc:
                _fail(failures, **ident, error=str(exc))
    else:
        raise InvalidArgument(f"unknown lemma {lemma!r}")
    return n


def _check_tenspr(A: SRing, failures: list, ident: dict) -> int:
    G = A.group
    subs = [m for m in A.a_subgroup_masks() if m not in (1, G.full_mask)]
    n = 0
    for i, h1 in enumerate(subs):
        for h2 in subs[i + 1:]:
            if h1 & h2 != 1 or h1.bit_count() * h2.bit_count() != G.order:
                continue
            n += 1
            # unique decomposition x = g1 g2
            part = {}
            for g1 in members(h1):
                for g2 in members(h2):
                    part[G.mul(g1, g2)] = (g1, g2)
            for X in A.masks:
                p1 = mask_of(part[x][0] for x in members(X))
                p2 = mask_of(part[x][1] for x in members(X))
                if not (A.is_basic(p1) and A.is_basic(p2)):
                    _fail(failures, **ident, G1=members(h1), G2=members(h2), X=members(X),
                          error="projection is not a basic set")
            in1 = [m for m in A.masks if m & ~h1 == 0]
            in2 = [m for m in A.masks if m & ~h2 == 0]
            prods = {G.set_mul(a, b) for a in in1 for b in in2}
            if not all(A.is_a_set(m) for m in prods):
                _fail(failures, **ident, G1=members(h1), G2=members(h2),
                      error="tensor product of restrictions is not contained in A")
            if (len(in1) == h1.bit_count() or len(in2) == h2.bit_count()) \
                    and prods != set(A.masks):
                _fail(failures, **ident, G1=members(h1), G2=members(h2),
                      error="A differs from the tensor product although one factor is a group ring")
    return n


def _check_orders(G: Group, failures: list) -> int:
    if not in_class_ec(G):
        return 0
    n = 0
    for lmask in subgroup_masks(G):
        L = subgroup_from_mask(G, lmask)
        S = make_section(G, subgroup_from_mask(G, G.full_mask), L)
        qord = {}
        for x in G.elements():
            q = S.coset_of[x]
            qord[x] = S.quotient.element_order(q)
        outside = [x for x in G.elements() if not (lmask >> x) & 1]
        for x in outside:
            k = G.element_order(x)
            if not (k == 4 or is_prime(k) and k != 2):
                continue
            for y in outside:
                if qord[x] != qord[y]:
                    continue
                n += 1
                yp = coset_order_lift(G, L, x, y)
                if S.coset_of[yp] != S.coset_of[y] or G.element_order(yp) != k:
                    _fail(failures, group=G.name, L=members(lmask), x=x, y=y, got=yp)
    return n


def verify_lemma(name: str, scope: str | None = None) -> LemmaReport:
    """Check the named lemma's conclusion on every in-scope instance."""
    if name not in DEFAULT_SCOPES:
        raise InvalidArgument(f"unknown lemma {name!r}; known: {', '.join(LEMMAS)}")
    scope = scope or DEFAULT_SCOPES[name]
    source, groups = parse_scope(scope)
    t0 = time.perf_counter()
    failures: list[dict] = []
    n = 0
    for G in groups:
        if name == "orders":
            n += _check_orders(G, failures)
            continue
        if source == "groups":
            raise InvalidArgument(f"lemma {name} needs S-ring instances, not 'groups'")
        for A in scope_rings(source, G):
            if name in ("circ", "circcaymin") and not G.is_cyclic():
                continue
            n += _check_ring(name, A, failures)
    return LemmaReport(name, scope, n, failures, time.perf_counter() - t0)


# runs and reports ----------------------------------------------------------------------------


def run_dir(run_id: str) -> Path:
    if not run_id or "/" in run_id or run_id.startswith("."):
        raise InvalidArgument(f"bad run id {run_id!r}")
    return cache_dir() / "runs" / run_id


def save_run(run_id: str, kind: str, params: dict, summary: dict,
             tables: dict[str, tuple[list[str], list[list]]]) -> Path:
    """Persist a completed run so :func:`report` can render it."""
    data = {"kind": kind, "params": params, "summary": summary,
            "tables": {k: {"header": h, "rows": r} for k, (h, r) in sorted(tables.items())}}
    path = run_dir(run_id) / "run.json"
    atomic_write(path, json.dumps(data, sort_keys=True, indent=1) + "\n")
    return path


def load_run(run_id: str) -> dict:
    path = run_dir(run_id) / "run.json"
    if not path.exists():
        raise InvalidArgument(f"no run named {run_id!r} under {cache_dir()}")
    return json.loads(path.read_text())


def _csv_text(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _markdown(run_id: str, data: dict) -> str:
    lines = [f"# Run {run_id}", "", f"kind: {data['kind']}", ""]
    if data["params"]:
        lines.append("## Parameters")
        lines.append("")
        for k, v in sorted(data["params"].items()):
            lines.append(f"- {k}: {json.dumps(v, sort_keys=True)}")
        lines.append("")
    lines.append("## Summary")
    lines.append("")
    for k, v in sorted(data["summary"].items()):
        lines.append(f"- {k}: {json.dumps(v, sort_keys=True)}")
    lines.append("")
    for name, t in sorted(data["tables"].items()):
        lines.append(f"## Table {name}")
        lines.append("")
        lines.append(f"{len(t['rows'])} rows, columns: {', '.join(t['header'])}")
        lines.append("")
    return "\n".join(lines)


def report(run_id: str, out_dir: str | os.PathLike | None = None) -> list[Path]:
    """Write CSV tables, a JSON summary and a markdown digest for a run."""
    data = load_run(run_id)
    out = Path(out_dir) if out_dir is not None else run_dir(run_id) / "report"
    paths = []
    for name, t in sorted(data["tables"].items()):
        p = out / f"{name}.csv"
        atomic_write(p, _csv_text(t["header"], t["rows"]))
        paths.append(p)
    p = out / "summary.json"
    atomic_write(p, json.dumps({"kind": data["kind"], "params": data["params"],
                                "summary": data["summary"]}, sort_keys=True, indent=1) + "\n")
    paths.append(p)
    p = out / "report.md"
    atomic_write(p, _markdown(run_id, data))
    paths.append(p)
    return paths
