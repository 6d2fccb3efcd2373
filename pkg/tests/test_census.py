from __future__ import annotations

import json

import pytest

from oracles import is_sring
from schurkit import census as cz
from schurkit.census import (CensusResult, ci_sample, cyclotomic_srings, enumerate_srings,
                             is_schurian, load_run, orbit_representatives, parse_scope, report,
                             sample_subsets, save_run, subset_census, verify_lemma)
from schurkit.errors import BudgetExceeded, InvalidArgument
from schurkit.groups import Group, automorphism_group
from schurkit.iso import is_arc_isomorphism
from schurkit.sring import is_p_sring, validate_sring

C4 = Group.parse("C4")
C6 = Group.parse("C6")
C8 = Group.parse("C8")


def _set_partitions(items):
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in _set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


def _all_srings_brute(G):
    out = set()
    for part in _set_partitions(list(range(1, G.order))):
        classes = [[0]] + part
        if is_sring(G, classes):
            out.add(validate_sring(G, classes).masks)
    return out


# orbit reduction and the subset census --------------------------------------------


@pytest.mark.parametrize("spec", ["C6", "C8", "C2^3", "C4xC2"])
def test_orbit_representatives(spec):
    G = Group.parse(spec)
    auts = automorphism_group(G).elements
    reps = list(orbit_representatives(G))
    assert sum(size for _, size in reps) == 1 << G.order
    # Burnside: number of orbits = average number of fixed subsets
    fixed = 0
    for f in auts:
        seen, cycles = set(), 0
        for x in range(G.order):
            if x not in seen:
                cycles += 1
                while x not in seen:
                    seen.add(x)
                    x = f[x]
        fixed += 2 ** cycles
    assert len(reps) == fixed // len(auts)


def test_census_c6_and_c8():
    r6 = subset_census(C6)
    assert r6.pairs == [] and all(r.ci_flag for r in r6.records)
    r8 = subset_census(C8)
    assert r8.pairs
    auts = automorphism_group(C8).elements
    for p in r8.pairs:
        assert is_arc_isomorphism(C8, p.S, p.T, p.f)
        assert all(cz._img(f, p.S) != p.T for f in auts)
    flagged = [r for r in r8.records if not r.ci_flag]
    assert len(flagged) == 2 * len(r8.pairs)


def _classes_by_subset(res: CensusResult, G: Group) -> dict[int, int]:
    out = {}
    act = cz.SubsetAction(G)
    for r in res.records:
        for m in (act.orbit(r.subset) if res.reduced else [r.subset]):
            out[m] = r.canonical_hash
    return out


def test_reduction_preserves_classes():
    a = _classes_by_subset(subset_census(C8), C8)
    b = _classes_by_subset(subset_census(C8, reduce=False), C8)
    assert a == b
    assert subset_census(C8).iso_classes == subset_census(C8, reduce=False).iso_classes


def test_census_table_columns():
    header, rows = subset_census(C6).table()
    assert header == ["orbit_rep_bitmask", "orbit_size", "canonical_hash", "iso_class_id",
                      "ci_flag"]
    assert all(len(r[2]) == 16 for r in rows)


def test_census_size_cap():
    with pytest.raises(BudgetExceeded):
        subset_census(Group.parse("C17"))


def test_checkpoint_resume(tmp_path, monkeypatch):
    ck = tmp_path / "ck.json"
    G = Group.parse("C4xC2")
    full = subset_census(G)

    def stop(done, total):
        if done == 25:
            raise KeyboardInterrupt

    with pytest.raises(KeyboardInterrupt):
        subset_census(G, checkpoint=ck, every=10, progress=stop)
    saved = json.loads(ck.read_text())["forms"]
    assert 10 <= len(saved) < len(full.records)
    resumed = subset_census(G, checkpoint=ck)
    assert resumed.table() == full.table()
    # a finished checkpoint needs no new canonical forms at all
    monkeypatch.setattr(cz, "subset_form", lambda *a: pytest.fail("recomputed a form"))
    assert subset_census(G, checkpoint=ck).table() == full.table()


def test_checkpoint_group_mismatch(tmp_path):
    ck = tmp_path / "ck.json"
    subset_census(C6, checkpoint=ck)
    with pytest.raises(InvalidArgument):
        subset_census(C8, checkpoint=ck)


# sampling ------------------------------------------------------------------------------


def test_sampling_is_seeded():
    G = Group.parse("C4xC3^2")
    a = sample_subsets(G, 50, 7)
    assert a == sample_subsets(G, 50, 7)
    assert a != sample_subsets(G, 50, 8)
    assert all(0 <= s < 1 << 36 for s in a)
    with pytest.raises(InvalidArgument):
        sample_subsets(G, 1, -1)


def test_ci_sample_c6():
    res = ci_sample(C6, 30, seed=11)
    assert res.counts()["non-ci"] == 0 and not res.halted
    assert res.table() == ci_sample(C6, 30, seed=11).table()


def test_ci_sample_halts_with_witness():
    # C8 is not a DCI-group, so a long enough sample meets a non-CI subset
    res = ci_sample(C8, 500, seed=3)
    assert res.halted
    w = res.rows[-1].witness
    assert cz.verify_subset_witness(C8, w["S"], w["T"], w["f"])


# enumeration ----------------------------------------------------------------------------


def test_p_srings_c4():
    got = {A.classes for A in enumerate_srings(C4, "p-srings")}
    assert got == {((0,), (1,), (2,), (3,)), ((0,), (2,), (1, 3))}


def test_p_srings_c3sq_are_zg_or_wreath():
    G = Group.parse("C3^2")
    rings = enumerate_srings(G, "p-srings")
    assert sum(A.is_group_ring() for A in rings) == 1
    for A in rings:
        if A.is_group_ring():
            continue
        # ZC3 wr ZC3: an order-3 subgroup in singletons, two cosets outside
        sizes = sorted(len(c) for c in A.classes)
        assert sizes == [1, 1, 1, 3, 3]
        inner = sorted(x for c in A.classes if len(c) == 1 for x in c)
        assert all(G.mul(a, b) in inner for a in inner for b in inner)
    assert len(rings) == 5


@pytest.mark.parametrize("spec", ["C4", "C8", "C9", "C3^2", "C2^3", "C4xC2"])
def test_p_srings_match_filtered_all(spec):
    G = Group.parse(spec)
    p = G.order and [q for q in (2, 3) if G.order % q == 0][0]
    direct = {A.masks for A in enumerate_srings(G, "p-srings")}
    filtered = {A.masks for A in enumerate_srings(G, "all") if is_p_sring(A, p)}
    assert direct == filtered


@pytest.mark.parametrize("spec", ["C4", "C5", "C6", "C7", "C8", "C2^3", "C3^2"])
def test_all_mode_matches_partition_brute_force(spec):
    G = Group.parse(spec)
    got = {A.masks for A in enumerate_srings(G, "all")}
    assert got == _all_srings_brute(G)


def test_all_mode_closed_under_power_maps():
    G = Group.parse("C12")
    rings = enumerate_srings(G, "all")
    for A in rings:
        for m in G.units():
            for X in A.masks:
                assert A.is_basic(G.set_pow(X, m))
    with pytest.raises(BudgetExceeded):
        enumerate_srings(Group.parse("C13"), "all")
    with pytest.raises(InvalidArgument):
        enumerate_srings(C6, "p-srings")
    with pytest.raises(InvalidArgument):
        enumerate_srings(C6, "some")


def _join(p, q, n):
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    for part in (p, q):
        for block in part:
            for x in block[1:]:
                a, b = find(block[0]), find(x)
                if a != b:
                    parent[max(a, b)] = min(a, b)
    blocks = {}
    for x in range(n):
        blocks.setdefault(find(x), []).append(x)
    return frozenset(tuple(b) for b in blocks.values())


@pytest.mark.parametrize("spec,count", [("C4", 2), ("C8", 5), ("C4xC3^2", 143)])
def test_cyclotomic_enumeration(spec, count):
    G = Group.parse(spec)
    n = G.order
    # orbits of a subgroup are the join of the orbits of its elements
    cyc = set()
    for f in automorphism_group(G).elements:
        blocks = []
        seen = set()
        for x in range(n):
            if x in seen:
                continue
            b = []
            while x not in seen:
                seen.add(x)
                b.append(x)
                x = f[x]
            blocks.append(tuple(sorted(b)))
        cyc.add(frozenset(blocks))
    parts = set(cyc)
    frontier = set(cyc)
    while frontier:
        new = {_join(p, q, n) for p in frontier for q in cyc} - parts
        parts |= new
        frontier = new
    got = cyclotomic_srings(G)
    assert len(got) == len(parts) == count
    assert {frozenset(A.classes) for A, _ in got} == parts
    for A, K in got:
        assert is_schurian(A)


# lemma suites ----------------------------------------------------------------------------


@pytest.mark.parametrize("name", ["burn", "sch", "intersection", "separat", "tenspr"])
def test_structural_lemmas_small(name):
    rep = verify_lemma(name, "all:C4;C6;C8;C3^2")
    assert rep.instances_checked > 0 and rep.failures == []


def test_lemma_scopes():
    assert parse_scope("cyclotomic:C4;C8")[0] == "cyclotomic"
    for bad in ("C4", "nowhere:C4", "all:"):
        with pytest.raises(InvalidArgument):
            parse_scope(bad)
    with pytest.raises(InvalidArgument):
        verify_lemma("unknown")
    with pytest.raises(InvalidArgument):
        verify_lemma("burn", "groups:C4")


def test_lemma_detects_planted_failure(monkeypatch):
    monkeypatch.setattr(cz, "is_p_sring", lambda A, p: False)
    rep = verify_lemma("minpring", "cyclotomic:C4")
    assert rep.failures and not rep.ok
    assert {"group", "classes", "H"} <= set(rep.failures[0])


def test_orders_lemma():
    rep = verify_lemma("orders", "groups:C4xC3;C3^2;C8")
    assert rep.instances_checked > 0 and rep.ok


def test_schurian_filter():
    G = Group.parse("C3^2")
    rings = enumerate_srings(G, "all")
    schurian = [A for A in rings if is_schurian(A)]
    assert 0 < len(schurian) <= len(rings)
    assert verify_lemma("burn", "schurian:C3^2").ok


# runs and reports --------------------------------------------------------------------------


def test_report_round_trip(tmp_path):
    res = subset_census(C8)
    save_run("c8", "subset-census", {"group": "C8"}, res.summary(), {"census": res.table()})
    a = [p.read_bytes() for p in report("c8", tmp_path / "a")]
    b = [p.read_bytes() for p in report("c8", tmp_path / "b")]
    assert a == b
    csv_lines = (tmp_path / "a" / "census.csv").read_text().splitlines()
    assert len(csv_lines) == 1 + len(res.records)
    assert load_run("c8")["summary"]["non_ci_pairs"] == len(res.pairs)


def test_empty_run_has_headers(tmp_path):
    save_run("empty", "subset-census", {}, {}, {"census": (["a", "b"], [])})
    paths = report("empty", tmp_path)
    assert (tmp_path / "census.csv").read_text() == "a,b\n"
    assert {p.name for p in paths} == {"census.csv", "summary.json", "report.md"}


def test_missing_run():
    with pytest.raises(InvalidArgument):
        report("nope")
    with pytest.raises(InvalidArgument):
        load_run("../etc")
