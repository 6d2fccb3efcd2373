"""The ``schur-kit`` command line.

Exit codes: 0 success, 1 a lemma or property failure (or a non-CI sample),
2 a budget ran out and some verdicts are undecided, 3 bad input.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import census
from .build import (circ_classify, classify_main2, detect_s_wreath, detect_tensor, revalidate,
                    section_condition)
from .errors import BudgetExceeded, InvalidArgument, PropertyViolation, SchurKitError
from .groups import Group, automorphism_group, in_class_ec, subgroup_masks
from .sring import SRing

EXIT_OK, EXIT_FAIL, EXIT_BUDGET, EXIT_INPUT = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _emit(obj) -> None:
    print(json.dumps(obj, sort_keys=True, indent=1))


def _group(text: str) -> Group:
    try:
        return Group.parse(text)
    except (InvalidArgument, ValueError) as exc:
        raise InvalidArgument(f"bad group spec {text!r}: {exc}") from exc


def cmd_group(args) -> int:
    G = _group(args.spec)
    info = {"name": G.name, "factors": list(G.factors), "order": G.order,
            "primary_type": list(G.primary_type), "exponent": G.exponent,
            "cyclic": G.is_cyclic(), "in_class_ec": in_class_ec(G),
            "aut_order": len(automorphism_group(G).elements),
            "subgroups": len(subgroup_masks(G))}
    _emit(info)
    return EXIT_OK


def _progress(enabled: bool):
    if not enabled:
        return None

    def show(done, total):
        if done == total or done % 100 == 0:
            print(f"\r{done}/{total}", end="\n" if done == total else "", file=sys.stderr,
                  flush=True)

    return show


def cmd_subset_census(args) -> int:
    G = _group(args.group)
    run_id = args.run or f"subset-census-{G.name}" + ("" if not args.no_reduce else "-full")
    ck = args.checkpoint or census.cache_dir() / "checkpoints" / f"{run_id}.json"
    res = census.subset_census(G, reduce=not args.no_reduce, checkpoint=ck,
                               progress=_progress(args.progress))
    summary = res.summary()
    tables = {"census": res.table(),
              "non_ci_pairs": (["S", "T", "f"],
                               [[p.S, p.T, " ".join(map(str, p.f))] for p in res.pairs])}
    census.save_run(run_id, "subset-census",
                    {"group": G.name, "reduced": not args.no_reduce}, summary, tables)
    _emit({"run": run_id, **summary})
    return EXIT_OK


def cmd_ci_sample(args) -> int:
    G = _group(args.group)
    run_id = args.run or f"ci-sample-{G.name}-{args.count}-{args.seed}"
    res = census.ci_sample(G, args.count, args.seed, budget=args.budget,
                           progress=_progress(args.progress))
    summary = res.summary()
    census.save_run(run_id, "ci-sample",
                    {"group": G.name, "count": args.count, "seed": args.seed,
                     "budget": args.budget}, summary, {"samples": res.table()})
    _emit({"run": run_id, **summary})
    if res.halted:
        return EXIT_FAIL
    return EXIT_BUDGET if summary["undecided"] else EXIT_OK


def cmd_enumerate(args) -> int:
    G = _group(args.group)
    rings = census.enumerate_srings(G, args.mode)
    run_id = args.run or f"srings-{args.mode}-{G.name}"
    rows = [[i, A.rank, json.dumps([list(c) for c in A.classes], separators=(",", ":"))]
            for i, A in enumerate(rings)]
    summary = {"group": G.name, "mode": args.mode, "count": len(rings)}
    census.save_run(run_id, "enumerate-srings", {"group": G.name, "mode": args.mode}, summary,
                    {"srings": (["ring_id", "rank", "classes"], rows)})
    _emit({"run": run_id, **summary})
    return EXIT_OK


def cmd_verify(args) -> int:
    rep = census.verify_lemma(args.name, args.scope)
    run_id = args.run or f"lemma-{args.name}"
    census.save_run(run_id, "verify-lemma", {"lemma": args.name, "scope": rep.scope},
                    rep.to_json(),
                    {"failures": (["failure"], [[json.dumps(f, sort_keys=True)]
                                                 for f in rep.failures])})
    _emit({"run": run_id, **rep.to_json(), "runtime": round(rep.runtime, 3)})
    return EXIT_OK if rep.ok else EXIT_FAIL


def cmd_main2(args) -> int:
    G = _group(args.group)
    res = census.main2_census(G, budget=args.budget, progress=_progress(args.progress))
    run_id = args.run or f"main2-census-{G.name}"
    summary = res.summary()
    census.save_run(run_id, "main2-census", {"group": G.name, "budget": args.budget}, summary,
                    {"rings": res.table()})
    _emit({"run": run_id, **summary})
    if res.unexplained:
        return EXIT_FAIL
    return EXIT_BUDGET if res.undecided_pairs else EXIT_OK


def decompose(A: SRing) -> dict:
    """Everything the classifiers can say about one S-ring."""
    G = A.group
    out = {"group": G.name, "rank": A.rank,
           "tensor": [[list(a.elements), list(b.elements)] for a, b in detect_tensor(A)],
           "s_wreath": []}
    for w in detect_s_wreath(A, nontrivial_only=True):
        S = w.section
        try:
            flags = sorted(section_condition(A, S))
        except SchurKitError:
            flags = []
        out["s_wreath"].append({"upper": list(S.upper.elements),
                                "lower": list(S.lower.elements), "conditions": flags})
    if G.is_cyclic():
        try:
            out["circ"] = sorted(circ_classify(A))
        except PropertyViolation as exc:
            out["circ"] = {"error": str(exc)}
    try:
        rep = classify_main2(A)
    except InvalidArgument:
        pass
    else:
        revalidate(A, rep)
        out["main2"] = rep.to_json()
    return out


def cmd_decompose(args) -> int:
    path = Path(args.input)
    try:
        obj = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidArgument(f"cannot read {path}: {exc}") from exc
    if not isinstance(obj, dict) or "group" not in obj or "classes" not in obj:
        raise InvalidArgument("expected a JSON object with 'group' and 'classes'")
    g = obj["group"]
    G = _group(g) if isinstance(g, str) else Group.from_json(g)
    from .sring import validate_sring

    A = validate_sring(G, obj["classes"])
    out = decompose(A)
    _emit(out)
    if G.is_cyclic() and isinstance(out.get("circ"), dict):
        return EXIT_FAIL
    if "main2" in out and not out["main2"]["statements"]:
        return EXIT_FAIL
    return EXIT_OK


def cmd_report(args) -> int:
    paths = census.report(args.run, args.out)
    for p in paths:
        print(p)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="schur-kit", description="S-rings, Cayley isomorphism and CI censuses "
                                                "over small abelian groups.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("group", help="describe a group such as C4xC3^2")
    g.add_argument("spec")
    g.set_defaults(func=cmd_group)

    def run_opts(q, progress=True):
        q.add_argument("--run", help="run id for the cache (default derived from arguments)")
        if progress:
            q.add_argument("--progress", action="store_true", help="progress on stderr")

    c = sub.add_parser("subset-census", help="all subsets up to Aut(G), grouped by isomorphism")
    c.add_argument("group")
    c.add_argument("--no-reduce", action="store_true", help="skip Aut(G)-orbit reduction")
    c.add_argument("--checkpoint", type=Path, help="checkpoint file (default under the cache)")
    run_opts(c)
    c.set_defaults(func=cmd_subset_census)

    s = sub.add_parser("ci-sample", help="CI verdicts for seeded random subsets")
    s.add_argument("group")
    s.add_argument("--count", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--budget", type=int, default=200_000)
    run_opts(s)
    s.set_defaults(func=cmd_ci_sample)

    e = sub.add_parser("enumerate-srings", help="list S-rings over a group")
    e.add_argument("group")
    e.add_argument("--mode", choices=census.MODES, required=True)
    run_opts(e, progress=False)
    e.set_defaults(func=cmd_enumerate)

    v = sub.add_parser("verify-lemma", help="check a lemma's conclusion on enumerated instances")
    v.add_argument("--name", choices=census.LEMMAS, required=True)
    v.add_argument("--scope", help="source:group;group, e.g. cyclotomic:C4;C8")
    run_opts(v, progress=False)
    v.set_defaults(func=cmd_verify)

    m = sub.add_parser("main2-census", help="classify the cyclotomic S-rings over C4 x Cp^2")
    m.add_argument("group")
    m.add_argument("--budget", type=int, default=20_000)
    run_opts(m)
    m.set_defaults(func=cmd_main2)

    d = sub.add_parser("decompose", help="classify an S-ring given as JSON")
    d.add_argument("--input", required=True)
    d.set_defaults(func=cmd_decompose)

    r = sub.add_parser("report", help="write CSV, JSON and markdown for a cached run")
    r.add_argument("--run", required=True)
    r.add_argument("--out", type=Path)
    r.set_defaults(func=cmd_report)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except InvalidArgument as exc:
        print(f"bad input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except PropertyViolation as exc:
        print(f"property failure: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
