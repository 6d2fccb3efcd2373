from __future__ import annotations

import json
import subprocess
import sys

import pytest

from schurkit.cli import EXIT_BUDGET, EXIT_FAIL, EXIT_INPUT, EXIT_OK, main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_group(capsys):
    code, out, _ = run(capsys, "group", "C4xC3^2")
    info = json.loads(out)
    assert code == EXIT_OK
    assert info["order"] == 36 and info["aut_order"] == 96 and info["in_class_ec"]


@pytest.mark.parametrize("argv", [["group", "C0"], ["group", "D8"], ["nope"],
                                  ["ci-sample", "C6", "--count", "3"],
                                  ["enumerate-srings", "C6", "--mode", "x"],
                                  ["report", "--run", "missing"]])
def test_bad_input(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        sys.exit(main(argv))
    assert exc.value.code == EXIT_INPUT


def test_subset_census_and_report(capsys, tmp_path):
    code, out, _ = run(capsys, "subset-census", "C8", "--run", "c8")
    assert code == EXIT_OK and json.loads(out)["non_ci_pairs"] == 4
    code, out, _ = run(capsys, "report", "--run", "c8", "--out", str(tmp_path))
    assert code == EXIT_OK
    names = {p.split("/")[-1] for p in out.split()}
    assert {"census.csv", "non_ci_pairs.csv", "summary.json", "report.md"} <= names
    first = (tmp_path / "report.md").read_bytes()
    run(capsys, "report", "--run", "c8", "--out", str(tmp_path))
    assert (tmp_path / "report.md").read_bytes() == first


def test_ci_sample_exit_codes(capsys):
    code, out, _ = run(capsys, "ci-sample", "C6", "--count", "10", "--seed", "1")
    assert code == EXIT_OK and json.loads(out)["ci"] == 10
    code, out, _ = run(capsys, "ci-sample", "C8", "--count", "400", "--seed", "3")
    assert code == EXIT_FAIL and json.loads(out)["witness"]
    # a budget of one node cannot decide anything beyond the trivial cases
    code, out, _ = run(capsys, "ci-sample", "C4xC3^2", "--count", "5", "--seed", "2",
                       "--budget", "1")
    assert code in (EXIT_OK, EXIT_BUDGET)
    if code == EXIT_BUDGET:
        assert json.loads(out)["undecided"] > 0


def test_enumerate_and_verify(capsys):
    code, out, _ = run(capsys, "enumerate-srings", "C4", "--mode", "p-srings")
    assert code == EXIT_OK and json.loads(out)["count"] == 2
    code, out, _ = run(capsys, "enumerate-srings", "C13", "--mode", "all")
    assert code == EXIT_BUDGET
    code, out, _ = run(capsys, "verify-lemma", "--name", "burn", "--scope", "all:C6")
    assert code == EXIT_OK and json.loads(out)["failures"] == []


def test_decompose(capsys, tmp_path):
    f = tmp_path / "a.json"
    f.write_text(json.dumps({"group": "C4", "classes": [[0], [2], [1, 3]]}))
    code, out, _ = run(capsys, "decompose", "--input", str(f))
    info = json.loads(out)
    assert code == EXIT_OK
    assert info["s_wreath"] and info["circ"]
    f.write_text(json.dumps({"group": "C4xC3^2",
                             "classes": [[x] for x in range(36)]}))
    code, out, _ = run(capsys, "decompose", "--input", str(f))
    assert code == EXIT_OK and json.loads(out)["main2"]["statements"]
    f.write_text(json.dumps({"group": "C4", "classes": [[0], [1], [2, 3]]}))
    assert run(capsys, "decompose", "--input", str(f))[0] == EXIT_INPUT
    f.write_text("not json")
    assert run(capsys, "decompose", "--input", str(f))[0] == EXIT_INPUT


def test_console_script():
    r = subprocess.run([sys.executable, "-m", "schurkit", "group", "C6"], capture_output=True,
                       text=True)
    assert r.returncode == 0 and json.loads(r.stdout)["cyclic"]
