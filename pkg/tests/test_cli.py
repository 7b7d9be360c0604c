import json
import subprocess
import sys

import pytest

from kellyscf.cli import main, parse_profile_text
from kellyscf.prefcore import ParseError, parse_order

F1 = "alternatives: a b c\nc > b > a\na > b > c\na > b > c\n"
F2 = "alternatives: a b c\n# the second profile\nc > a > b\nb > a > c\n\na > b > c\n"


@pytest.fixture
def files(tmp_path):
    def write(name, text):
        path = tmp_path / name
        path.write_text(text)
        return str(path)

    return write


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def records(out):
    return [json.loads(line) for line in out.splitlines()]


# ---------------------------------------------------------------- profile files


def test_profile_file_parsing():
    prof, names = parse_profile_text(F2)
    assert names == ["a", "b", "c"] and prof.n == 3
    assert prof.voters[0] == parse_order("c > a > b")
    prof, names = parse_profile_text("y > x~z\nz > y > x\n")
    assert names == ["y", "x", "z"]
    assert prof.voters[0].levels == (0, 1, 1)


@pytest.mark.parametrize("text,line,col", [
    ("alternatives: a b c\na > b > c\na > d > c\n", 3, 5),
    ("a > b\nb > a > c\n", 1, 1),
    ("alternatives: a b c\na > > c\n", 2, 1),
])
def test_profile_parse_errors_carry_position(text, line, col):
    with pytest.raises(ParseError) as exc:
        parse_profile_text(text)
    assert (exc.value.line, exc.value.column) == (line, col)
    assert f"line {line}, column {col}" in str(exc.value)


def test_profile_file_needs_voters():
    with pytest.raises(ParseError):
        parse_profile_text("# nothing\n\n")


# ---------------------------------------------------------------- commands


def test_eval(capsys, files):
    assert run(capsys, "eval", "fstar", files("r1.txt", F1))[:2] == (0, "{a}\n")
    assert run(capsys, "eval", "fstar", files("r2.txt", F2))[:2] == (0, "{a,b,c}\n")


def test_eval_domain_error_is_usage(capsys, files):
    code, _, err = run(capsys, "eval", "two-star-plurality", files("w.txt", "a~b > c\na > b > c\n"))
    assert code == 2 and "strict" in err


def test_parse_error_exit_code(capsys, files):
    code, out, err = run(capsys, "eval", "pareto", files("bad.txt", "alternatives: a b\na > q\n"))
    assert code == 2 and out == "" and "line 2" in err


def test_matrix_outputs(capsys, files):
    r1, r2 = files("r1.txt", F1), files("r2.txt", F2)
    _, s1, _ = run(capsys, "matrix", r1, "--which", "support")
    _, s2, _ = run(capsys, "matrix", r2, "--which", "support")
    assert s1 == s2 and s1.strip()
    rank_a = files("k1.txt", "a~b > c~d\nc~d > a~b\na > b~c~d\n")
    rank_b = files("k2.txt", "alternatives: a b c d\na~c > b~d\nb~d > a~c\na > b~c~d\n")
    _, k1, _ = run(capsys, "matrix", rank_a)
    _, k2, _ = run(capsys, "matrix", rank_b)
    assert k1 == k2
    _, mg, _ = run(capsys, "matrix", files("t.txt", "a > b\nb > a\n"), "--which", "margins")
    assert all(v == "0" for line in mg.splitlines()[1:] for v in line.split()[1:])
    code, out, _ = run(capsys, "matrix", r1, "--which", "majority")
    assert code == 0 and len(out.splitlines()) == 4


def test_check_pass_and_fail(capsys):
    code, out, _ = run(capsys, "check", "pareto", "strategyproof", "--m", "3", "--n", "2")
    assert code == 0
    rec = records(out)[0]
    assert rec["verdict"] == "pass" and rec["tool"] == "kellyscf" and "elapsed_ms" in rec
    code, out, _ = run(capsys, "check", "borda", "strategyproof", "--m", "3", "--n", "3", "--stable")
    rec = records(out)[0]
    assert code == 1 and rec["verdict"] == "fail" and rec["witness"]["voter"] is not None
    assert "elapsed_ms" not in rec


def test_check_usage_errors(capsys):
    code, _, err = run(capsys, "check", "pareto", "stratgyproof", "--m", "3", "--n", "2")
    assert code == 2 and "strategyproof" in err
    code, _, err = run(capsys, "check", "paretto", "strategyproof", "--m", "3", "--n", "2")
    assert code == 2 and "pareto" in err
    assert run(capsys, "check", "pareto", "strategyproof", "--m", "3")[0] == 2
    assert run(capsys, "check", "pareto", "strategyproof", "--m", "0", "--n", "2")[0] == 2
    assert run(capsys, "check", "pareto", "strategyproof", "--m", "3", "--n", "2", "--jobs", "0")[0] == 2
    assert run(capsys, "check", "two-star-plurality", "strategyproof", "--m", "3", "--n", "3")[0] == 2
    assert run(capsys, "check", "pareto", "strategyproof", "--m", "9", "--n", "30")[0] == 2


def test_stable_reports_are_byte_identical(capsys):
    argv = ["check", "borda", "support-based", "--m", "3", "--n", "3", "--stable"]
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]
    argv = ["verify", "thm1", "--stable", "--trace"]
    first, second = run(capsys, *argv)[1], run(capsys, *argv)[1]
    assert first == second and records(first)[0]["trace"]


def test_jobs_do_not_change_stable_report(capsys):
    from kellyscf import axioms

    base = ["check", "borda", "strategyproof", "--m", "4", "--n", "3", "--stable"]
    out = []
    for jobs in ("1", "2"):
        axioms._OUTCOME_CACHE.clear()
        rec = records(run(capsys, *base, "--jobs", jobs)[1])[0]
        rec.pop("command")
        out.append(rec)
    assert out[0] == out[1] and out[0]["verdict"] == "fail"


def test_nominators(capsys):
    code, out, _ = run(capsys, "nominators", "pareto", "--m", "3", "--n", "3")
    assert code == 0 and records(out)[0]["nominators"] == [1, 2, 3]
    _, out, _ = run(capsys, "nominators", "fstar", "--m", "3", "--n", "3")
    assert records(out)[0]["nominators"] == []


def test_verify(capsys):
    code, out, _ = run(capsys, "verify", "thm1")
    rec = records(out)[0]
    assert code == 0 and rec["matched"] and rec["audit"]["unsound"] == 0 and rec["audit"]["replay_matches"]
    assert run(capsys, "verify", "thm1", "--jobs", "2")[0] == 2
    assert run(capsys, "verify", "nope")[0] == 2
    assert run(capsys, "verify")[0] == 2


def test_verify_mismatch_exit_code(capsys, files):
    text = ("scenario: wrong\nm: 3\nn: 2\naxioms: ParetoPrune\nexpect: contradiction\n\n"
            "profile R0\na > b > c\na > b > c\n")
    code, out, err = run(capsys, "verify", "--file", files("w.scn", text))
    assert code == 1 and "no contradiction" in err
    assert records(out)[0]["problems"]


def test_verify_from_exported_file(capsys, files):
    _, text, _ = run(capsys, "export-scenario", "lemma1-example")
    code, out, _ = run(capsys, "verify", "--file", files("l.scn", text))
    assert code == 0 and records(out)[0]["matched"]


def test_solve(capsys):
    code, out, _ = run(capsys, "solve", "pairwise-corollary", "--stable")
    rec = records(out)[0]
    assert code == 0 and rec["status"] == "unsatisfiable"
    code, out, _ = run(capsys, "solve", "pairwise-corollary", "--nodes", "0", "--no-collapse")
    assert code in (0, 3)


def test_solve_budget_exit_code(capsys, files):
    text = ("scenario: open\nm: 3\nn: 2\naxioms: ParetoPrune StrategyproofArcs\ndomain: full\n")
    code, out, _ = run(capsys, "solve", "--file", files("o.scn", text), "--nodes", "1")
    assert code == 3 and records(out)[0]["status"] == "budget-exceeded"


def test_listings(capsys):
    _, out, _ = run(capsys, "scenarios")
    names = [r["name"] for r in records(out)]
    assert {"lemma1-example", "thm1", "thmC1", "thm1-boundaries"} <= set(names)
    _, out, _ = run(capsys, "rules")
    assert "fstar" in {r["name"] for r in records(out)}


def test_argparse_errors_map_to_usage(capsys):
    assert run(capsys, "frobnicate")[0] == 2
    assert run(capsys)[0] == 2
    assert run(capsys, "--help")[0] == 0


def test_module_entry_point(tmp_path):
    path = tmp_path / "p.txt"
    path.write_text("a > b > c\na > c > b\n")
    proc = subprocess.run([sys.executable, "-m", "kellyscf", "eval", "pareto", str(path)],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == "{a}\n"
