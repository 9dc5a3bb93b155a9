import json
from fractions import Fraction

import pytest

from fairdiv import cli
from fairdiv.core import parse_allocation, parse_instance
from fairdiv.fairness import holds
from fairdiv.hardness import parse_formula, reduce
from fairdiv.nash import MnwKey, mnw_key

ZERO_NW = "3 3\n1,0,0\n1,0,0\n0,1,1\n"
FORMULA = "p cnf 3 4\n1 2 3 0\n1 2 3 0\n-1 -2 -3 0\n-1 -2 -3 0\n"


@pytest.fixture
def files(tmp_path):
    def put(name, text):
        p = tmp_path / name
        p.write_text(text)
        return str(p)

    return put


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr().out
    return code, out


def run_json(capsys, *argv):
    code, out = run(capsys, *argv, "--json")
    return code, json.loads(out)


class TestCheck:
    def test_good_allocation(self, capsys, files):
        code, out = run(capsys, "check", "--notion", "efx0", files("i.txt", ZERO_NW), files("a.txt", "0\n\n1 2\n"))
        assert code == 0 and "is EFX0" in out

    def test_bad_allocation_witness(self, capsys, files):
        inst, alloc = files("i.txt", ZERO_NW), files("a.txt", "0 1\n\n2\n")
        code, data = run_json(capsys, "check", "--notion", "efx0", inst, alloc)
        assert code == 1
        assert data["holds"] is False
        assert data["witness"] == {"envier": 1, "envied": 0, "good": 1}
        code, out = run(capsys, "check", "--notion", "efx0", inst, alloc)
        assert "agent 2 envies agent 1" in out and "g2" in out

    @pytest.mark.parametrize("notion", ["ef", "ef1", "efx", "efx0"])
    def test_agrees_with_library(self, capsys, files, notion):
        inst = parse_instance(ZERO_NW)
        for text in ("0\n\n1 2\n", "\n\n0 1 2\n", "0 1\n\n2\n", "\n0\n1 2\n"):
            code, data = run_json(capsys, "check", "--notion", notion, files("i.txt", ZERO_NW), files("a.txt", text))
            expected = holds(inst, parse_allocation(text, 3), notion)
            assert data["holds"] is expected and code == (0 if expected else 1)

    def test_parse_error_location(self, capsys, files):
        assert cli.main(["check", "--notion", "ef", files("i.txt", "2 2\n1,x\n1,1\n"), files("a.txt", "0\n1\n")]) == 2
        assert "line 2" in capsys.readouterr().err


class TestFactor:
    def test_vefx(self, capsys, files):
        inst = files("i.txt", "2 3\n3,0,1/2\n3,1,1/10\n")
        code, data = run_json(capsys, "factor", "--kind", "vefx", inst, files("a.txt", "0 2\n1\n"))
        assert code == 0 and data["factor"] == "10/11"
        code, data = run_json(capsys, "factor", "--kind", "efx", inst, files("a.txt", "0 2\n1\n"))
        assert data["factor"] == "1/3"


class TestMnw:
    def test_all_optima(self, capsys, files):
        code, data = run_json(capsys, "mnw", "--all-optima", files("i.txt", ZERO_NW))
        assert code == 0
        assert data["key"] == {"positive_count": 2, "product": "2"}
        assert sorted(data["allocations"]) == [[[], [0], [1, 2]], [[0], [], [1, 2]]]

    def test_binary_method(self, capsys, files):
        code, data = run_json(capsys, "mnw", "--method", "binary", files("i.txt", ZERO_NW))
        assert code == 0 and data["key"]["product"] == "2"

    def test_budget_exit_code(self, capsys, files):
        inst = files("i.txt", "3 6\n" + "1,1,1,1,1,1\n" * 3)
        assert cli.main(["mnw", "--budget", "10", inst]) == 3

    def test_writes_allocation(self, capsys, files, tmp_path):
        out = tmp_path / "best.txt"
        assert cli.main(["mnw", files("i.txt", ZERO_NW), "-o", str(out)]) == 0
        inst = parse_instance(ZERO_NW)
        assert mnw_key(inst, parse_allocation(out.read_text(), 3)) == MnwKey(2, Fraction(2))


class TestSolveAndPerturb:
    def test_match_freeze_trace(self, capsys, files, tmp_path):
        trace = tmp_path / "trace.json"
        inst = files("i.txt", "2 3\n2,1,1\n2,1,1\n")
        code, data = run_json(capsys, "solve", "--alg", "match-freeze", "--trace", str(trace), inst)
        assert code == 0 and data["check"]["holds"]
        assert json.loads(trace.read_text())["rounds"][0]["frozen"] == [0]

    def test_round_robin_ratio(self, capsys, files):
        inst = files("i.txt", "2 2\n1,3\n1,1\n")
        assert cli.main(["solve", "--alg", "round-robin", inst]) == 2
        with pytest.warns(UserWarning):
            assert cli.main(["solve", "--alg", "round-robin", "--no-strict", inst]) in (0, 1)

    def test_perturb(self, capsys, files):
        code, data = run_json(capsys, "perturb", files("i.txt", ZERO_NW))
        assert code == 0 and data["epsilon"] == "1/4"
        assert data["instance"]["values"][2] == ["1/4", "1", "1"]


class TestGenAndFixture:
    def test_gen_deterministic(self, capsys):
        argv = ["gen", "--kind", "two_value", "--agents", "3", "--goods", "6", "--seed", "7",
                "--param", "a=2", "--param", "b=1", "--param", "p_a=1/2"]
        _, first = run(capsys, *argv)
        _, second = run(capsys, *argv)
        assert first == second
        assert {v for row in parse_instance(first).values for v in row} == {1, 2}

    def test_gen_bad_param(self, capsys):
        assert cli.main(["gen", "--kind", "binary", "--agents", "2", "--goods", "2", "--param", "density"]) == 2

    def test_fixture_verify(self, capsys):
        code, data = run_json(capsys, "fixture", "three-value", "--params", "eps=1/10", "--verify")
        assert code == 0 and all(c["ok"] for c in data["verified"])

    def test_fixture_out_of_range(self, capsys):
        assert cli.main(["fixture", "three-value", "--params", "eps=2"]) == 2


class TestSearch:
    def test_rediscovers_three_value(self, capsys):
        code, data = run_json(capsys, "search", "--values", "9/10,1,11/10", "--agents", "2", "--goods", "3")
        assert code == 0 and data["complete"] and len(data["hits"]) == 1

    def test_incomplete_exits_3_and_resumes(self, capsys):
        argv = ["search", "--values", "9/10,1,11/10", "--agents", "2", "--goods", "2..3"]
        code, part = run_json(capsys, *argv, "--budget", "300")
        assert code == 3 and part["cursor"]
        code, rest = run_json(capsys, *argv, "--cursor", part["cursor"])
        assert code == 0 and rest["complete"]
        assert len(part["hits"]) + len(rest["hits"]) == 1


class TestHardness:
    def test_round_trip(self, capsys, files, tmp_path):
        formula = files("f.cnf", FORMULA)
        inst, alloc = tmp_path / "inst.txt", tmp_path / "alloc.txt"
        assert cli.main(["hardness", "reduce", formula, "-o", str(inst)]) == 0
        assert cli.main(["hardness", "build-alloc", formula, "--assignment", "1,1,0", "-o", str(alloc)]) == 0
        capsys.readouterr()
        code, data = run_json(capsys, "hardness", "verify", str(inst), str(alloc))
        assert code == 0 and data["meets_threshold"] is True
        r = reduce(parse_formula(FORMULA))
        assert Fraction(data["U"]) == r.U
        assert Fraction(data["nash_welfare"]) >= r.U

    def test_unsatisfying_assignment(self, capsys, files):
        assert cli.main(["hardness", "build-alloc", files("f.cnf", FORMULA), "--assignment", "0,0,0"]) == 2

    def test_below_threshold(self, capsys, files, tmp_path):
        inst = tmp_path / "inst.txt"
        cli.main(["hardness", "reduce", files("f.cnf", FORMULA), "-o", str(inst)])
        r = reduce(parse_formula(FORMULA))
        everything = " ".join(map(str, range(r.instance.m))) + "\n"
        assert cli.main(["hardness", "verify", str(inst), files("a.txt", everything)]) == 1


class TestUsage:
    def test_unknown_verb(self, capsys):
        assert cli.main(["frobnicate"]) == 2

    def test_missing_file(self, capsys):
        assert cli.main(["mnw", "/nonexistent/instance.txt"]) == 2

    @pytest.mark.parametrize(
        "argv",
        [
            ["fixture", "zero-good"],
            ["gen", "--kind", "interval", "--agents", "2", "--goods", "3"],
            ["search", "--values", "1", "--agents", "2", "--goods", "1..2"],
        ],
    )
    def test_json_everywhere(self, capsys, argv):
        code, out = run(capsys, *argv, "--json")
        assert code == 0
        json.loads(out)
