"""Command-line verbs, output formats and exit codes."""

import json
import math
import subprocess
import sys

import pytest

from multiinfo.cli import run
from multiinfo.maximizers import construct_maximizer
from multiinfo.probspace import Distribution, ProductSpace


def call(capsys, *argv):
    code = run([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def diagonal_file(tmp_path):
    path = tmp_path / "p.json"
    path.write_text(construct_maximizer(ProductSpace((2, 2))).to_json())
    return path


@pytest.fixture
def positive_file(tmp_path):
    path = tmp_path / "q.json"
    p = Distribution.from_weights(ProductSpace((2, 2)), {(0, 0): 0.4, (0, 1): 0.1, (1, 0): 0.2, (1, 1): 0.3}, mode="float")
    path.write_text(p.to_json())
    return path


class TestExamples:
    def test_nmin(self, capsys):
        code, out, _ = call(capsys, "nmin", 2, 3)
        assert code == 0
        assert out.splitlines()[0] == "n_min = 4; T = {1/3,1/2,2/3,1}"
        assert "max = 3" in out and "LCM = 6" in out

    def test_construct(self, capsys):
        code, out, _ = call(capsys, "construct", 2, 2)
        assert code == 0
        assert json.loads(out) == {"cards": [2, 2], "mode": "rational", "probs": ["1/2", "0/1", "0/1", "1/2"]}

    def test_poset(self, capsys):
        code, out, _ = call(capsys, "poset", 2, 3)
        assert code == 0
        assert out.strip() == "12 maps; dims {0:6, 1:6}; connected: yes"


class TestVerbs:
    def test_info(self, capsys, diagonal_file):
        code, out, _ = call(capsys, "info", diagonal_file, "--json")
        data = json.loads(out)
        assert code == 0
        assert data["multi_information"] == pytest.approx(math.log(2))
        assert data["gap"] == pytest.approx(0.0, abs=1e-15)

    def test_check_exit_codes(self, capsys, diagonal_file, positive_file):
        code, out, _ = call(capsys, "check", diagonal_file)
        assert code == 0 and out.startswith("maximizer: yes")
        code, out, _ = call(capsys, "check", positive_file, "--json")
        assert code == 1 and json.loads(out) == {"maximizer": False, "witness": None}

    def test_exists(self, capsys):
        assert call(capsys, "exists", 2, 3, 4)[0] == 0
        code, out, _ = call(capsys, "exists", 2, 3, 3)
        assert code == 1 and out.startswith("exists: no")

    def test_enumerate(self, capsys):
        code, out, _ = call(capsys, "enumerate", 3, 2, "--json")
        assert code == 0 and len(json.loads(out)) == 6

    def test_poset_exports(self, capsys, tmp_path):
        edges, dot = tmp_path / "e.txt", tmp_path / "g.dot"
        code, out, _ = call(capsys, "poset", 2, 2, "--edges", edges, "--dot", dot, "--json")
        data = json.loads(out)
        assert code == 0 and data["connected"] is False and data["maps"] == 2
        assert len(edges.read_text().splitlines()) == len(data["edges"])
        assert dot.read_text().startswith("graph cover {")

    def test_poset_table(self, capsys):
        code, out, _ = call(capsys, "poset", 2, 3, "--table")
        assert len(out.splitlines()) == 13

    def test_decompose(self, capsys, positive_file):
        code, out, _ = call(capsys, "decompose", positive_file, "--json")
        rows = json.loads(out)
        assert code == 0
        assert [r["set"] for r in rows] == [[], [1], [2], [1, 2]]

    def test_decompose_function_file(self, capsys, tmp_path):
        path = tmp_path / "f.json"
        path.write_text(json.dumps({"cards": [2, 2], "values": [1.0, 2.0, 4.0, 11.0]}))
        code, out, _ = call(capsys, "decompose", path, "--json")
        norms = {tuple(r["set"]): r["norm"] for r in json.loads(out)}
        assert norms[(1, 2)] == pytest.approx(3.0)
        assert norms[()] == pytest.approx(9.0)

    def test_project(self, capsys, positive_file):
        code, out, _ = call(capsys, "project", positive_file, "--family", "factorizable", "--json")
        data = json.loads(out)
        assert code == 0 and data["dim"] == 2 and data["residual"] <= 1e-8

    def test_project_family_file(self, capsys, tmp_path, positive_file):
        fam = tmp_path / "fam.json"
        fam.write_text(json.dumps({"cards": [2, 2], "sets": [[1], [2]]}))
        code, out, _ = call(capsys, "project", positive_file, "--family", fam, "--json")
        assert code == 0 and json.loads(out)["dim"] == 2

    def test_approximate_csv(self, capsys, diagonal_file):
        code, out, _ = call(capsys, "approximate", diagonal_file, "--schedule", 1, 2, 4)
        lines = out.splitlines()
        assert code == 0 and lines[0] == "m_or_beta,kl,projection_residual" and len(lines) == 4

    def test_approximate_threshold_exit(self, capsys, tmp_path):
        path = tmp_path / "p.json"
        path.write_text(construct_maximizer(ProductSpace((2, 3, 6))).to_json())
        code, _, err = call(capsys, "approximate", path, "--threshold", 1e-3)
        assert code == 4 and "not below" in err

    def test_approximate_quadratic(self, capsys, diagonal_file):
        code, out, _ = call(capsys, "approximate", diagonal_file, "--method", "quadratic", "--json")
        assert code == 0 and json.loads(out)["kl"][-1] < 1e-2

    def test_search(self, capsys):
        code, out, _ = call(capsys, "search", 2, 2, "--restarts", 2, "--iters", 300, "--json")
        assert code == 0 and json.loads(out)["I"] == pytest.approx(math.log(2), abs=1e-6)

    def test_report(self, capsys):
        code, out, _ = call(capsys, "report", 3, 3, 3, "--json")
        data = json.loads(out)
        assert data["dim F"] == 6
        assert data["dim F* (pure pair star)"] == 2 * 2 * 2
        assert data["(n^2+3n)/2"] == 9
        assert data["3*sum(n_i-1)+2"] == 20

    def test_out_file(self, capsys, tmp_path):
        path = tmp_path / "out.json"
        code, out, _ = call(capsys, "construct", 2, 3, "--out", path)
        assert code == 0 and out == ""
        assert Distribution.from_json(path.read_text()).space.cards == (2, 3)


class TestErrors:
    def test_usage(self, capsys):
        with pytest.raises(SystemExit) as exc:
            run(["bogus"])
        assert exc.value.code == 2
        with pytest.raises(SystemExit) as exc:
            run(["nmin", "two"])
        assert exc.value.code == 2

    def test_validation(self, capsys):
        code, _, err = call(capsys, "nmin", 1, 2)
        assert code == 3 and err.startswith("error:")

    def test_no_maximizer(self, capsys):
        code, _, err = call(capsys, "construct", 2, 3, 3)
        assert code == 3 and "n_min" in err

    def test_budget(self, capsys):
        assert call(capsys, "enumerate", 3, 3, "--cap", 10)[0] == 3
        assert call(capsys, "exists", 4, 4, 8)[0] == 3

    def test_missing_file(self, capsys, tmp_path):
        assert call(capsys, "info", tmp_path / "nope.json")[0] == 3

    def test_nonconvergence(self, capsys, positive_file):
        code, _, _ = call(capsys, "project", positive_file, "--family", "factorizable", "--tol", 1e-15, "--max-iter", 1)
        assert code == 4


class TestDeterminism:
    @pytest.mark.parametrize(
        "argv",
        [["search", "2", "3", "--iters", "200", "--restarts", "2"], ["poset", "3", "4", "--json"], ["report", "2", "3", "6"]],
    )
    def test_byte_identical(self, argv):
        cmd = [sys.executable, "-m", "multiinfo", *argv]
        a = subprocess.run(cmd, capture_output=True, check=True).stdout
        b = subprocess.run(cmd, capture_output=True, check=True).stdout
        assert a == b and a

    def test_json_and_text_agree(self, capsys, diagonal_file):
        _, text, _ = call(capsys, "info", diagonal_file)
        _, js, _ = call(capsys, "info", diagonal_file, "--json")
        I_text = float(next(l for l in text.splitlines() if l.startswith("I = ")).split("=")[1])
        assert I_text == pytest.approx(json.loads(js)["multi_information"], rel=1e-11)
