import csv
import io
import json
import math

import pytest

from hardy.cli import main, to_json
from hardy.core import Exponents, compute_B
from hardy.instance import build_discrete_hardy, save_instance
from hardy.sharpness import witness_function
from hardy.suites import gap_instance, pathology_instance

from hardy.instance import DiscreteInstance
from hardy.measure import RealMeasure


@pytest.fixture
def unit_file(tmp_path):
    inst = DiscreteInstance.from_points([("x", 0, 1)], RealMeasure.from_parts([(1, 1)]))
    path = tmp_path / "unit.json"
    save_instance(inst, path)
    return str(path)


@pytest.fixture
def hardy_file(tmp_path):
    path = tmp_path / "dh.json"
    save_instance(build_discrete_hardy(2, 20), path)
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def as_json(text):
    return json.loads(text)


class TestConstant:
    def test_unit(self, capsys, unit_file):
        code, out, _ = run(capsys, "constant", "--instance", unit_file)
        doc = as_json(out)
        assert code == 0 and doc["B"] == 1 and doc["C_B*B"] == pytest.approx(2)
        for key in ("B", "B_witness_r", "B_prime", "C_B", "C_hat", "C_upper",
                    "verdicts", "timings"):
            assert key in doc
        assert doc["timings"] is None

    def test_discrete_hardy_one_term(self, capsys, tmp_path):
        path = tmp_path / "d1.json"
        save_instance(build_discrete_hardy(2, 1), path)
        code, out, _ = run(capsys, "constant", "--instance", str(path))
        assert code == 0 and as_json(out)["B"] == 1

    def test_pathology(self, capsys, tmp_path):
        path = tmp_path / "bad.json"
        save_instance(pathology_instance(), path)
        code, out, _ = run(capsys, "constant", "--instance", str(path))
        doc = as_json(out)
        assert code == 0 and doc["verdicts"][0]["name"] == "unbounded"
        assert doc["certificate"]["point_id"] == "x" and doc["B"] == "inf"

    def test_verbose_candidates(self, capsys, unit_file):
        _, out, _ = run(capsys, "constant", "--instance", unit_file, "--verbose")
        assert [c["r"] for c in as_json(out)["candidates"]] == [0, 1]

    def test_closed_mode(self, capsys, tmp_path):
        path = tmp_path / "gap.json"
        save_instance(gap_instance(), path)
        _, out, _ = run(capsys, "constant", "--instance", str(path), "--mode", "closed")
        doc = as_json(out)
        assert doc["B"] == 0 and doc["B_prime"] == 1 and doc["C_upper"] == pytest.approx(2)

    def test_timings_on_request(self, capsys, unit_file):
        _, out, _ = run(capsys, "constant", "--instance", unit_file, "--timings")
        assert isinstance(as_json(out)["timings"]["constant"], float)


class TestErrors:
    def test_q_below_p(self, capsys, unit_file):
        code, _, err = run(capsys, "constant", "--instance", unit_file, "--p", "3", "--q", "2")
        assert code == 3 and "q=2.0 < p=3.0" in err

    def test_parse_error(self, capsys, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"kind": "discrete",\n  "points": [,]}')
        code, _, err = run(capsys, "constant", "--instance", str(path))
        assert code == 2 and "line 2, column 14" in err

    def test_semantic_error(self, capsys, tmp_path):
        path = tmp_path / "neg.json"
        path.write_text('{"kind": "discrete", "points": [{"id": "a", "level": 0, "mu1": -1}]}')
        code, _, err = run(capsys, "constant", "--instance", str(path))
        assert code == 2 and "points[0].mu1" in err

    def test_missing_file(self, capsys, tmp_path):
        code, _, _ = run(capsys, "constant", "--instance", str(tmp_path / "nope.json"))
        assert code == 2

    def test_missing_id(self, capsys, hardy_file, tmp_path):
        fpath = tmp_path / "f.json"
        fpath.write_text(json.dumps({"1": 1.0}))
        code, _, err = run(capsys, "check", "--instance", hardy_file, "--f", str(fpath))
        assert code == 2 and "'2'" in err


class TestCheck:
    def write_f(self, tmp_path, values):
        path = tmp_path / "f.json"
        path.write_text(json.dumps(values))
        return str(path)

    def test_zero(self, capsys, hardy_file, tmp_path):
        f = self.write_f(tmp_path, {str(k): 0 for k in range(1, 21)})
        code, out, _ = run(capsys, "check", "--instance", hardy_file, "--f", f)
        doc = as_json(out)
        assert code == 0 and doc["lhs"] == 0 and doc["rhs"] == 0

    def test_witness(self, capsys, hardy_file, tmp_path):
        inst, e = build_discrete_hardy(2, 20), Exponents(2, 2)
        rep = compute_B(inst, e)
        w = witness_function(inst, e, rep.witness_r)
        f = self.write_f(tmp_path, {"values": w.as_dict()})
        code, out, _ = run(capsys, "check", "--instance", hardy_file, "--f", f)
        doc = as_json(out)
        assert code == 0 and doc["ratio"] >= doc["B"] - 1e-9

    def test_random(self, capsys, hardy_file, tmp_path):
        import numpy as np
        vals = np.random.default_rng(0).exponential(size=20)
        f = self.write_f(tmp_path, {str(k + 1): float(v) for k, v in enumerate(vals)})
        code, out, _ = run(capsys, "check", "--instance", hardy_file, "--f", f)
        assert code == 0 and as_json(out)["verdicts"][0]["passed"]


class TestSharp:
    def test_rank_one(self, capsys, unit_file):
        code, out, _ = run(capsys, "sharp", "--instance", unit_file)
        doc = as_json(out)
        assert code == 0 and doc["C_hat"] == pytest.approx(1.0, rel=1e-12)
        assert doc["C_upper"] == pytest.approx(2.0) and doc["witness_f"] == {"x": 1}

    def test_deterministic(self, capsys, hardy_file):
        _, a, _ = run(capsys, "sharp", "--instance", hardy_file, "--seed", "3")
        _, b, _ = run(capsys, "sharp", "--instance", hardy_file, "--seed", "3")
        assert a == b

    def test_csv_and_text(self, capsys, hardy_file):
        _, out, _ = run(capsys, "sharp", "--instance", hardy_file, "--format", "csv")
        rows = list(csv.DictReader(io.StringIO(out)))
        assert len(rows) == 1 and "random_f_upper_bound=pass" in rows[0]["verdicts"]
        _, out, _ = run(capsys, "sharp", "--instance", hardy_file, "--format", "text")
        assert "[PASS] C_hat<=C_B*B" in out


class TestSuite:
    def test_subset_passes(self, capsys):
        code, out, _ = run(capsys, "suite", "--only", "strict_gap", "smoothing", "unbounded")
        assert code == 0 and as_json(out)["passed"]

    def test_seeded_twice_identical(self, capsys):
        argv = ("suite", "--only", "shift_limit", "sup_identity", "--seed", "5")
        _, a, _ = run(capsys, *argv)
        _, b, _ = run(capsys, *argv)
        assert a == b

    def test_injected_bad_constant(self, capsys):
        code, out, err = run(capsys, "suite", "--only", "random_sandwich",
                             "--inject-bad-constant", "0.3")
        doc = as_json(out)
        assert code == 4 and not doc["passed"]
        assert doc["first_failure"]["counterexample"]["instance"]["kind"] == "discrete"
        assert "counterexample" in err

    def test_unknown_suite(self, capsys):
        code, _, _ = run(capsys, "suite", "--only", "nope")
        assert code == 2


def test_seventeen_digits():
    assert to_json({"x": 0.1}) == '{\n  "x": 0.10000000000000001\n}'
    assert to_json([math.inf, None, True]) == '[\n  "inf",\n  null,\n  true\n]'


def test_generate_round_trip(capsys, tmp_path):
    out = tmp_path / "g.json"
    assert main(["generate", "discrete-hardy", "--n-max", "3", "--out", str(out)]) == 0
    code, text, _ = run(capsys, "constant", "--instance", str(out))
    assert code == 0 and as_json(text)["points"] == 3
