import json
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hardy.instance import (REFLECTED, DiscreteInstance, InstanceError,
                            InstanceSemanticError, InstanceSyntaxError,
                            LineInstance, build_conjugate_hardy,
                            build_continuous_hardy, build_discrete_hardy,
                            discretize, dump_instance, instance_to_dict,
                            load_instance, parse_instance, reflect)
from hardy.measure import RealMeasure
from hardy.suites import random_atomic_instance

EXAMPLES = Path(__file__).resolve().parents[1] / "docs" / "examples"

MINIMAL = """{
  "kind": "discrete",
  "points": [{"id": "a", "level": 0, "mu1": 1}],
  "mu2": {"atoms": [[1, 1]]}
}"""


class TestDiscreteHardy:
    def test_two_points(self):
        inst = build_discrete_hardy(2, 2)
        assert inst.level.tolist() == [1, 2]
        assert inst.mu2.atoms == [(2.0, 1.0), (3.0, 0.25)]

    def test_one_point(self):
        inst = build_discrete_hardy(2, 1)
        assert inst.size == 1 and inst.mu2.atoms == [(2.0, 1.0)]

    def test_fractional_power(self):
        masses = [m for _, m in build_discrete_hardy(1.5, 3).mu2.atoms]
        assert masses == pytest.approx([1, 2 ** -1.5, 3 ** -1.5], rel=1e-15)

    @pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0])
    def test_total_mass(self, p):
        n = 500
        want = sum(k ** -p for k in range(1, n + 1))
        assert build_discrete_hardy(p, n).mu2.total_mass() == pytest.approx(want, rel=1e-12)


class TestContinuousHardy:
    def test_single_cell(self):
        line = build_continuous_hardy(2, 1, 2, 1)
        assert line.mu2.total_mass() == pytest.approx(0.5, rel=1e-15)

    def test_log_measure(self):
        line = build_continuous_hardy(1, 1, math.e, 1)
        assert line.mu2.total_mass() == pytest.approx(1.0, rel=1e-15)

    def test_two_cells_additive(self):
        line = build_continuous_hardy(2, 1, 2, 2)
        assert len(line.mu2.density) == 2
        assert line.mu2.total_mass() == pytest.approx(0.5, rel=1e-14)

    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
    def test_mass_exact_lumping(self, p):
        d, R = 1e-3, 1e3
        line = build_continuous_hardy(p, d, R, 4000)
        want = (d ** (1 - p) - R ** (1 - p)) / (p - 1)
        assert line.mu2.total_mass() == pytest.approx(want, rel=1e-12)

    def test_rejects_bad_range(self):
        with pytest.raises(InstanceError):
            build_continuous_hardy(2, 2, 1, 4)


class TestReflect:
    def test_levels_and_atoms(self):
        inst = DiscreteInstance.from_points(
            [("a", 1, 1), ("b", 2, 1)], RealMeasure.from_parts([(3, 0.7)]))
        ref = reflect(inst)
        assert sorted(ref.level.tolist()) == [-2, -1]
        assert ref.mu2.atoms == [(-3.0, 0.7)]

    def test_zero_level_fixed(self):
        inst = DiscreteInstance.from_points([("a", 0, 1)], RealMeasure.zero())
        assert reflect(inst).level.tolist() == [0]

    def test_involution_on_random_atomic(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            inst = random_atomic_instance(rng)
            assert reflect(reflect(inst)) == inst


class TestDiscretize:
    def test_resolution_two(self):
        line = LineInstance(RealMeasure.from_parts((), [(0, 1, 1)]), RealMeasure.zero())
        inst = discretize(line, 2)
        assert inst.level.tolist() == [0.25, 0.75]
        assert inst.mu1.tolist() == [0.5, 0.5]

    def test_atom_becomes_point(self):
        line = LineInstance(RealMeasure.from_parts([(0, 3)]), RealMeasure.zero())
        inst = discretize(line, 1)
        assert inst.level.tolist() == [0] and inst.mu1.tolist() == [3]

    def test_reflected(self):
        line = LineInstance(RealMeasure.from_parts((), [(0, 1, 1)]),
                            RealMeasure.zero(), (), REFLECTED)
        assert discretize(line, 1).level.tolist() == [-0.5]

    @pytest.mark.parametrize("res", [1, 3, 7])
    def test_masses_preserved(self, res):
        line = build_conjugate_hardy(2.0, 0.1, 10.0, 16)
        inst = discretize(line, res)
        assert inst.mu1.sum() == pytest.approx(line.mu1.total_mass(), rel=1e-12)
        psi_mass = sum(v * (b - a) for a, b, v in line.psi)
        # psi is constant on each mu1 cell, so mu3 mass is exact
        assert inst.mass3.sum() == pytest.approx(psi_mass, rel=1e-12)


class TestParse:
    def test_minimal(self):
        inst = parse_instance(MINIMAL)
        assert isinstance(inst, DiscreteInstance) and inst.size == 1
        assert inst.psi.tolist() == [1.0] and inst.singular.tolist() == [0.0]

    def test_negative_mass_names_field(self):
        doc = json.loads(MINIMAL)
        doc["mu2"]["atoms"][0][1] = -1
        with pytest.raises(InstanceSemanticError) as exc:
            parse_instance(json.dumps(doc))
        assert exc.value.path == "mu2.atoms[0][1]"

    def test_duplicate_ids(self):
        doc = json.loads(MINIMAL)
        doc["points"].append({"id": "a", "level": 1})
        with pytest.raises(InstanceSemanticError) as exc:
            parse_instance(json.dumps(doc))
        assert exc.value.path == "points[1].id"

    def test_overlapping_intervals(self):
        doc = {"kind": "line", "mu1": {"density": [[0, 2, 1], [1, 3, 1]]}, "mu2": {}}
        with pytest.raises(InstanceSemanticError) as exc:
            parse_instance(json.dumps(doc))
        assert exc.value.path.startswith("mu1.density")

    def test_syntax_error_position(self):
        with pytest.raises(InstanceSyntaxError) as exc:
            parse_instance('{"kind": "discrete",\n  "points": [,]}')
        assert (exc.value.line, exc.value.column) == (2, 14)

    def test_inf_mass(self):
        doc = json.loads(MINIMAL)
        doc["mu2"]["atoms"][0][1] = "inf"
        assert parse_instance(json.dumps(doc)).mu2.atom_mass[0] == math.inf

    def test_round_trip(self):
        inst = parse_instance(MINIMAL)
        assert parse_instance(dump_instance(inst)) == inst
        assert instance_to_dict(parse_instance(dump_instance(inst))) == instance_to_dict(inst)

    @pytest.mark.parametrize("name", ["discrete_hardy_p2.json", "continuous_hardy_p2.json",
                                      "conjugate_hardy_p2.json", "strict_gap.json",
                                      "null_psi.json"])
    def test_shipped_examples_round_trip(self, name):
        inst = load_instance(EXAMPLES / name)
        assert instance_to_dict(parse_instance(dump_instance(inst))) == instance_to_dict(inst)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_random_round_trip(seed):
    inst = random_atomic_instance(np.random.default_rng(seed))
    assert parse_instance(dump_instance(inst)) == inst
