import math

import numpy as np
import pytest

from hardy.core import INF, STRICT, Exponents, b_product, compute_B, weight_integral
from hardy.instance import DiscreteInstance, FunctionOnX
from hardy.measure import CLOSED, RealMeasure
from hardy.operator import lhs, rhs
from hardy.sharpness import (UNBOUNDED, EmptySublevelError, detect_unbounded,
                             estimate_min_C, oracle_matrix_norm, oracle_min_C,
                             sandwich_report, step7_check, witness_function,
                             witness_ratio)
from hardy.suites import random_atomic_instance, random_exponents

E22 = Exponents(2, 2)


def inst1(psi=1.0, singular=0.0, mu2=((1.0, 1.0),), w=1.0):
    return DiscreteInstance.from_points([("x", 0.0, w, psi, singular)],
                                        RealMeasure.from_parts(mu2))


class TestWitness:
    def test_unit(self):
        assert witness_function(inst1(), E22, 1).values.tolist() == [1.0]

    def test_psi_four(self):
        assert witness_function(inst1(psi=4), E22, 1).values.tolist() == [0.25]

    def test_ratio_equals_B(self):
        wr, _ = witness_ratio(inst1(), E22, 1)
        assert wr == 1 == compute_B(inst1(), E22).value

    def test_empty_sublevel(self):
        with pytest.raises(EmptySublevelError):
            witness_function(inst1(), E22, 0)

    def test_step7_guarantee_random(self):
        rng = np.random.default_rng(21)
        for _ in range(300):
            inst, e = random_atomic_instance(rng), random_exponents(rng)
            for mode in (STRICT, CLOSED):
                assert step7_check(inst, e, mode) == []


class TestEstimate:
    def test_rank_one(self):
        assert estimate_min_C(inst1(), E22).C_hat == pytest.approx(1.0, rel=1e-12)

    def test_certified(self):
        rng = np.random.default_rng(4)
        done = 0
        while done < 40:
            inst, e = random_atomic_instance(rng), random_exponents(rng)
            if not e.interior or detect_unbounded(inst, e) is not None:
                continue
            rep = estimate_min_C(inst, e, seed=done)
            f = rep.witness_f
            r = lhs(inst, e, f) / rhs(inst, e, f) if rhs(inst, e, f) > 0 else 0.0
            assert r == pytest.approx(rep.C_hat, rel=1e-9, abs=1e-300)
            done += 1

    def test_psi_scaling(self):
        rng = np.random.default_rng(8)
        done = 0
        while done < 20:
            inst, e = random_atomic_instance(rng, allow_null_psi=False), random_exponents(rng)
            if not e.interior or detect_unbounded(inst, e) is not None:
                continue
            c = estimate_min_C(inst, e).C_hat
            c2 = estimate_min_C(inst.scaled(psi_factor=3.0), e).C_hat
            assert c2 == pytest.approx(c * 3.0 ** (-1 / e.p), rel=1e-9)
            done += 1

    def test_requires_interior(self):
        with pytest.raises(ValueError):
            estimate_min_C(inst1(), Exponents(1, 2))


class TestOracle:
    def test_scalar(self):
        assert oracle_matrix_norm([[3.0]], 2, 2, samples=100) == pytest.approx(3.0)

    def test_diagonal(self):
        assert oracle_matrix_norm(np.diag([1.0, 2.0]), 2, 2, samples=100) == pytest.approx(2.0)

    def test_zero(self):
        assert oracle_matrix_norm(np.zeros((2, 2)), 2, 2, samples=10) == 0.0

    def test_p2_matches_svd(self):
        rng = np.random.default_rng(2)
        A = rng.random((4, 4))
        want = np.linalg.svd(A, compute_uv=False)[0]
        assert oracle_matrix_norm(A, 2, 2, samples=2000) == pytest.approx(want, rel=1e-9)

    def test_instance_level(self):
        assert oracle_min_C(inst1(), E22, samples=100) == pytest.approx(1.0)


class TestSandwich:
    def test_all_ones(self):
        rep = sandwich_report(inst1(), E22)
        assert rep.B == 1 and rep.C_hat == pytest.approx(1.0)
        assert rep.C_upper == pytest.approx(2.0) and rep.passed

    def test_null_psi(self):
        rep = sandwich_report(inst1(psi=0), E22)
        assert [v.name for v in rep.verdicts] == [UNBOUNDED]
        assert rep.certificate.point_id == "x" and not rep.bounded

    def test_B_zero(self):
        rep = sandwich_report(inst1(mu2=((-1.0, 1.0),)), E22)
        assert rep.B == 0 and rep.C_hat == 0 and rep.passed

    def test_endpoint_exponents_report_witness_only(self):
        rep = sandwich_report(inst1(psi=4), Exponents(1, 2))
        assert rep.iterations == 0 and rep.C_hat == pytest.approx(rep.B) and rep.passed

    def test_bad_constant_is_caught(self):
        inst = DiscreteInstance.from_points([("a", 0, 1), ("b", 1, 1), ("c", 2, 1)],
                                            RealMeasure.from_parts([(3, 1), (2, 1)]))
        rep = sandwich_report(inst, E22, cb_scale=0.25)
        assert not rep.passed


class TestDetect:
    def test_certificate(self):
        cert = detect_unbounded(inst1(psi=0), E22)
        assert cert.point_id == "x"
        left, right, r = cert.demo(inst1(psi=0), E22, 1e6)
        assert right == 0 and left == 1e6 and r == INF

    def test_singular_blocks_rule(self):
        inst = inst1(psi=0, singular=1)
        assert detect_unbounded(inst, E22) is None
        assert compute_B(inst, E22).value == INF
        assert sandwich_report(inst, E22).verdicts[0].name == UNBOUNDED

    def test_positive_psi(self):
        assert detect_unbounded(inst1(psi=2), E22) is None

    def test_closed_mode_uses_closed_tail(self):
        inst = inst1(psi=0, mu2=((0.0, 1.0),))
        assert detect_unbounded(inst, E22, STRICT) is None
        assert detect_unbounded(inst, E22, CLOSED) is not None

    def test_p_inf_finite_B_but_unbounded(self):
        e = Exponents(INF, INF)
        inst = inst1(psi=0)
        assert compute_B(inst, e).value == 0
        assert detect_unbounded(inst, e) is not None
