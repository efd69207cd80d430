import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hardy.core import (AT, INF, JUST_ABOVE, STRICT, ExponentError,
                        ExponentOrderError, Exponents, b_product, cb_constant,
                        compute_B, compute_B_line, compute_Bprime, dual_exponent,
                        power_conv, segment_max, weight_integral)
from hardy.instance import DiscreteInstance, build_continuous_hardy, discretize
from hardy.measure import CLOSED, RealMeasure, probe_grid
from hardy.suites import closed_form_B, random_atomic_instance, random_exponents

E22 = Exponents(2, 2)


def one_point(psi=1.0, mu2=((1.0, 1.0),), level=0.0, singular=0.0):
    return DiscreteInstance.from_points([("x", level, 1.0, psi, singular)],
                                        RealMeasure.from_parts(mu2))


class TestExponents:
    @pytest.mark.parametrize("p,want", [(2, 2), (1, INF), (4, 4 / 3), (INF, 1)])
    def test_dual(self, p, want):
        assert dual_exponent(p) == pytest.approx(want)

    @pytest.mark.parametrize("p", [1, 1.5, 2, 3, INF])
    def test_involution(self, p):
        assert dual_exponent(dual_exponent(p)) == pytest.approx(p, rel=1e-15)

    def test_below_one_rejected(self):
        with pytest.raises(ExponentError):
            dual_exponent(0.5)

    def test_q_below_p_rejected(self):
        with pytest.raises(ExponentOrderError, match="q=2.0 < p=3.0"):
            Exponents(3, 2)

    def test_inf_string(self):
        assert Exponents("2", "inf").q == INF


class TestPowerConv:
    @pytest.mark.parametrize("x,e,want", [(0, 0, 0), (INF, 0, 1), (4, 0.5, 2),
                                          (0, -1, INF), (INF, 2, INF), (INF, -1, 0)])
    def test_conventions(self, x, e, want):
        assert power_conv(x, e) == want


class TestCB:
    @pytest.mark.parametrize("p,q,want", [(2, 2, 2), (1, 1, 1), (2, INF, 1)])
    def test_values(self, p, q, want):
        assert cb_constant(Exponents(p, q)) == pytest.approx(want, rel=1e-15)

    @pytest.mark.parametrize("p", [1.25, 1.5, 2, 3, 5])
    def test_diagonal_identity(self, p):
        # C_B (p-1)^(-1/p) = p' on the classical Hardy line
        e = Exponents(p, p)
        assert cb_constant(e) * (p - 1) ** (-1 / p) == pytest.approx(e.p_conj, rel=1e-14)


class TestWeightIntegral:
    def test_strict_empty(self):
        assert weight_integral(one_point(), 0, STRICT, E22) == 0

    def test_closed(self):
        assert weight_integral(one_point(), 0, CLOSED, E22) == 1

    def test_psi_power(self):
        assert weight_integral(one_point(psi=4), 1, STRICT, E22) == 0.25

    def test_p1_is_ess_sup(self):
        inst = DiscreteInstance.from_points(
            [("a", 0, 1, 4), ("b", 1, 1, 0.5), ("c", 2, 0, 0.01)], RealMeasure.zero())
        assert weight_integral(inst, 5, STRICT, Exponents(1, 2)) == 2.0

    def test_pinf_ignores_null_psi(self):
        inst = DiscreteInstance.from_points([("a", 0, 2, 0), ("b", 1, 3, 5)],
                                            RealMeasure.zero())
        assert weight_integral(inst, 5, STRICT, Exponents(INF, INF)) == 3.0


class TestComputeB:
    def test_unit(self):
        rep = compute_B(one_point(), E22)
        assert rep.value == 1 and rep.witness_r == 1 and rep.witness_side == AT

    def test_zero_when_mass_below(self):
        assert compute_B(one_point(mu2=((0.0, 1.0),)), E22).value == 0

    def test_null_psi_infinite(self):
        assert compute_B(one_point(psi=0), E22).value == INF

    def test_bprime_unit(self):
        assert compute_Bprime(one_point(mu2=((0.0, 1.0),)), E22).value == 1

    def test_strict_gap(self):
        inst = one_point(mu2=((0.0, 1.0),))
        assert compute_B(inst, E22).value == 0 and compute_Bprime(inst, E22).value == 1

    def test_just_above_witness(self):
        # two points at level 0 and 1; the sup is reached on (1, 2]
        inst = DiscreteInstance.from_points([("a", 0, 1), ("b", 1, 1)],
                                            RealMeasure.from_parts([(2, 1)]))
        rep = compute_B(inst, E22)
        assert rep.value == pytest.approx(math.sqrt(2))
        assert rep.witness_side == AT and rep.witness_r == 2
        assert b_product(inst, E22, rep.witness_r) == pytest.approx(rep.value, rel=1e-12)

    def test_report_value_matches_product_at_witness(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            inst, e = random_atomic_instance(rng), random_exponents(rng)
            rep = compute_B(inst, e)
            if rep.witness_r is None or not math.isfinite(rep.value):
                continue
            got = b_product(inst, e, rep.witness_r)
            assert got == pytest.approx(rep.value, rel=1e-12)
            if rep.witness_side == JUST_ABOVE:
                assert rep.witness_r > rep.anchor_r


def brute_force_B(inst, e, mode=STRICT):
    extra = np.concatenate([inst.level, [0.0]])
    grid = probe_grid(inst.mu2, extra=extra)
    return max(b_product(inst, e, float(r), mode) for r in grid)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_B_matches_probe_grid(seed):
    rng = np.random.default_rng(seed)
    inst, e = random_atomic_instance(rng), random_exponents(rng)
    # prefix sums and masked sums differ only in summation order
    assert compute_B(inst, e).value == pytest.approx(brute_force_B(inst, e), rel=1e-12)
    assert compute_Bprime(inst, e).value == pytest.approx(
        brute_force_B(inst, e, CLOSED), rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.floats(0.1, 10))
def test_scaling_covariance(seed, lam):
    rng = np.random.default_rng(seed)
    inst, e = random_atomic_instance(rng, allow_null_psi=False), random_exponents(rng)
    B = compute_B(inst, e).value
    if e.q < INF:
        assert compute_B(inst.scaled(mu2_factor=lam), e).value == pytest.approx(
            B * power_conv(lam, 1 / e.q), rel=1e-12, abs=0)
    assert compute_B(inst.scaled(psi_factor=lam), e).value == pytest.approx(
        B * power_conv(lam, -1 / e.p) if e.p < INF else B, rel=1e-12, abs=0)


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_bprime_dominates(seed):
    rng = np.random.default_rng(seed)
    inst, e = random_atomic_instance(rng), random_exponents(rng)
    assert compute_Bprime(inst, e).value >= compute_B(inst, e).value


class TestSegmentMax:
    def test_interior(self):
        t, v = segment_max(1, 1, 0, 1, 1, E22)
        assert t == pytest.approx(0.5) and v == pytest.approx(0.5)

    def test_right_endpoint(self):
        assert segment_max(1, 0, 0, 1, 1, E22) == (1, 1)

    def test_left_endpoint(self):
        assert segment_max(1, 1, 1, 0, 1, E22) == (0, 1)

    def test_negative_tail_rejected(self):
        with pytest.raises(ValueError):
            segment_max(1, 2, 0, 1, 1, E22)

    @settings(max_examples=300, deadline=None)
    @given(st.floats(0, 5), st.floats(0, 5), st.floats(0, 5), st.floats(0.01, 5),
           st.sampled_from([(1.5, 1.5), (2, 2), (1.5, 3), (2, 3), (3, 3)]))
    def test_dominates_grid(self, c, D, d, L, pq):
        e = Exponents(*pq)
        A = c * L + 1.0
        t, v = segment_max(A, c, D, d, L, e)
        grid = np.linspace(0, L, 1000)
        F = np.maximum(A - c * grid, 0) ** (1 / e.q) * (D + d * grid) ** (1 / e.p_conj)
        assert 0 <= t <= L
        assert v >= F.max() * (1 - 1e-12)


class TestLineB:
    @pytest.mark.parametrize("p", [1.5, 2.0, 3.0])
    def test_matches_closed_form(self, p):
        line = build_continuous_hardy(p, 1e-3, 1e3, 4000)
        got = compute_B_line(line, Exponents(p, p)).value
        assert got == pytest.approx(closed_form_B(p, 1e-3, 1e3), rel=1e-5)

    def test_p2_exact_truncated_value(self):
        # sup_r (1/r - 1/R)(r - d) = (1 - sqrt(d/R))^2 at r = sqrt(d R)
        assert closed_form_B(2.0, 1e-3, 1e3) == pytest.approx(1 - 1e-3, rel=1e-10)

    @pytest.mark.parametrize("p", [1.5, 2.0])
    def test_discretization_converges(self, p):
        e = Exponents(p, p)
        line = build_continuous_hardy(p, 1e-2, 1e2, 200)
        exact = compute_B_line(line, e).value
        errs = [abs(compute_B(discretize(line, k), e).value - exact) for k in (1, 4, 16)]
        assert errs[2] < errs[0] and errs[2] < 1e-3 * exact
