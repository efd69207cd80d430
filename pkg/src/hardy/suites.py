"""Acceptance suites: seeded, self-contained checks of the constant, the
sandwich bounds, the auxiliary identities and the unboundedness detector.

Each suite returns a :class:`SuiteResult`; on failure ``counterexample``
carries enough data (instance document, exponents, seed, case index) to
reproduce the first failing case.
"""

import math
import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .core import (Exponents, cb_constant, compute_B, compute_B_line,
                   compute_Bprime)
from .instance import (DiscreteInstance, FunctionOnX, build_continuous_hardy,
                       build_discrete_hardy, discretize, instance_to_dict)
from .measure import (CLOSED, RealMeasure, StepFunction, probe_grid,
                      smooth_atoms_left, tail_many)
from .operator import lhs, rhs
from .proofcheck import identity_asserted, eq3_check, lemma2_limit, smoothing_convergence
from .sharpness import (UNBOUNDED, detect_unbounded, estimate_min_C,
                        oracle_min_C, sandwich_report, witness_ratio)

EXPONENT_POOL = (1.0, 1.5, 2.0, 3.0, math.inf)


@dataclass
class SuiteResult:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    counterexample: Optional[dict] = None
    seconds: float = 0.0


# ---------------------------------------------------------------------------
# random instances


def random_exponents(rng) -> Exponents:
    p, q = sorted(rng.choice(EXPONENT_POOL, size=2))
    return Exponents(float(p), float(q))


def random_atomic_instance(rng, max_points: int = 12, allow_null_psi: bool = True
                           ) -> DiscreteInstance:
    """Small purely atomic instance on an integer grid.

    Levels lie in ``-5..5`` (ties allowed) and mu2 atoms on half-integers in
    ``[-5, 6]``.  About one point in ten has no mu1 weight and may carry a
    singular mu3 part; with ``allow_null_psi`` about one in twenty has
    ``psi = 0`` and no singular part.
    """
    n = int(rng.integers(1, max_points + 1))
    pts = []
    for k in range(n):
        level = float(rng.integers(-5, 6))
        mu1 = 0.0 if rng.random() < 0.1 else float(rng.exponential())
        psi = float(rng.exponential()) + 0.05
        singular = 0.0
        if mu1 == 0.0 and rng.random() < 0.5:
            singular = float(rng.exponential())
        if allow_null_psi and rng.random() < 0.05:
            psi = 0.0
        pts.append((f"x{k}", level, mu1, psi, singular))
    grid = np.arange(-10, 13) / 2.0
    n_atoms = int(rng.integers(0, 7))
    locs = rng.choice(grid, size=n_atoms, replace=False)
    atoms = [(float(x), float(rng.exponential())) for x in locs]
    return DiscreteInstance.from_points(pts, RealMeasure.from_parts(atoms))


def random_cases(seed: int, count: int, max_points: int = 12):
    """``(instance, exponents)`` pairs, reproducible from ``seed``."""
    rng = np.random.default_rng(seed)
    return [(random_atomic_instance(rng, max_points), random_exponents(rng))
            for _ in range(count)]


def _case_doc(inst, e, seed, index, **extra):
    doc = {"instance": instance_to_dict(inst), "p": _num(e.p), "q": _num(e.q),
           "seed": seed, "case": index}
    doc.update(extra)
    return doc


def _num(x):
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _rel_ok(a, b, rel):
    """``a >= b`` up to ``rel`` relative slack."""
    return a >= b - rel * abs(b)


def _upper_ok(left, upper, right, rel):
    if upper == math.inf:
        return True
    return left <= upper * right * (1 + rel)


def _warm_up():
    """Compile the kernels once so suite timings measure the algorithms."""
    inst = build_discrete_hardy(2.0, 3)
    estimate_min_C(inst, Exponents(2.0, 2.0), max_iter=5, restarts=1)


# ---------------------------------------------------------------------------
# continuous Hardy


def closed_form_B(p: float, delta: float, R: float) -> float:
    """``sup_r (int_r^R x^-p dx)^(1/p) (r - delta)^(1/p')`` by bounded scalar
    optimization in ``log r``."""
    from scipy.optimize import minimize_scalar

    pc = p / (p - 1.0)

    def neg(s):
        r = math.exp(s)
        t = (r ** (1.0 - p) - R ** (1.0 - p)) / (p - 1.0)
        return -(max(t, 0.0) ** (1.0 / p)) * max(r - delta, 0.0) ** (1.0 / pc)

    grid = np.linspace(math.log(delta), math.log(R), 2001)
    k = int(np.argmin([neg(s) for s in grid]))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, grid.size - 1)]
    res = minimize_scalar(neg, bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12})
    return -float(res.fun)


def continuous_hardy_case(p: float, delta: float = 1e-3, R: float = 1e3,
                          cells: int = 4000, resolution: int = 1) -> dict:
    e = Exponents(p, p)
    line = build_continuous_hardy(p, delta, R, cells)
    inst = discretize(line, resolution)
    B = compute_B(inst, e).value
    rep = estimate_min_C(inst, e)
    c_b = cb_constant(e)
    return {
        "B": B, "B_line": compute_B_line(line, e).value,
        "B_closed_form": closed_form_B(p, delta, R),
        "C_B": c_b, "C_B*B": c_b * B, "C_hat": rep.C_hat,
        "iterations": rep.iterations, "converged": rep.converged,
    }


def _continuous_result(name, p, d, checks):
    passed = all(checks.values())
    cex = None if passed else {
        "builder": "continuous_hardy", "p": p, "delta": 1e-3, "R": 1e3,
        "cells": 4000, "resolution": 1,
        "failed": [k for k, v in checks.items() if not v]}
    return SuiteResult(name, passed, {**d, "checks": checks}, cex)


def suite_hardy_p2(seed: int = 0) -> SuiteResult:
    d = continuous_hardy_case(2.0)
    checks = {
        "B_in_[0.995,1]": 0.995 <= d["B"] <= 1.0,
        "C_B*B_in_[1.99,2]": 1.99 <= d["C_B*B"] <= 2.0,
        "C_hat_in_[1.85,2]": 1.85 <= d["C_hat"] <= 2.0,
        "C_hat<=C_B*B": d["C_hat"] <= d["C_B*B"] * (1 + 1e-9),
    }
    return _continuous_result("hardy_p2", 2.0, d, checks)


def suite_hardy_p15(seed: int = 0) -> SuiteResult:
    d = continuous_hardy_case(1.5)
    checks = {
        "C_B*B_within_1%_of_3": abs(d["C_B*B"] - 3.0) <= 0.03,
        "C_hat_in_[2.7,3]": 2.7 <= d["C_hat"] <= 3.0,
        "C_hat<=C_B*B": d["C_hat"] <= d["C_B*B"] * (1 + 1e-9),
    }
    return _continuous_result("hardy_p1.5", 1.5, d, checks)


# ---------------------------------------------------------------------------
# discrete Hardy


def suite_discrete_hardy(seed: int = 0, n_max: int = 2000, trials: int = 100,
                         cb_scale: float = 1.0) -> SuiteResult:
    e = Exponents(2.0, 2.0)
    inst = build_discrete_hardy(2.0, n_max)
    B = compute_B(inst, e).value
    upper = cb_constant(e) * cb_scale * B
    rng = np.random.default_rng(seed)
    worst = 0.0
    for k in range(trials):
        fv = rng.exponential(size=n_max)
        f = FunctionOnX(inst.ids, fv)
        left, right = lhs(inst, e, f), rhs(inst, e, f)
        worst = max(worst, left / right)
        if not _upper_ok(left, upper, right, 1e-12):
            cex = {"n_max": n_max, "p": 2.0, "q": 2.0, "seed": seed, "trial": k,
                   "lhs": left, "rhs": right, "C_B*B": upper}
            return SuiteResult("discrete_hardy", False,
                               {"B": B, "C_B*B": upper}, cex)
    return SuiteResult("discrete_hardy", True,
                       {"B": B, "C_B*B": upper, "max_ratio": worst, "trials": trials})


# ---------------------------------------------------------------------------
# random sandwich and the open/closed identity


def _sandwich_case(inst, e, seed, cb_scale):
    """Failure reason for one instance, or None."""
    B_rep = compute_B(inst, e)
    B, Bp = B_rep.value, compute_Bprime(inst, e).value
    if not Bp >= B:
        return f"B' = {Bp!r} < B = {B!r}"
    cert = detect_unbounded(inst, e)
    if cert is not None:
        _, right, rr = cert.demo(inst, e, 1e6)
        return None if (right == 0 and rr == math.inf) else "certificate demo failed"
    if 0 < B < math.inf:
        wr, _ = witness_ratio(inst, e, B_rep.witness_r)
        if not _rel_ok(wr, B, 1e-12):
            return f"witness ratio {wr!r} below B {B!r}"
    upper = cb_constant(e) * cb_scale * B
    rng = np.random.default_rng([seed, 2])
    for _ in range(32):
        f = FunctionOnX(inst.ids, rng.exponential(size=inst.size))
        left, right = lhs(inst, e, f), rhs(inst, e, f)
        if not _upper_ok(left, upper, right, 1e-12):
            return f"random f: lhs {left!r} > C_B*B*rhs {upper * right!r}"
    if e.interior and B < math.inf:
        c_hat = estimate_min_C(inst, e, seed=seed, constant=B_rep).C_hat
        if not (c_hat >= B * (1 - 1e-9) and c_hat <= upper * (1 + 1e-9)):
            return f"C_hat {c_hat!r} outside [B, C_B*B] = [{B!r}, {upper!r}]"
    return None


def suite_random_sandwich(seed: int = 0, count: int = 500,
                          cb_scale: float = 1.0) -> SuiteResult:
    stats = {"instances": count, "unbounded": 0, "infinite_B": 0, "interior": 0}
    for k, (inst, e) in enumerate(random_cases(seed, count)):
        stats["unbounded"] += detect_unbounded(inst, e) is not None
        stats["infinite_B"] += compute_B(inst, e).value == math.inf
        stats["interior"] += e.interior
        why = _sandwich_case(inst, e, seed + k, cb_scale)
        if why is not None:
            return SuiteResult("random_sandwich", False, stats,
                               _case_doc(inst, e, seed, k, reason=why))
    return SuiteResult("random_sandwich", True, stats)


def suite_sup_identity(seed: int = 0, count: int = 500) -> SuiteResult:
    asserted = reported = mismatched_reported = 0
    for k, (inst, e) in enumerate(random_cases(seed, count)):
        res = eq3_check(inst, e)
        if identity_asserted(e):
            asserted += 1
            if not res.equal:
                return SuiteResult("sup_identity", False, {"asserted": asserted},
                                   _case_doc(inst, e, seed, k, lhs_sup=res.lhs_sup,
                                             rhs_sup=res.rhs_sup))
        else:
            reported += 1
            mismatched_reported += not res.equal
    return SuiteResult("sup_identity", True, {
        "asserted": asserted, "report_only": reported,
        "report_only_mismatches": mismatched_reported})


# ---------------------------------------------------------------------------
# oracle equivalence


def oracle_cases(seed: int, count: int):
    """Bounded instances with at most 5 points, p = q = 2."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        inst = random_atomic_instance(rng, max_points=5, allow_null_psi=False)
        e = Exponents(2.0, 2.0)
        if detect_unbounded(inst, e) is None:
            out.append((inst, e))
    return out


def suite_oracle(seed: int = 0, count: int = 50, samples: int = 100_000) -> SuiteResult:
    worst = 0.0
    for k, (inst, e) in enumerate(oracle_cases(seed, count)):
        c_hat = estimate_min_C(inst, e, seed=seed).C_hat
        ref = oracle_min_C(inst, e, samples=samples, seed=seed + k)
        err = abs(c_hat - ref) / max(ref, 1e-300) if ref > 0 else abs(c_hat)
        worst = max(worst, err)
        if err > 1e-6:
            return SuiteResult("oracle_equivalence", False, {"max_rel_err": worst},
                               _case_doc(inst, e, seed, k, C_hat=c_hat, oracle=ref))
    return SuiteResult("oracle_equivalence", True,
                       {"instances": count, "max_rel_err": worst})


# ---------------------------------------------------------------------------
# small deterministic checks


def gap_instance() -> DiscreteInstance:
    return DiscreteInstance.from_points([("x", 0.0, 1.0, 1.0, 0.0)],
                                        RealMeasure.from_parts([(0.0, 1.0)]))


def suite_strict_gap(seed: int = 0) -> SuiteResult:
    inst, e = gap_instance(), Exponents(2.0, 2.0)
    B, Bp = compute_B(inst, e).value, compute_Bprime(inst, e).value
    return SuiteResult("strict_gap", B == 0.0 and Bp == 1.0, {"B": B, "B_prime": Bp})


def smoothing_fixture():
    mu = RealMeasure.from_parts([(0.0, 1.0), (1.0, 1.0)])
    f = StepFunction([-0.5, 0.5], [0.0, 1.0, 0.0], ["left", "left"])
    return mu, f


def suite_smoothing(seed: int = 0) -> SuiteResult:
    mu, f = smoothing_fixture()
    res = smoothing_convergence(mu, f, range(0, 11))
    exact_from_2 = all(err == 0.0 for err in res.errors[2:])
    dominated = True
    for n in range(11):
        sm = smooth_atoms_left(mu, n)
        s = probe_grid(mu, sm)
        if np.any(tail_many(sm, s, CLOSED) > tail_many(mu, s, CLOSED)):
            dominated = False
            break
    return SuiteResult("smoothing", exact_from_2 and dominated, {
        "errors": res.errors, "zero_for_n>=2": exact_from_2,
        "tail_dominated": dominated})


def random_step_pair(rng):
    """Nonincreasing left-continuous f and nondecreasing right-continuous g
    with breakpoints on the grid ``Z/4`` in ``[-5, 5]``, ``f(+inf) = 0`` and
    ``g(-inf) = 0``."""
    grid = np.arange(-20, 21) / 4.0

    def make(increasing):
        k = int(rng.integers(1, 5))
        bps = np.sort(rng.choice(grid, size=k, replace=False))
        steps = np.sort(rng.integers(1, 9, size=k).astype(float))
        vals = np.concatenate([[0.0], np.cumsum(rng.permutation(steps))])
        if increasing:
            return StepFunction(bps, vals, ["right"] * k)
        return StepFunction(bps, vals[::-1], ["left"] * k)

    return make(False), make(True)


def suite_shift_limit(seed: int = 0, count: int = 100) -> SuiteResult:
    rng = np.random.default_rng(seed)
    eps_list = [2.0 ** -k for k in range(0, 21)]
    for k in range(count):
        f, g = random_step_pair(rng)
        res = lemma2_limit(f, g, eps_list)
        if not res.limit_ok:
            cex = {"seed": seed, "case": k,
                   "f": [f.breakpoints.tolist(), f.values.tolist()],
                   "g": [g.breakpoints.tolist(), g.values.tolist()],
                   "values": res.values, "sup_fg": res.sup_fg}
            return SuiteResult("shift_limit", False, {"cases": k + 1}, cex)
    return SuiteResult("shift_limit", True, {"cases": count})


def pathology_instance() -> DiscreteInstance:
    """One point with mu1 weight 1 and ``psi = 0`` under mu2 = delta_1."""
    return DiscreteInstance.from_points([("x", 0.0, 1.0, 0.0, 0.0)],
                                        RealMeasure.from_parts([(1.0, 1.0)]))


def suite_unbounded(seed: int = 0) -> SuiteResult:
    inst, e = pathology_instance(), Exponents(2.0, 2.0)
    rep = sandwich_report(inst, e, seed=seed)
    verdict = [v.name for v in rep.verdicts]
    cert = rep.certificate
    if cert is None:
        return SuiteResult("unbounded", False, {"verdicts": verdict})
    left, right, rr = cert.demo(inst, e, 1e6)
    ok = UNBOUNDED in verdict and right == 0 and rr == math.inf and left >= 1e6
    return SuiteResult("unbounded", ok, {
        "verdicts": verdict, "certificate_point": cert.point_id,
        "certificate_r": cert.r, "demo_lhs": left, "demo_rhs": right,
        "demo_ratio": rr})


# ---------------------------------------------------------------------------
# registry


SUITES: dict = {
    "hardy_p2": suite_hardy_p2,
    "hardy_p1.5": suite_hardy_p15,
    "discrete_hardy": suite_discrete_hardy,
    "random_sandwich": suite_random_sandwich,
    "oracle_equivalence": suite_oracle,
    "sup_identity": suite_sup_identity,
    "strict_gap": suite_strict_gap,
    "smoothing": suite_smoothing,
    "shift_limit": suite_shift_limit,
    "unbounded": suite_unbounded,
}

BAD_CONSTANT_SUITES = ("discrete_hardy", "random_sandwich")


def run_suite(name: str, seed: int = 0, cb_scale: float = 1.0) -> SuiteResult:
    fn: Callable = SUITES[name]
    kwargs = {"seed": seed}
    if name in BAD_CONSTANT_SUITES:
        kwargs["cb_scale"] = cb_scale
    t0 = time.perf_counter()
    res = fn(**kwargs)
    res.seconds = time.perf_counter() - t0
    return res


def run_all(names=None, seed: int = 0, cb_scale: float = 1.0, stop_on_failure=False):
    _warm_up()
    out = []
    for name in names or SUITES:
        res = run_suite(name, seed, cb_scale)
        out.append(res)
        if stop_on_failure and not res.passed:
            break
    return out
