"""Certified lower bounds on the minimal constant, the sandwich
``B <= C <= C_B B``, and detection of instances with no finite constant."""

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import _kernels
from .core import (AT, JUST_ABOVE, STRICT, ConstantReport, Exponents,
                   b_product, cb_constant, compute_constant, power_conv_many)
from .instance import DiscreteInstance, FunctionOnX
from .measure import CLOSED, OPEN, tail_many
from .operator import (UnboundedInstanceError, assemble_kernel, lhs, ratio,
                       rhs)

UNBOUNDED = "unbounded"

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 500
DEFAULT_RESTARTS = 8


class EmptySublevelError(ValueError):
    pass


@dataclass(frozen=True)
class Verdict:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class UnboundedCertificate:
    """A charged point invisible to the right-hand side under a positive tail.

    ``f_t = t * indicator(point)`` has ``rhs(f_t) = 0`` and
    ``lhs(f_t) = t * lhs(indicator) > 0``.
    """

    point_id: str
    r: float
    mode: str

    def demo(self, inst: DiscreteInstance, e: Exponents, t: float):
        fv = np.zeros(inst.size)
        fv[inst.index(self.point_id)] = t
        f = FunctionOnX(inst.ids, fv)
        left, right = lhs(inst, e, f, self.mode), rhs(inst, e, f)
        return left, right, ratio(left, right)


@dataclass
class SharpnessReport:
    B: float
    B_witness_r: Optional[float]
    C_hat: float
    C_upper: float
    witness_f: Optional[FunctionOnX]
    iterations: int
    converged: bool
    mode: str = STRICT
    C_B: float = math.nan
    witness_ratio: float = 0.0
    B_witness_side: str = AT
    certificate: Optional[UnboundedCertificate] = None
    verdicts: list = field(default_factory=list)

    @property
    def bounded(self) -> bool:
        return self.certificate is None and self.B < math.inf

    @property
    def passed(self) -> bool:
        return all(v.passed for v in self.verdicts)


# ---------------------------------------------------------------------------
# witnesses


def witness_function(inst: DiscreteInstance, e: Exponents, r: float,
                     mode: str = STRICT) -> FunctionOnX:
    """``f = psi^(-p'/p)`` on the sublevel at ``r``, zero elsewhere.

    Points with ``psi = 0`` (infinite value) or no mu1 weight are left out
    of the support.  For p = 1 the witness is ``1/psi`` at the sublevel
    point maximizing ``1/psi``; for p = inf it is the indicator of the
    charged sublevel.
    """
    inside = inst.level < r if mode == STRICT else inst.level <= r
    if not np.any(inside):
        raise EmptySublevelError(f"sublevel at r = {r!r} is empty")
    support = inside & (inst.mu1 > 0) & (inst.psi > 0)
    fv = np.zeros(inst.size)
    if e.p == 1:
        if np.any(support):
            cand = np.where(support, inst.psi, np.inf)
            i = int(np.argmin(cand))
            fv[i] = 1.0 / inst.psi[i]
    else:
        fv[support] = power_conv_many(inst.psi[support], e.psi_power)
    return FunctionOnX(inst.ids, fv)


def detect_unbounded(inst: DiscreteInstance, e: Exponents,
                     mode: str = STRICT) -> Optional[UnboundedCertificate]:
    """Certificate that no finite constant exists, or None.

    Looks for a point with mu1 > 0 and zero mu3 mass that lies in some
    sublevel where the closed tail of mu2 is positive.
    """
    bad = np.flatnonzero((inst.mu1 > 0) & (inst.mass3 == 0))
    mu2 = inst.mu2
    for i in bad:
        level = float(inst.level[i])
        if mode == CLOSED:
            if tail_many(mu2, level, CLOSED) > 0:
                return UnboundedCertificate(inst.ids[i], level, mode)
            continue
        if not tail_many(mu2, level, OPEN) > 0:
            continue
        cands = [x for x, m in mu2.atoms if x > level and m > 0]
        cands += [0.5 * (max(a, level) + b) for a, b, v in mu2.density
                  if b > level and v > 0]
        return UnboundedCertificate(inst.ids[i], float(min(cands)), mode)
    return None


def witness_ratio(inst, e, r, mode=STRICT):
    try:
        f = witness_function(inst, e, r, mode)
    except EmptySublevelError:
        return 0.0, FunctionOnX.zeros(inst)
    return ratio(lhs(inst, e, f, mode), rhs(inst, e, f)), f


# ---------------------------------------------------------------------------
# estimates of the minimal constant


def _best_witness(inst, e, report: ConstantReport):
    if report.witness_r is None or report.value == 0:
        return 0.0, FunctionOnX.zeros(inst)
    return witness_ratio(inst, e, report.witness_r, report.mode)


def estimate_min_C(inst: DiscreteInstance, e: Exponents, mode: str = STRICT,
                   max_iter: int = DEFAULT_MAX_ITER, tol: float = DEFAULT_TOL,
                   restarts: int = DEFAULT_RESTARTS, seed: int = 0,
                   constant: Optional[ConstantReport] = None) -> SharpnessReport:
    """Nonlinear power iteration for the ``l^p -> l^q`` norm of the kernel.

    Seeds: the extremal witness at the maximizer of B (or B'), then
    ``restarts`` random exponential vectors.  Every candidate is re-scored
    with :func:`lhs` / :func:`rhs`, so ``C_hat`` is realized by
    ``witness_f`` and is a lower bound for the minimal constant.
    """
    if not e.interior:
        raise ValueError("estimate_min_C needs p, q in (1, inf)")
    kernel = assemble_kernel(inst, e, mode)
    rep = constant or compute_constant(inst, e, mode)
    w_ratio, w_f = _best_witness(inst, e, rep)
    best_ratio, best_f = w_ratio, w_f

    rng = np.random.default_rng(seed)
    seeds = [kernel.to_u(w_f.values)]
    seeds += [rng.exponential(size=inst.size) for _ in range(restarts)]
    total_iter = 0
    converged = True
    for u0 in seeds:
        u0 = np.where(kernel.col_w > 0, u0, 0.0)
        if not np.any(u0 > 0):
            continue
        u, _, it, conv = _kernels.power_iterate(
            kernel.col_w, kernel.cut, kernel.row_w, np.ascontiguousarray(u0),
            e.p, e.q, int(max_iter), float(tol))
        total_iter += it
        converged = converged and conv
        f = FunctionOnX(inst.ids, kernel.to_f(u))
        rr = ratio(lhs(inst, e, f, mode), rhs(inst, e, f))
        if rr > best_ratio:
            best_ratio, best_f = rr, f

    c_b = cb_constant(e)
    return SharpnessReport(
        B=rep.value, B_witness_r=rep.witness_r, C_hat=best_ratio,
        C_upper=_upper(c_b, rep.value), witness_f=best_f,
        iterations=total_iter, converged=converged, mode=mode, C_B=c_b,
        witness_ratio=w_ratio, B_witness_side=rep.witness_side)


def _upper(c_b, b):
    return 0.0 if b == 0 else c_b * b


def oracle_matrix_norm(A, p: float, q: float, samples: int = 100_000,
                       seed: int = 0, polish: int = 4, extra=()) -> float:
    """Brute-force lower bound on ``|A|_{p->q}`` for a nonnegative matrix:
    random nonnegative directions, coordinate vectors and any ``extra``
    rows, then the best ``polish`` candidates refined by a bounded
    quasi-Newton ascent on the ratio."""
    from scipy.optimize import minimize

    A = np.atleast_2d(np.asarray(A, dtype=float))
    n = A.shape[1]
    if n == 0 or not np.any(A > 0):
        return 0.0
    rng = np.random.default_rng(seed)
    U = rng.exponential(size=(samples, n)) * (rng.random((samples, n)) < 0.8)
    U = np.vstack([U, np.eye(n)] + [np.atleast_2d(x) for x in extra])

    def ratios(X):
        num = np.sum((X @ A.T) ** q, axis=1) ** (1.0 / q)
        den = np.sum(X ** p, axis=1) ** (1.0 / p)
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(den > 0, num / np.where(den > 0, den, 1.0), 0.0)

    vals = ratios(U)
    best = float(vals.max())

    def neg(u):
        u = np.maximum(u, 0.0)
        den = np.sum(u ** p) ** (1.0 / p)
        if den == 0:
            return 0.0
        return -float(np.sum((A @ u) ** q) ** (1.0 / q) / den)

    for k in np.argsort(vals)[::-1][:polish]:
        x0 = U[k] / np.sum(U[k] ** p) ** (1.0 / p)
        res = minimize(neg, x0, method="L-BFGS-B", bounds=[(0, None)] * n,
                       options={"ftol": 1e-15, "gtol": 1e-12, "maxiter": 2000})
        best = max(best, -neg(res.x))
    return best


def oracle_min_C(inst: DiscreteInstance, e: Exponents, mode: str = STRICT,
                 samples: int = 100_000, seed: int = 0, polish: int = 4) -> float:
    """:func:`oracle_matrix_norm` on the dense kernel of ``inst``, with the
    extremal witness added to the sampled directions."""
    if not (e.p < math.inf and e.q < math.inf):
        raise ValueError("oracle_min_C needs finite p and q")
    kernel = assemble_kernel(inst, e, mode)
    extra = []
    rep = compute_constant(inst, e, mode)
    if rep.witness_r is not None:
        try:
            w = witness_function(inst, e, rep.witness_r, mode)
            extra.append(kernel.to_u(w.values))
        except EmptySublevelError:
            pass
    return oracle_matrix_norm(kernel.matrix, e.p, e.q, samples, seed, polish, extra)


# ---------------------------------------------------------------------------
# sandwich


def sandwich_report(inst: DiscreteInstance, e: Exponents, mode: str = STRICT,
                    seed: int = 0, n_random: int = 32,
                    max_iter: int = DEFAULT_MAX_ITER, tol: float = DEFAULT_TOL,
                    restarts: int = DEFAULT_RESTARTS,
                    cb_scale: float = 1.0) -> SharpnessReport:
    """B (or B'), ``C_B * B``, the extremal-witness ratio, the power-iteration
    estimate when ``p, q in (1, inf)``, and pass/fail verdicts.

    ``cb_scale`` multiplies the upper factor; it exists to inject a wrong
    constant in tests of the checking machinery.
    """
    c_b = cb_constant(e) * cb_scale
    rep = compute_constant(inst, e, mode)
    cert = detect_unbounded(inst, e, mode)
    if cert is not None or rep.value == math.inf:
        verdict = Verdict(UNBOUNDED, True,
                          f"no finite C (certificate point {cert.point_id!r})"
                          if cert else "no finite C (B is infinite)")
        return SharpnessReport(
            B=rep.value, B_witness_r=rep.witness_r, C_hat=math.inf, C_upper=math.inf,
            witness_f=None, iterations=0, converged=False, mode=mode, C_B=c_b,
            witness_ratio=math.inf, B_witness_side=rep.witness_side,
            certificate=cert, verdicts=[verdict])

    if e.interior:
        report = estimate_min_C(inst, e, mode, max_iter=max_iter, tol=tol,
                                restarts=restarts, seed=seed, constant=rep)
        report.C_B = c_b
        report.C_upper = _upper(c_b, rep.value)
    else:
        w_ratio, w_f = _best_witness(inst, e, rep)
        report = SharpnessReport(
            B=rep.value, B_witness_r=rep.witness_r, C_hat=w_ratio,
            C_upper=_upper(c_b, rep.value), witness_f=w_f, iterations=0,
            converged=False, mode=mode, C_B=c_b, witness_ratio=w_ratio,
            B_witness_side=rep.witness_side)

    B, upper = report.B, report.C_upper
    report.verdicts.append(Verdict(
        "witness_ratio>=B", report.witness_ratio >= B - 1e-9 * B,
        f"witness ratio {report.witness_ratio!r}, B {B!r}"))
    report.verdicts.append(Verdict(
        "C_hat<=C_B*B", report.C_hat <= upper * (1 + 1e-9),
        f"C_hat {report.C_hat!r}, C_B*B {upper!r}"))

    rng = np.random.default_rng([seed, 1])
    worst = 0.0
    ok = True
    for _ in range(n_random):
        f = FunctionOnX(inst.ids, rng.exponential(size=inst.size))
        left, right = lhs(inst, e, f, mode), rhs(inst, e, f)
        if not left <= upper * right * (1 + 1e-12):
            ok = False
        worst = max(worst, ratio(left, right))
    report.verdicts.append(Verdict(
        "random_f_upper_bound", ok,
        f"max ratio over {n_random} random f: {worst!r}, C_B*B {upper!r}"))
    return report


def step7_check(inst: DiscreteInstance, e: Exponents, mode: str = STRICT,
                rel: float = 1e-12):
    """For every candidate r of the B enumeration, the witness ratio at r
    must reach the B-product at r.  Returns the list of failures as
    ``(r, witness_ratio, product)``."""
    from .core import _breakpoints, _next_point

    s = _breakpoints(inst)
    failures = []
    for r in np.concatenate([s, _next_point(s)]):
        prod = b_product(inst, e, float(r), mode)
        if prod == 0 or prod == math.inf:
            continue
        wr, _ = witness_ratio(inst, e, float(r), mode)
        if wr < prod * (1 - rel):
            failures.append((float(r), wr, prod))
    return failures
