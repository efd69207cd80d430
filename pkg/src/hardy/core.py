"""Exponent algebra, the characterizing constants B and B', and the explicit
upper factor C_B.

Extended reals are plain floats with ``math.inf``.  Powers follow the
conventions ``0**0 = 0`` and ``inf**0 = 1`` (see :func:`power_conv`), and
products use ``0 * inf = 0``.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .measure import CLOSED, OPEN, RealMeasure, cdf_many, tail_many

INF = math.inf
STRICT = "strict"
AT = "at"
JUST_ABOVE = "just_above"


class ExponentError(ValueError):
    pass


class ExponentOrderError(ExponentError):
    """``q < p``, which the characterization does not cover."""


def parse_exponent(x) -> float:
    if isinstance(x, str):
        s = x.strip().lower()
        if s in ("inf", "+inf", "infinity", "+infinity"):
            return INF
        x = float(s)
    return float(x)


def dual_exponent(p: float) -> float:
    """Conjugate exponent: ``1/p + 1/p' = 1`` with ``1' = inf``, ``inf' = 1``."""
    p = parse_exponent(p)
    if not p >= 1:
        raise ExponentError(f"exponent must be >= 1, got {p}")
    if p == 1:
        return INF
    if p == INF:
        return 1.0
    return p / (p - 1.0)


def inv(x: float) -> float:
    return 0.0 if x == INF else 1.0 / x


@dataclass(frozen=True)
class Exponents:
    p: float
    q: float

    def __post_init__(self):
        p = parse_exponent(self.p)
        q = parse_exponent(self.q)
        if not (p >= 1 and q >= 1):
            raise ExponentError(f"exponents must lie in [1, inf], got p={p}, q={q}")
        if q < p:
            raise ExponentOrderError(
                f"q={q} < p={p}: only p <= q is supported (the case q < p is "
                "not covered by this characterization)")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @property
    def p_conj(self) -> float:
        return dual_exponent(self.p)

    @property
    def q_conj(self) -> float:
        return dual_exponent(self.q)

    @property
    def interior(self) -> bool:
        """Both exponents in the open range (1, inf)."""
        return 1 < self.p < INF and 1 < self.q < INF

    @property
    def psi_power(self) -> float:
        """The exponent ``-p'/p`` applied to psi (p > 1)."""
        if self.p == 1:
            raise ExponentError("p = 1 uses the essential supremum of 1/psi")
        return -inv(self.p - 1.0)


def power_conv(x: float, e: float) -> float:
    """``x**e`` on ``[0, inf]`` with ``0**0 = 0`` and ``inf**0 = 1``."""
    if e == 0:
        return 0.0 if x == 0 else 1.0
    if x == 0:
        return 0.0 if e > 0 else INF
    if x == INF:
        return INF if e > 0 else 0.0
    return float(x) ** e


def power_conv_many(x, e: float) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if e == 0:
        return np.where(x == 0, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        out = np.power(x, e)
    if e < 0:
        out = np.where(x == 0, INF, out)
    return out


def product0(a, b):
    """Product where a zero factor wins over an infinite one."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(invalid="ignore"):
        out = a * b
    out = np.where((a == 0) | (b == 0), 0.0, out)
    return out if out.ndim else float(out)


def cb_constant(e: Exponents) -> float:
    """``min((p')^(1/p') p^(1/q), (q')^(1/p') q^(1/q))``."""
    pc, qc = e.p_conj, e.q_conj
    a = power_conv(pc, inv(pc)) * power_conv(e.p, inv(e.q))
    b = power_conv(qc, inv(pc)) * power_conv(e.q, inv(e.q))
    return min(a, b)


def tail_factor(t, e: Exponents):
    out = power_conv_many(t, inv(e.q))
    return out if out.ndim else float(out)


def sublevel_factor(w, e: Exponents):
    """``W^(1/p')`` for p > 1; for p = 1, ``W`` is already an L^inf norm."""
    if e.p == 1:
        out = np.asarray(w, dtype=float)
    else:
        out = power_conv_many(w, inv(e.p_conj))
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# weighted sublevel integrals on discrete instances


def point_weights(inst, e: Exponents) -> np.ndarray:
    """Per-point contribution ``mu1 * psi^(-p'/p)`` (p > 1), or for p = 1
    the value ``1/psi`` on points of positive mu1 weight (0 elsewhere)."""
    if e.p == 1:
        w = power_conv_many(inst.psi, -1.0)
        return np.where(inst.mu1 > 0, w, 0.0)
    return product0(inst.mu1, power_conv_many(inst.psi, e.psi_power))


def _sublevel_counts(levels, r, mode):
    side = "left" if mode == STRICT else "right"
    return np.searchsorted(levels, np.asarray(r, dtype=float), side=side)


def weight_integral_many(inst, r, mode: str, e: Exponents) -> np.ndarray:
    """Vectorized :func:`weight_integral` using sorted prefix sums/maxima."""
    if mode not in (STRICT, CLOSED):
        raise ValueError(f"unknown sublevel mode {mode!r}")
    w = point_weights(inst, e)
    k = _sublevel_counts(inst.level, r, mode)
    acc = np.zeros(w.size + 1)
    if w.size:
        if e.p == 1:
            acc[1:] = np.maximum.accumulate(w)
        else:
            acc[1:] = np.cumsum(w)
    return acc[k]


def weight_integral(inst, r: float, mode: str, e: Exponents) -> float:
    """``sum_{N(x) < r} mu1 * psi^(-p'/p)`` (``<=`` in closed mode); for
    p = 1 the mu1-essential supremum of ``1/psi`` over the sublevel."""
    if mode not in (STRICT, CLOSED):
        raise ValueError(f"unknown sublevel mode {mode!r}")
    inside = inst.level < r if mode == STRICT else inst.level <= r
    w = point_weights(inst, e)[inside]
    if e.p == 1:
        return float(w.max()) if w.size else 0.0
    return float(np.sum(w))


# ---------------------------------------------------------------------------
# B and B'


@dataclass(frozen=True)
class ConstantReport:
    """Value of a sup-type constant together with where it is reached.

    ``witness_side == "at"``: the product attains ``value`` at
    ``witness_r``.  ``"just_above"``: ``value`` is the limit from the right
    at ``anchor_r``; ``witness_r`` is then an interior point of the next
    breakpoint gap whose sublevel equals the closed sublevel at
    ``anchor_r``.
    """

    value: float
    witness_r: Optional[float]
    witness_side: str
    anchor_r: Optional[float] = None
    mode: str = STRICT


def _breakpoints(inst) -> np.ndarray:
    return np.unique(np.concatenate([inst.level, inst.mu2.breakpoints()]))


def _next_point(s: np.ndarray) -> np.ndarray:
    nxt = np.empty_like(s)
    nxt[:-1] = 0.5 * (s[:-1] + s[1:])
    if s.size:
        nxt[-1] = s[-1] + 1.0
    return nxt


def candidate_products(inst, e: Exponents, mode: str = STRICT):
    """All candidate values of the sup defining B (strict) or B' (closed).

    Returns ``(s, at, above)``: sorted breakpoints, the product evaluated
    at each breakpoint, and its right limit at each breakpoint.  The
    sublevel integral is constant between breakpoints and the tail is
    nonincreasing there, so these values exhaust the supremum.
    """
    s = _breakpoints(inst)
    w_closed = weight_integral_many(inst, s, CLOSED, e)
    w_at = w_closed if mode == CLOSED else weight_integral_many(inst, s, STRICT, e)
    at = product0(tail_factor(tail_many(inst.mu2, s, CLOSED), e),
                  sublevel_factor(w_at, e))
    above = product0(tail_factor(tail_many(inst.mu2, s, OPEN), e),
                     sublevel_factor(w_closed, e))
    return s, np.atleast_1d(at), np.atleast_1d(above)


def _sup_report(inst, e: Exponents, mode: str) -> ConstantReport:
    s, at, above = candidate_products(inst, e, mode)
    if s.size == 0:
        return ConstantReport(0.0, None, AT, None, mode)
    best_at = at.max()
    best_above = above.max()
    if best_at >= best_above:
        k = int(np.flatnonzero(at == best_at)[0])
        return ConstantReport(float(best_at), float(s[k]), AT, float(s[k]), mode)
    k = int(np.flatnonzero(above == best_above)[0])
    return ConstantReport(float(best_above), float(_next_point(s)[k]),
                          JUST_ABOVE, float(s[k]), mode)


def compute_B(inst, e: Exponents) -> ConstantReport:
    """``sup_r mu2([r, inf))^(1/q) (int_{N < r} psi^(-p'/p) dmu1)^(1/p')``."""
    return _sup_report(inst, e, STRICT)


def compute_Bprime(inst, e: Exponents) -> ConstantReport:
    """As :func:`compute_B` with the closed sublevel ``N <= r``."""
    return _sup_report(inst, e, CLOSED)


def compute_constant(inst, e: Exponents, mode: str = STRICT) -> ConstantReport:
    return _sup_report(inst, e, mode)


def b_product(inst, e: Exponents, r: float, mode: str = STRICT) -> float:
    """The product inside the sup at a single ``r`` (direct evaluation)."""
    t = float(tail_many(inst.mu2, r, CLOSED))
    w = weight_integral(inst, r, mode, e)
    return float(product0(tail_factor(t, e), sublevel_factor(w, e)))


# ---------------------------------------------------------------------------
# closed-form maximizer on one segment


def segment_max(A: float, c: float, D: float, d: float, L: float,
                e: Exponents):
    """Maximize ``F(t) = (A - c t)^(1/q) (D + d t)^(1/p')`` on ``[0, L]``.

    Returns ``(t_star, value)``.  The log-derivative of F has a single zero,
    so the maximum is at that stationary point or at an endpoint.
    """
    if not e.interior:
        raise ExponentError("segment_max needs p, q in (1, inf)")
    if min(A, c, D, d) < 0 or not L > 0:
        raise ValueError("segment_max needs nonnegative data and L > 0")
    if A - c * L < 0:
        raise ValueError(f"tail would turn negative: A - cL = {A - c * L}")
    a_exp, b_exp = inv(e.q), inv(e.p_conj)

    def F(t):
        return float(product0(power_conv(max(A - c * t, 0.0), a_exp),
                              power_conv(D + d * t, b_exp)))

    cands = [0.0, L]
    if c * d > 0:
        t = (d * A * b_exp - c * D * a_exp) / (c * d * (a_exp + b_exp))
        cands.insert(1, min(max(t, 0.0), L))
    values = [F(t) for t in cands]
    k = int(np.argmax(values))
    return cands[k], values[k]


def compute_B_line(line, e: Exponents) -> ConstantReport:
    """B of a line instance, exact for piecewise-constant data.

    On every gap between breakpoints the tail of mu2 is affine and the
    weighted sublevel integral is affine, so each gap is one
    :func:`segment_max` problem; breakpoints are checked directly.
    """
    if not e.interior:
        raise ExponentError("compute_B_line needs p, q in (1, inf)")
    nu, x_inf = line.weighted_mu1(e.psi_power)
    mu2 = line.mu2
    s = np.unique(np.concatenate([nu.breakpoints(), mu2.breakpoints()]))
    if x_inf is not None:
        # the weighted sublevel integral is infinite for every r > x_inf
        if tail_many(mu2, x_inf, OPEN) > 0:
            nxt = s[s > x_inf]
            r = 0.5 * (x_inf + nxt[0]) if nxt.size else x_inf + 1.0
            return ConstantReport(INF, float(r), JUST_ABOVE, x_inf, STRICT)
        s = s[s <= x_inf]
    if s.size == 0:
        return ConstantReport(0.0, None, AT, None, STRICT)

    at = product0(tail_factor(tail_many(mu2, s, CLOSED), e),
                  sublevel_factor(cdf_many(nu, s), e))
    best, best_r, side, anchor = 0.0, float(s[0]), AT, float(s[0])
    k = int(np.argmax(at))
    if at[k] > best:
        best, best_r, anchor = float(at[k]), float(s[k]), float(s[k])

    A = tail_many(mu2, s[:-1], OPEN)
    D = cdf_many(nu, s[:-1], closed=True)
    mids = 0.5 * (s[:-1] + s[1:])
    c = _density_at(mu2, mids)
    d = _density_at(nu, mids)
    for j in range(s.size - 1):
        L = float(s[j + 1] - s[j])
        a0 = max(float(A[j]), float(c[j]) * L)  # guard rounding below cL
        t, v = segment_max(a0, float(c[j]), float(D[j]), float(d[j]), L, e)
        if v > best:
            best = v
            if t == 0.0:
                best_r, side, anchor = float(mids[j]), JUST_ABOVE, float(s[j])
            else:
                best_r, side, anchor = float(s[j] + t), AT, float(s[j] + t)
    return ConstantReport(best, best_r, side, anchor, STRICT)


def _density_at(mu: RealMeasure, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if mu.piece_lo.size == 0:
        return np.zeros_like(x)
    k = np.searchsorted(mu.piece_lo, x, side="right") - 1
    kk = np.maximum(k, 0)
    inside = (k >= 0) & (mu.piece_hi[kk] > x)
    return np.where(inside, mu.piece_val[kk], 0.0)
