"""Desk-scale numerical checks of the auxiliary facts the constant relies on:
the open/closed sup identity for B, the one-sided sup limit for monotone
step functions, the chain rule for piecewise-linear functions and the
convergence of atom smoothing."""

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .core import (Exponents, compute_B, power_conv, product0,
                   inv, weight_integral)
from .measure import (CLOSED, OPEN, RealMeasure, StepFunction, integrate_step,
                      smooth_atoms_left, tail)

REL = 1e-12


def _close(a, b, rel=REL):
    if math.isinf(a) or math.isinf(b):
        return a == b
    return abs(a - b) <= rel * max(1.0, abs(a), abs(b))


# ---------------------------------------------------------------------------
# open tail / closed sublevel identity


class SupIdentityResult(NamedTuple):
    lhs_sup: float
    rhs_sup: float
    equal: bool


def identity_asserted(e: Exponents) -> bool:
    """Whether the identity is expected to hold (p > 1 and q finite); other
    exponent pairs are only reported."""
    return e.p > 1 and e.q < math.inf


def _probe_points(inst):
    bps = np.unique(np.concatenate([inst.level, inst.mu2.breakpoints()]))
    if bps.size == 0:
        return np.array([0.0])
    mids = 0.5 * (bps[:-1] + bps[1:])
    return np.concatenate([[bps[0] - 1.0], bps, mids, [bps[-1] + 1.0]])


def open_tail_sup(inst, e: Exponents) -> float:
    """``sup_r mu2((r, inf))^(1/q) W(N <= r)^(1/p')`` by direct evaluation
    at every breakpoint, every gap midpoint and beyond both ends."""
    best = 0.0
    for r in _probe_points(inst):
        t = tail(inst.mu2, float(r), OPEN)
        w = weight_integral(inst, float(r), CLOSED, e)
        wf = w if e.p == 1 else power_conv(w, inv(e.p_conj))
        best = max(best, float(product0(power_conv(t, inv(e.q)), wf)))
    return best


def eq3_check(inst, e: Exponents) -> SupIdentityResult:
    """Compare B (closed tail, strict sublevel) with the sup of the open
    tail against the closed sublevel."""
    lhs_sup = compute_B(inst, e).value
    rhs_sup = open_tail_sup(inst, e)
    return SupIdentityResult(lhs_sup, rhs_sup, _close(lhs_sup, rhs_sup))


# ---------------------------------------------------------------------------
# one-sided sup limit


class ShiftLimitResult(NamedTuple):
    values: list
    sup_fg: float
    limit_ok: bool


def _min_gap(points) -> float:
    pts = np.unique(np.asarray(points, dtype=float))
    return float(np.diff(pts).min()) if pts.size > 1 else math.inf


def _step_sup(pairs, f, g) -> float:
    xf = np.array([a for a, _ in pairs])
    xg = np.array([b for _, b in pairs])
    return float(np.max(np.asarray(f(xf)) * np.asarray(g(xg))))


def _gap_samples(pts):
    pts = np.unique(np.asarray(pts, dtype=float))
    if pts.size == 0:
        return np.array([0.0])
    mids = 0.5 * (pts[:-1] + pts[1:])
    return np.concatenate([[pts[0] - 1.0], mids, [pts[-1] + 1.0]])


def shifted_sup(f: StepFunction, g: StepFunction, eps: float) -> float:
    """``sup_r f(r - eps) g(r)`` by enumerating the breakpoints of the
    product and one point in every gap between them."""
    pairs = [(b, b + eps) for b in f.breakpoints]
    pairs += [(b - eps, b) for b in g.breakpoints]
    shifted = np.concatenate([f.breakpoints + eps, g.breakpoints])
    pairs += [(r - eps, r) for r in _gap_samples(shifted)]
    return _step_sup(pairs, f, g)


def plain_sup(f: StepFunction, g: StepFunction) -> float:
    pts = np.concatenate([f.breakpoints, g.breakpoints])
    rs = np.concatenate([pts, _gap_samples(pts)])
    return _step_sup([(r, r) for r in rs], f, g)


def _validate_pair(f, g):
    if not (f.is_nonincreasing() and f.left_continuous):
        raise ValueError("f must be nonincreasing and left-continuous")
    if not (g.is_nondecreasing() and g.right_continuous):
        raise ValueError("g must be nondecreasing and right-continuous")
    if np.any(f.values < 0) or np.any(g.values < 0):
        raise ValueError("f and g must be nonnegative")
    if f.values[0] * g.values[0] != 0 or f.values[-1] * g.values[-1] != 0:
        raise ValueError("f*g must be compactly supported")


def lemma2_limit(f: StepFunction, g: StepFunction,
                 eps_list: Sequence[float]) -> ShiftLimitResult:
    """Values of ``sup_r f(r - eps) g(r)`` along ``eps_list`` and whether
    they equal ``sup f g`` for every eps below the minimal breakpoint gap.

    Shifts are exact when the breakpoints and eps are dyadic rationals of
    moderate size, which is how the random suite generates them.
    """
    _validate_pair(f, g)
    eps_list = [float(x) for x in eps_list]
    if any(x <= 0 for x in eps_list):
        raise ValueError("eps values must be positive")
    target = plain_sup(f, g)
    values = [shifted_sup(f, g, eps) for eps in eps_list]
    gap = _min_gap(np.concatenate([f.breakpoints, g.breakpoints]))
    tail_vals = [v for eps, v in zip(eps_list, values) if eps < gap]
    if not tail_vals:
        tail_vals = values[-1:]
    ok = bool(tail_vals) and all(_close(v, target) for v in tail_vals)
    return ShiftLimitResult(values, target, ok)


# ---------------------------------------------------------------------------
# chain rule for piecewise-linear functions


class DiscontinuityError(ValueError):
    pass


@dataclass(frozen=True)
class PiecewiseLinear:
    """Linear pieces ``(a, b, f(a), f(b+))`` on consecutive intervals."""

    pieces: tuple

    def __post_init__(self):
        pieces = tuple(tuple(float(v) for v in pc) for pc in self.pieces)
        if not pieces:
            raise ValueError("need at least one piece")
        for k, (a, b, _, _) in enumerate(pieces):
            if not b > a:
                raise ValueError(f"piece {k} has empty interval")
            if k and a != pieces[k - 1][1]:
                raise ValueError(f"piece {k} does not start where piece {k - 1} ends")
            if k and pieces[k][2] != pieces[k - 1][3]:
                raise DiscontinuityError(
                    f"jump at t={a}: {pieces[k - 1][3]} -> {pieces[k][2]}")
        object.__setattr__(self, "pieces", pieces)

    @classmethod
    def from_knots(cls, t, y) -> "PiecewiseLinear":
        t = [float(v) for v in t]
        y = [float(v) for v in y]
        if len(t) != len(y) or len(t) < 2:
            raise ValueError("need matching knots and values, at least two")
        return cls(tuple((t[k], t[k + 1], y[k], y[k + 1]) for k in range(len(t) - 1)))

    @property
    def a(self):
        return self.pieces[0][0]

    @property
    def b(self):
        return self.pieces[-1][1]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        starts = np.array([pc[0] for pc in self.pieces])
        k = np.clip(np.searchsorted(starts, x, side="right") - 1, 0, len(self.pieces) - 1)
        arr = np.array(self.pieces)
        a, b, ya, yb = arr[k].T
        out = ya + (yb - ya) * (x - a) / (b - a)
        return out if out.ndim else float(out)


class ChainRuleResult(NamedTuple):
    lhs: float
    rhs: float
    ok: bool


def chainrule_check(f: PiecewiseLinear, phi: Callable, dphi: Callable,
                    grid: int = 10_000, rel: float = 1e-6) -> ChainRuleResult:
    """``phi(f(b)) - phi(f(a))`` against ``int (phi' o f) df'`` with
    composite midpoint quadrature on each linear piece."""
    if grid < 1:
        raise ValueError("grid must be positive")
    lhs = float(phi(f.pieces[-1][3]) - phi(f.pieces[0][2]))
    rhs = 0.0
    u = (np.arange(grid) + 0.5) / grid
    for a, b, ya, yb in f.pieces:
        slope = (yb - ya) / (b - a)
        if slope == 0:
            continue
        vals = np.asarray(dphi(ya + (yb - ya) * u), dtype=float)
        rhs += slope * (b - a) * float(vals.mean())
    return ChainRuleResult(lhs, rhs, abs(lhs - rhs) <= rel * max(1.0, abs(lhs)))


# ---------------------------------------------------------------------------
# atom smoothing convergence


class SmoothingResult(NamedTuple):
    errors: list
    decreasing_ok: bool


def smoothing_convergence(mu: RealMeasure, f: StepFunction,
                          n_list: Sequence[int]) -> SmoothingResult:
    """Integration error of ``f`` after smearing atoms to the left.

    ``decreasing_ok`` asks for zero error (to 1e-12) at every ``n`` whose
    smear width ``2^-n`` is at most the minimal gap between atom locations
    and breakpoints of ``f``.
    """
    if not f.left_continuous:
        raise ValueError("f must be left-continuous")
    exact = integrate_step(mu, f)
    errors = [float(abs(integrate_step(smooth_atoms_left(mu, int(n)), f) - exact))
              for n in n_list]
    live = mu.atom_loc[mu.atom_mass > 0]
    gap = _min_gap(np.concatenate([live, f.breakpoints]))
    tol = REL * max(1.0, abs(exact))
    late = [err for n, err in zip(n_list, errors) if 2.0 ** (-int(n)) <= gap]
    return SmoothingResult(errors, bool(late) and all(x <= tol for x in late))

