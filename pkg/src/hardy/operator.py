"""Both sides of the Hardy inequality on a discrete instance, and the
equivalent nonnegative l^p -> l^q kernel.

Sublevel mode ``"strict"`` uses ``{N(x) < r}`` (the inequality behind B);
``"closed"`` uses ``{N(x) <= r}`` (the variant behind B').
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .core import STRICT, Exponents
from .instance import DiscreteInstance, values_of
from .measure import CLOSED


class UnboundedInstanceError(ValueError):
    """A point with positive mu1 weight and zero mu3 mass lies in the
    sublevel of some charged row; no finite constant exists."""

    def __init__(self, point_id, r):
        super().__init__(f"point {point_id!r} has mu1 > 0 and zero mu3 mass "
                         f"inside the sublevel at r = {r!r}")
        self.point_id = point_id
        self.r = r


def _check_mode(mode):
    if mode not in (STRICT, CLOSED):
        raise ValueError(f"unknown sublevel mode {mode!r}")


def _counts(inst, r, mode):
    side = "left" if mode == STRICT else "right"
    return np.searchsorted(inst.level, np.asarray(r, dtype=float), side=side)


def _inner_many(inst, fv, r, mode):
    prefix = np.zeros(inst.size + 1)
    prefix[1:] = np.cumsum(fv * inst.mu1)
    return prefix[_counts(inst, r, mode)]


def apply_inner(inst: DiscreteInstance, f, r: float, mode: str = STRICT) -> float:
    """``sum_{N(x) < r} f(x) mu1(x)`` (``<=`` in closed mode)."""
    _check_mode(mode)
    fv = values_of(inst, f)
    inside = inst.level < r if mode == STRICT else inst.level <= r
    return float(np.sum(fv[inside] * inst.mu1[inside]))


def _mass_times_power(mass, s, q):
    """``mass * s**q`` with ``0 * inf = 0``."""
    with np.errstate(invalid="ignore", over="ignore"):
        out = mass * s ** q
    return np.where((mass == 0) | (s == 0), 0.0, out)


def lhs(inst: DiscreteInstance, e: Exponents, f, mode: str = STRICT) -> float:
    """``(int_R (inner(r))^q dmu2(r))^(1/q)``, exact on atoms and on density
    pieces (the inner integral is constant between point levels)."""
    _check_mode(mode)
    fv = values_of(inst, f)
    mu2 = inst.mu2
    if e.q == math.inf:
        return _lhs_sup(inst, fv, mode)

    masses = [mu2.atom_mass]
    inner = [_inner_many(inst, fv, mu2.atom_loc, mode)]
    for lo, hi, val in zip(mu2.piece_lo, mu2.piece_hi, mu2.piece_val):
        if val == 0:
            continue
        inner_levels = inst.level[(inst.level > lo) & (inst.level < hi)]
        edges = np.concatenate(([lo], np.unique(inner_levels), [hi]))
        # on (edges[k], edges[k+1]) the sublevel is {N <= edges[k]}
        inner.append(_inner_many(inst, fv, edges[:-1], CLOSED))
        masses.append(val * np.diff(edges))
    return _scaled_norm(np.concatenate(inner), np.concatenate(masses), e.q)


def _scaled_norm(values, mass, power):
    """``(sum mass * values^power)^(1/power)`` with values scaled by their
    max first, so tiny or huge inputs do not under/overflow."""
    live = (mass > 0) & (values > 0)
    if not np.any(live):
        return 0.0
    top = float(values[live].max())
    total = float(np.sum(_mass_times_power(mass[live], values[live] / top, power)))
    return top * total ** (1.0 / power)


def _lhs_sup(inst, fv, mode):
    mu2 = inst.mu2
    vals = [_inner_many(inst, fv, mu2.atom_loc[mu2.atom_mass > 0], mode)]
    # right limits at the end of each charged piece
    vals.append(_inner_many(inst, fv, mu2.piece_hi[mu2.piece_val > 0], STRICT))
    vals = np.concatenate(vals)
    return float(vals.max()) if vals.size else 0.0


def rhs(inst: DiscreteInstance, e: Exponents, f) -> float:
    """``(sum f^p dmu3)^(1/p)``; for p = inf the max of f where mu3 > 0."""
    fv = values_of(inst, f)
    m3 = inst.mass3
    if e.p == math.inf:
        live = fv[m3 > 0]
        return float(live.max()) if live.size else 0.0
    return _scaled_norm(fv, m3, e.p)


def ratio(num: float, den: float) -> float:
    """``num / den`` with ``0/0 = 0`` and ``x/0 = inf`` for ``x > 0``."""
    if den == 0:
        return 0.0 if num == 0 else math.inf
    return num / den


def inequality_ratio(inst, e, f, mode=STRICT) -> float:
    return ratio(lhs(inst, e, f, mode), rhs(inst, e, f))


# ---------------------------------------------------------------------------
# kernel


def row_nodes(inst: DiscreteInstance, mode: str = STRICT):
    """``(r, mass)`` rows on which the inner integral is exactly constant.

    Atoms give one row each.  Each density piece is cut at the point levels
    inside it; a subcell ``[a, b)`` is lumped at ``b`` in strict mode and at
    ``a`` in closed mode, where the sublevel equals the one on the open
    subcell.
    """
    _check_mode(mode)
    mu2 = inst.mu2
    live = mu2.atom_mass > 0
    rs = [mu2.atom_loc[live]]
    ms = [mu2.atom_mass[live]]
    for lo, hi, val in zip(mu2.piece_lo, mu2.piece_hi, mu2.piece_val):
        if val == 0:
            continue
        inner_levels = inst.level[(inst.level > lo) & (inst.level < hi)]
        edges = np.concatenate(([lo], np.unique(inner_levels), [hi]))
        rs.append(edges[1:] if mode == STRICT else edges[:-1])
        ms.append(val * np.diff(edges))
    return np.concatenate(rs), np.concatenate(ms)


@dataclass(frozen=True, eq=False)
class HardyKernel:
    """Nonnegative staircase matrix ``A[j, i] = row_w[j] col_w[i] [i < cut[j]]``.

    With ``u = f * mass3^(1/p)``, ``lhs(f)/rhs(f) = |A u|_q / |u|_p``.
    """

    row_r: np.ndarray
    row_mass: np.ndarray
    cut: np.ndarray
    row_w: np.ndarray
    col_w: np.ndarray
    mass3: np.ndarray
    exponents: Exponents
    mode: str
    ids: tuple

    @property
    def shape(self):
        return (self.row_r.size, self.col_w.size)

    @property
    def row_nodes(self):
        return list(zip(self.row_r.tolist(), self.row_mass.tolist()))

    @property
    def matrix(self) -> np.ndarray:
        """Dense form; only sensible for small instances."""
        idx = np.arange(self.col_w.size)
        mask = idx[None, :] < self.cut[:, None]
        return np.where(mask, self.row_w[:, None] * self.col_w[None, :], 0.0)

    def matvec(self, u):
        return _kernels.matvec(self.col_w, self.cut, self.row_w,
                               np.ascontiguousarray(u, dtype=float).ravel())

    def rmatvec(self, v):
        return _kernels.rmatvec(self.col_w, self.cut, self.row_w,
                                np.ascontiguousarray(v, dtype=float).ravel())

    def to_u(self, fv) -> np.ndarray:
        return np.asarray(fv, dtype=float) * self.mass3 ** (1.0 / self.exponents.p)

    def to_f(self, u) -> np.ndarray:
        m = self.mass3 ** (1.0 / self.exponents.p)
        safe = np.where(m > 0, m, 1.0)
        return np.where(m > 0, np.asarray(u, dtype=float) / safe, 0.0)

    def norm_ratio(self, u) -> float:
        p, q = self.exponents.p, self.exponents.q
        u = np.asarray(u, dtype=float)
        num = np.sum(self.matvec(u) ** q) ** (1.0 / q)
        den = np.sum(u ** p) ** (1.0 / p)
        return ratio(float(num), float(den))


def assemble_kernel(inst: DiscreteInstance, e: Exponents,
                    mode: str = STRICT) -> HardyKernel:
    """Weighted change of variables turning the inequality into an
    unweighted ``l^p -> l^q`` norm bound."""
    if not (e.p < math.inf and e.q < math.inf):
        raise ValueError("kernel assembly needs finite p and q")
    r, mass = row_nodes(inst, mode)
    cut = _counts(inst, r, mode).astype(np.int64)
    m3 = inst.mass3
    reach = int(cut.max()) if cut.size else 0
    bad = np.flatnonzero((inst.mu1 > 0) & (m3 == 0) & (np.arange(inst.size) < reach))
    if bad.size:
        i = int(bad[0])
        j = int(np.flatnonzero(cut > i)[0])
        raise UnboundedInstanceError(inst.ids[i], float(r[j]))
    with np.errstate(divide="ignore", invalid="ignore"):
        col_w = np.where(m3 > 0, inst.mu1 * m3 ** (-1.0 / e.p), 0.0)
    row_w = mass ** (1.0 / e.q)
    return HardyKernel(r, mass, cut, row_w, np.ascontiguousarray(col_w), m3, e,
                       mode, inst.ids)
