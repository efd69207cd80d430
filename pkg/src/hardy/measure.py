"""Positive measures on the real line: finitely many atoms plus
piecewise-constant densities on half-open intervals ``[a, b)``.

Also holds :class:`StepFunction`, the test functions integrated against
those measures, and the two dyadic atom-smoothing maps.
"""

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

CLOSED = "closed"
OPEN = "open"


class MeasureError(ValueError):
    pass


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _mul0(a, b):
    """Elementwise product with the convention 0 * inf = 0."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    with np.errstate(invalid="ignore"):
        out = a * b
    return np.where((a == 0) | (b == 0), 0.0, out)


@dataclass(frozen=True, eq=False)
class RealMeasure:
    """Atoms ``(location, mass)`` plus density pieces ``([lo, hi), value)``.

    Arrays are sorted by location and read-only.  Atom masses may be
    ``+inf`` (pathology tests only); density values must be finite.
    """

    atom_loc: np.ndarray
    atom_mass: np.ndarray
    piece_lo: np.ndarray
    piece_hi: np.ndarray
    piece_val: np.ndarray

    def __post_init__(self):
        loc = np.asarray(self.atom_loc, dtype=float).ravel()
        mass = np.asarray(self.atom_mass, dtype=float).ravel()
        lo = np.asarray(self.piece_lo, dtype=float).ravel()
        hi = np.asarray(self.piece_hi, dtype=float).ravel()
        val = np.asarray(self.piece_val, dtype=float).ravel()
        if loc.shape != mass.shape or not (lo.shape == hi.shape == val.shape):
            raise MeasureError("mismatched array lengths")
        if not np.all(np.isfinite(loc)):
            raise MeasureError("atom locations must be finite")
        if np.any(np.isnan(mass)) or np.any(mass < 0):
            raise MeasureError("atom masses must be nonnegative")
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise MeasureError("density pieces must have finite endpoints")
        if not np.all(np.isfinite(val)) or np.any(val < 0):
            raise MeasureError("density values must be finite and nonnegative")
        if np.any(lo >= hi):
            raise MeasureError("density pieces need lo < hi")
        order = np.argsort(loc, kind="stable")
        loc, mass = loc[order], mass[order]
        if np.any(np.diff(loc) == 0):
            raise MeasureError("atom locations must be pairwise distinct")
        order = np.argsort(lo, kind="stable")
        lo, hi, val = lo[order], hi[order], val[order]
        if np.any(hi[:-1] > lo[1:]):
            raise MeasureError("density pieces must be pairwise disjoint")
        for name, arr in (("atom_loc", loc), ("atom_mass", mass),
                          ("piece_lo", lo), ("piece_hi", hi),
                          ("piece_val", val)):
            object.__setattr__(self, name, _frozen(arr))

    @classmethod
    def from_parts(cls, atoms: Iterable[Sequence[float]] = (),
                   density: Iterable[Sequence[float]] = ()) -> "RealMeasure":
        """Build from ``[(loc, mass), ...]`` and ``[(lo, hi, value), ...]``."""
        atoms = [tuple(a) for a in atoms]
        density = [tuple(d) for d in density]
        loc = [a[0] for a in atoms]
        mass = [a[1] for a in atoms]
        lo = [d[0] for d in density]
        hi = [d[1] for d in density]
        val = [d[2] for d in density]
        return cls(loc, mass, lo, hi, val)

    @classmethod
    def zero(cls) -> "RealMeasure":
        return cls((), (), (), (), ())

    @property
    def atoms(self):
        return list(zip(self.atom_loc.tolist(), self.atom_mass.tolist()))

    @property
    def density(self):
        return list(zip(self.piece_lo.tolist(), self.piece_hi.tolist(),
                        self.piece_val.tolist()))

    @property
    def piece_mass(self) -> np.ndarray:
        return self.piece_val * (self.piece_hi - self.piece_lo)

    @property
    def is_atomic(self) -> bool:
        return not np.any(self.piece_val > 0)

    @property
    def is_diffuse(self) -> bool:
        return not np.any(self.atom_mass > 0)

    def total_mass(self) -> float:
        return float(np.sum(self.atom_mass) + np.sum(self.piece_mass))

    def breakpoints(self) -> np.ndarray:
        """Sorted atom locations and piece endpoints."""
        return np.unique(np.concatenate([self.atom_loc, self.piece_lo,
                                         self.piece_hi]))

    def __eq__(self, other):
        if not isinstance(other, RealMeasure):
            return NotImplemented
        return all(np.array_equal(getattr(self, k), getattr(other, k))
                   for k in ("atom_loc", "atom_mass", "piece_lo", "piece_hi",
                             "piece_val"))

    def __repr__(self):
        return f"RealMeasure(atoms={self.atoms}, density={self.density})"

    def reflected(self) -> "RealMeasure":
        """Image under ``r -> -r``.  Pieces ``(-hi, -lo]`` are stored as
        ``[-hi, -lo)``, which differs only on a null set."""
        return RealMeasure(-self.atom_loc, self.atom_mass, -self.piece_hi,
                           -self.piece_lo, self.piece_val)

    def restricted(self, lo: float, hi: float) -> "RealMeasure":
        """Restriction to ``[lo, hi)``."""
        keep = (self.atom_loc >= lo) & (self.atom_loc < hi)
        plo = np.maximum(self.piece_lo, lo)
        phi = np.minimum(self.piece_hi, hi)
        ok = plo < phi
        return RealMeasure(self.atom_loc[keep], self.atom_mass[keep],
                           plo[ok], phi[ok], self.piece_val[ok])


# ---------------------------------------------------------------------------
# tails and cumulative values


def _suffix(x):
    out = np.zeros(x.shape[0] + 1)
    out[:-1] = np.cumsum(x[::-1])[::-1]
    return out


def _prefix(x):
    out = np.zeros(x.shape[0] + 1)
    out[1:] = np.cumsum(x)
    return out


def tail_many(mu: RealMeasure, r, mode: str = CLOSED) -> np.ndarray:
    """Vectorized ``mu([r, inf))`` (closed) or ``mu((r, inf))`` (open)."""
    if mode not in (CLOSED, OPEN):
        raise ValueError(f"unknown tail mode {mode!r}")
    r = np.asarray(r, dtype=float)
    side = "left" if mode == CLOSED else "right"
    k = np.searchsorted(mu.atom_loc, r, side=side)
    out = _suffix(mu.atom_mass)[k]

    k = np.searchsorted(mu.piece_lo, r, side="left")
    out = out + _suffix(mu.piece_mass)[k]
    if mu.piece_lo.size:
        km = np.maximum(k - 1, 0)
        hi = mu.piece_hi[km]
        partial = np.where((k > 0) & (hi > r),
                           mu.piece_val[km] * (hi - r), 0.0)
        out = out + partial
    return out


def cdf_many(mu: RealMeasure, r, closed: bool = False) -> np.ndarray:
    """Vectorized ``mu((-inf, r))``, or ``mu((-inf, r])`` if ``closed``."""
    r = np.asarray(r, dtype=float)
    k = np.searchsorted(mu.atom_loc, r, side="right" if closed else "left")
    out = _prefix(mu.atom_mass)[k]

    # pieces entirely below r
    k = np.searchsorted(mu.piece_hi, r, side="right")
    out = out + _prefix(mu.piece_mass)[k]
    if mu.piece_lo.size:
        kk = np.minimum(k, mu.piece_lo.size - 1)
        lo = mu.piece_lo[kk]
        partial = np.where((k < mu.piece_lo.size) & (lo < r),
                           mu.piece_val[kk] * (r - lo), 0.0)
        out = out + partial
    return out


def tail(mu: RealMeasure, r: float, mode: str = CLOSED) -> float:
    """``mu([r, inf))`` in closed mode, ``mu((r, inf))`` in open mode."""
    return float(tail_many(mu, r, mode))


def cdf_strict(mu: RealMeasure, r: float) -> float:
    """``mu((-inf, r))``."""
    return float(cdf_many(mu, r))


# ---------------------------------------------------------------------------
# step functions


LEFT = "left"
RIGHT = "right"


@dataclass(frozen=True, eq=False)
class StepFunction:
    """Finitely many constant pieces.

    ``values[i]`` is the value on the open interval between
    ``breakpoints[i-1]`` and ``breakpoints[i]`` (unbounded at both ends), so
    there is one more value than breakpoints.  At a breakpoint the function
    takes the value of its left neighbour if ``sides[i] == "left"``
    (left-continuous there) and of its right neighbour otherwise.
    """

    breakpoints: np.ndarray
    values: np.ndarray
    sides: tuple

    def __post_init__(self):
        bp = np.asarray(self.breakpoints, dtype=float).ravel()
        vals = np.asarray(self.values, dtype=float).ravel()
        sides = tuple(self.sides)
        if vals.shape[0] != bp.shape[0] + 1:
            raise ValueError("need exactly one more value than breakpoints")
        if len(sides) != bp.shape[0]:
            raise ValueError("need one continuity side per breakpoint")
        if any(s not in (LEFT, RIGHT) for s in sides):
            raise ValueError("sides must be 'left' or 'right'")
        if not np.all(np.isfinite(bp)) or np.any(np.diff(bp) <= 0):
            raise ValueError("breakpoints must be finite and strictly increasing")
        if np.any(np.isnan(vals)):
            raise ValueError("values must not be NaN")
        object.__setattr__(self, "breakpoints", _frozen(bp))
        object.__setattr__(self, "values", _frozen(vals))
        object.__setattr__(self, "sides", sides)

    @classmethod
    def constant(cls, c: float) -> "StepFunction":
        return cls((), (c,), ())

    @classmethod
    def indicator(cls, lo: float, hi: float, lo_closed: bool = False,
                  hi_closed: bool = True) -> "StepFunction":
        """Indicator of an interval; ``lo``/``hi`` may be infinite."""
        bps, vals, sides = [], [0.0 if np.isfinite(lo) else 1.0], []
        if np.isfinite(lo):
            bps.append(lo)
            sides.append(RIGHT if lo_closed else LEFT)
            vals.append(1.0)
        if np.isfinite(hi):
            bps.append(hi)
            sides.append(LEFT if hi_closed else RIGHT)
            vals.append(0.0)
        return cls(bps, vals, sides)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        i = np.searchsorted(self.breakpoints, x, side="left")
        out = self.values[i]
        if self.breakpoints.size:
            ic = np.minimum(i, self.breakpoints.size - 1)
            on_bp = (i < self.breakpoints.size) & (self.breakpoints[ic] == x)
            right = np.array([s == RIGHT for s in self.sides])[ic]
            out = np.where(on_bp & right, self.values[np.minimum(i + 1,
                           self.values.size - 1)], out)
        return out if out.ndim else float(out)

    @property
    def left_continuous(self) -> bool:
        return all(s == LEFT for s in self.sides)

    @property
    def right_continuous(self) -> bool:
        return all(s == RIGHT for s in self.sides)

    def is_nonincreasing(self) -> bool:
        return bool(np.all(np.diff(self.values) <= 0))

    def is_nondecreasing(self) -> bool:
        return bool(np.all(np.diff(self.values) >= 0))

    def integral(self, lo: float, hi: float) -> float:
        """Lebesgue integral over ``[lo, hi)`` (finite endpoints)."""
        if hi <= lo:
            return 0.0
        inner = self.breakpoints[(self.breakpoints > lo) & (self.breakpoints < hi)]
        edges = np.concatenate(([lo], inner, [hi]))
        idx = np.searchsorted(self.breakpoints, edges[:-1], side="right")
        return float(np.sum(_mul0(self.values[idx], np.diff(edges))))


def integrate_step(mu: RealMeasure, f: StepFunction) -> float:
    """Exact integral of a step function against ``mu``."""
    total = float(np.sum(_mul0(f(mu.atom_loc), mu.atom_mass)))
    for lo, hi, val in zip(mu.piece_lo, mu.piece_hi, mu.piece_val):
        if val > 0:
            total += val * f.integral(lo, hi)
    return total


# ---------------------------------------------------------------------------
# atom smoothing


def _merge_pieces(lo, hi, val):
    """Refine overlapping pieces to a disjoint partition, summing densities."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    val = np.asarray(val, dtype=float)
    if lo.size == 0:
        return lo, hi, val
    edges = np.unique(np.concatenate([lo, hi]))
    a, b = edges[:-1], edges[1:]
    cover = (lo[None, :] <= a[:, None]) & (hi[None, :] >= b[:, None])
    dens = np.where(cover, val[None, :], 0.0).sum(axis=1)
    keep = dens > 0
    return a[keep], b[keep], dens[keep]


def _smooth(mu: RealMeasure, n: int, to_right: bool) -> RealMeasure:
    if n < 0:
        raise ValueError("n must be a nonnegative integer")
    if np.any(np.isinf(mu.atom_mass)):
        raise MeasureError("atom smoothing needs a finite measure")
    live = mu.atom_mass > 0
    if not np.any(live):
        return mu
    width = 2.0 ** (-n)
    loc = mu.atom_loc[live]
    dens = mu.atom_mass[live] * 2.0 ** n
    if to_right:
        new_lo, new_hi = loc, loc + width
    else:
        new_lo, new_hi = loc - width, loc
    lo, hi, val = _merge_pieces(np.concatenate([mu.piece_lo, new_lo]),
                                np.concatenate([mu.piece_hi, new_hi]),
                                np.concatenate([mu.piece_val, dens]))
    return RealMeasure((), (), lo, hi, val)


def smooth_atoms_right(mu: RealMeasure, n: int) -> RealMeasure:
    """Replace each atom ``(r, m)`` by density ``m 2^n`` on ``[r, r + 2^-n)``."""
    return _smooth(mu, n, to_right=True)


def smooth_atoms_left(mu: RealMeasure, n: int) -> RealMeasure:
    """Replace each atom ``(r, m)`` by density ``m 2^n`` on ``[r - 2^-n, r)``."""
    return _smooth(mu, n, to_right=False)


def probe_grid(*measures: RealMeasure, extra=()) -> np.ndarray:
    """Breakpoints of the given measures, each shifted by +-2^-20, plus
    midpoints between consecutive breakpoints."""
    bps = np.unique(np.concatenate([m.breakpoints() for m in measures]
                                   + [np.asarray(extra, dtype=float)]))
    if bps.size == 0:
        return np.array([0.0])
    h = 2.0 ** -20
    mids = 0.5 * (bps[:-1] + bps[1:])
    return np.unique(np.concatenate([bps, bps - h, bps + h, mids,
                                     [bps[0] - 1.0, bps[-1] + 1.0]]))
