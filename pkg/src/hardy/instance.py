"""Problem data in representable form.

A :class:`DiscreteInstance` is a finite space X where each point carries a
level ``N(x)``, a mu1 weight, the density ``psi`` of the absolutely
continuous part of mu3, and a singular mu3 weight; mu2 is a
:class:`~hardy.measure.RealMeasure` on the level axis.  A
:class:`LineInstance` is the ``X = R`` case with piecewise data; it is turned
into a discrete instance by :func:`discretize`.
"""

import json
import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence, Union

import numpy as np

from .measure import MeasureError, RealMeasure, _frozen

IDENTITY = "identity"
REFLECTED = "reflected"


class InstanceError(ValueError):
    pass


class InstanceFormatError(InstanceError):
    """Base class for problems found while reading an instance document."""


class InstanceSyntaxError(InstanceFormatError):
    def __init__(self, msg, line, column):
        super().__init__(f"syntax error at line {line}, column {column}: {msg}")
        self.line = line
        self.column = column


class InstanceSemanticError(InstanceFormatError):
    def __init__(self, path, msg):
        super().__init__(f"{path}: {msg}")
        self.path = path


@dataclass(frozen=True, eq=False)
class DiscreteInstance:
    """Points sorted by ``(level, id)``; all arrays are read-only."""

    ids: tuple
    level: np.ndarray
    mu1: np.ndarray
    psi: np.ndarray
    singular: np.ndarray
    mu2: RealMeasure

    def __post_init__(self):
        ids = tuple(str(i) for i in self.ids)
        arrs = [np.asarray(a, dtype=float).ravel()
                for a in (self.level, self.mu1, self.psi, self.singular)]
        if any(a.shape != (len(ids),) for a in arrs):
            raise InstanceError("point arrays must all have one entry per id")
        level, mu1, psi, singular = arrs
        if len(set(ids)) != len(ids):
            raise InstanceError("point ids must be unique")
        if not np.all(np.isfinite(level)):
            raise InstanceError("levels must be finite")
        for name, a in (("mu1", mu1), ("psi", psi), ("singular", singular)):
            if not np.all(np.isfinite(a)) or np.any(a < 0):
                raise InstanceError(f"{name} weights must be finite and >= 0")
        order = sorted(range(len(ids)), key=lambda i: (level[i], ids[i]))
        object.__setattr__(self, "ids", tuple(ids[i] for i in order))
        for name, a in (("level", level), ("mu1", mu1), ("psi", psi),
                        ("singular", singular)):
            object.__setattr__(self, name, _frozen(a[order]))

    @classmethod
    def from_points(cls, points: Iterable, mu2: RealMeasure) -> "DiscreteInstance":
        """``points`` holds mappings with keys ``id, level, mu1`` and optional
        ``psi`` (default 1) and ``singular`` (default 0), or tuples in that
        order."""
        ids, level, mu1, psi, sing = [], [], [], [], []
        for pt in points:
            if isinstance(pt, Mapping):
                ids.append(pt["id"])
                level.append(pt["level"])
                mu1.append(pt.get("mu1", 1.0))
                psi.append(pt.get("psi", 1.0))
                sing.append(pt.get("singular", 0.0))
            else:
                pt = tuple(pt) + (1.0, 1.0, 0.0)[len(pt) - 2:]
                ids.append(pt[0])
                level.append(pt[1])
                mu1.append(pt[2])
                psi.append(pt[3])
                sing.append(pt[4])
        return cls(tuple(ids), level, mu1, psi, sing, mu2)

    @property
    def size(self) -> int:
        return len(self.ids)

    @property
    def mass3(self) -> np.ndarray:
        """mu3 mass of each point: ``psi * mu1 + singular``."""
        return self.psi * self.mu1 + self.singular

    def index(self, point_id: str) -> int:
        return self.ids.index(str(point_id))

    def with_mu2(self, mu2: RealMeasure) -> "DiscreteInstance":
        return DiscreteInstance(self.ids, self.level, self.mu1, self.psi,
                                self.singular, mu2)

    def scaled(self, mu2_factor: float = 1.0, psi_factor: float = 1.0):
        mu2 = RealMeasure(self.mu2.atom_loc, self.mu2.atom_mass * mu2_factor,
                          self.mu2.piece_lo, self.mu2.piece_hi,
                          self.mu2.piece_val * mu2_factor)
        return DiscreteInstance(self.ids, self.level, self.mu1,
                                self.psi * psi_factor, self.singular, mu2)

    def __eq__(self, other):
        if not isinstance(other, DiscreteInstance):
            return NotImplemented
        return (self.ids == other.ids and self.mu2 == other.mu2
                and all(np.array_equal(getattr(self, k), getattr(other, k))
                        for k in ("level", "mu1", "psi", "singular")))

    def __repr__(self):
        pts = ", ".join(f"{i}@{l:g}" for i, l in zip(self.ids, self.level))
        return f"DiscreteInstance([{pts}], mu2={self.mu2!r})"


class FunctionOnX:
    """Nonnegative values on the points of a discrete instance, stored in the
    instance's point order."""

    def __init__(self, ids: Sequence[str], values):
        values = np.asarray(values, dtype=float).ravel()
        if values.shape != (len(ids),):
            raise InstanceError("one value per point is required")
        if np.any(np.isnan(values)) or np.any(values < 0):
            raise InstanceError("function values must be nonnegative")
        self.ids = tuple(ids)
        self.values = _frozen(values)

    @classmethod
    def from_mapping(cls, inst: DiscreteInstance, values: Mapping) -> "FunctionOnX":
        missing = [i for i in inst.ids if i not in values]
        if missing:
            raise InstanceError(f"function has no value for point id {missing[0]!r}")
        return cls(inst.ids, [float(values[i]) for i in inst.ids])

    @classmethod
    def zeros(cls, inst: DiscreteInstance) -> "FunctionOnX":
        return cls(inst.ids, np.zeros(inst.size))

    def as_dict(self) -> dict:
        return dict(zip(self.ids, self.values.tolist()))

    def __mul__(self, lam: float) -> "FunctionOnX":
        return FunctionOnX(self.ids, self.values * lam)

    __rmul__ = __mul__

    def __repr__(self):
        return f"FunctionOnX({self.as_dict()})"


def values_of(inst: DiscreteInstance, f) -> np.ndarray:
    """Coerce a :class:`FunctionOnX`, mapping, or array to point-order values."""
    if isinstance(f, FunctionOnX):
        if f.ids != inst.ids:
            return FunctionOnX.from_mapping(inst, f.as_dict()).values
        return f.values
    if isinstance(f, Mapping):
        return FunctionOnX.from_mapping(inst, f).values
    return FunctionOnX(inst.ids, f).values


@dataclass(frozen=True, eq=False)
class LineInstance:
    """The ``X = R`` case.  ``psi`` is a tuple of disjoint ``(lo, hi, value)``
    pieces on ``[lo, hi)`` and equals 1 elsewhere.  ``reflected`` means the
    level function is ``N(x) = -x``."""

    mu1: RealMeasure
    mu2: RealMeasure
    psi: tuple = ()
    orientation: str = IDENTITY

    def __post_init__(self):
        if self.orientation not in (IDENTITY, REFLECTED):
            raise InstanceError(f"unknown orientation {self.orientation!r}")
        pieces = sorted(tuple(float(v) for v in pc) for pc in self.psi)
        for lo, hi, v in pieces:
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise InstanceError("psi pieces need finite lo < hi")
            if not (math.isfinite(v) and v >= 0):
                raise InstanceError("psi values must be finite and >= 0")
        for (_, hi, _), (lo, _, _) in zip(pieces, pieces[1:]):
            if hi > lo:
                raise InstanceError("psi pieces must be pairwise disjoint")
        object.__setattr__(self, "psi", tuple(pieces))

    def psi_at(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        out = np.ones_like(x)
        for lo, hi, v in self.psi:
            out = np.where((x >= lo) & (x < hi), v, out)
        return out

    def weighted_mu1(self, psi_power: float):
        """``psi^psi_power * mu1`` pushed to the level axis.

        Returns ``(nu, x_inf)`` where ``x_inf`` is the smallest level at
        which the weighted measure becomes infinite (None if it never does)
        and ``nu`` is its finite part below ``x_inf``.
        """
        mu1 = self.mu1
        psi_cuts = np.array([c for lo, hi, _ in self.psi for c in (lo, hi)])
        edges = np.unique(np.concatenate([mu1.piece_lo, mu1.piece_hi, psi_cuts]))
        a, b = edges[:-1], edges[1:]
        mid = 0.5 * (a + b)
        dens = np.zeros_like(mid)
        for lo, hi, v in mu1.density:
            dens = np.where((mid >= lo) & (mid < hi), v, dens)
        keep = dens > 0
        a, b, dens, mid = a[keep], b[keep], dens[keep], mid[keep]

        def weigh(psi_vals, base):
            # psi = 0: infinite weight for a negative power, 0 for power 0
            safe = np.where(psi_vals == 0, 1.0, psi_vals)
            zero_val = math.inf if psi_power < 0 else 0.0
            return base * np.where(psi_vals == 0, zero_val, safe ** psi_power)

        pv = weigh(self.psi_at(mid), dens)
        live_atoms = mu1.atom_mass > 0
        av = weigh(self.psi_at(mu1.atom_loc[live_atoms]), mu1.atom_mass[live_atoms])
        aloc = mu1.atom_loc[live_atoms]
        if self.orientation == REFLECTED:
            aloc = -aloc
            a, b = -b, -a
        inf_pts = np.concatenate([aloc[np.isinf(av)], a[np.isinf(pv)]])
        x_inf = float(inf_pts.min()) if inf_pts.size else None
        fa, fp = ~np.isinf(av), ~np.isinf(pv)
        nu = RealMeasure(aloc[fa], av[fa], a[fp], b[fp], pv[fp])
        if x_inf is not None:
            nu = nu.restricted(-math.inf, x_inf)
        return nu, x_inf


Instance = Union[DiscreteInstance, LineInstance]


# ---------------------------------------------------------------------------
# canonical instances


def build_discrete_hardy(p: float, n_max: int) -> DiscreteInstance:
    """Points ``1..n_max`` (counting measure, psi = 1) and
    ``mu2 = sum_n n^-p delta_{n+1}``."""
    if not p >= 1:
        raise InstanceError("p must be >= 1")
    if n_max < 1:
        raise InstanceError("n_max must be >= 1")
    k = np.arange(1, n_max + 1, dtype=float)
    mu2 = RealMeasure(k + 1.0, k ** (-float(p)), (), (), ())
    ones = np.ones(n_max)
    return DiscreteInstance(tuple(str(i) for i in range(1, n_max + 1)), k,
                            ones, ones, np.zeros(n_max), mu2)


def power_cell_masses(p: float, edges: np.ndarray) -> np.ndarray:
    """``int x^-p dx`` over each cell ``[edges[i], edges[i+1])``, edges > 0."""
    lo, hi = edges[:-1], edges[1:]
    if p == 1:
        return np.log(hi / lo)
    return (lo ** (1.0 - p) - hi ** (1.0 - p)) / (p - 1.0)


def build_continuous_hardy(p: float, delta: float, R: float, cells: int,
                           orientation: str = IDENTITY) -> LineInstance:
    """Lebesgue mu1 on ``[delta, R)`` and mu2 = ``x^-p dx`` lumped
    mass-exactly onto ``cells`` log-spaced cells.

    mu1 is stored on the same cell partition so that discretizing at
    resolution 1 yields one point per cell.
    """
    if not p >= 1:
        raise InstanceError("p must be >= 1")
    if not (0 < delta < R):
        raise InstanceError(f"need 0 < delta < R, got delta={delta}, R={R}")
    if cells < 1:
        raise InstanceError("cells must be >= 1")
    edges = np.geomspace(delta, R, cells + 1)
    edges[0], edges[-1] = delta, R
    masses = power_cell_masses(float(p), edges)
    width = np.diff(edges)
    mu2 = RealMeasure((), (), edges[:-1], edges[1:], masses / width)
    mu1 = RealMeasure((), (), edges[:-1], edges[1:], np.ones(cells))
    return LineInstance(mu1, mu2, (), orientation)


def build_conjugate_hardy(p: float, delta: float, R: float,
                          cells: int) -> LineInstance:
    """Dual Hardy inequality ``int (int_x^inf g)^p dx <= C^p int (t g)^p dt``
    on ``[delta, R)``, written with ``N(x) = -x``.

    mu1 is Lebesgue, psi approximates ``t^p`` (mass-exact per log cell) and
    mu2 is Lebesgue on the reflected range ``[-R, -delta)``, so the
    sublevel ``{N < r}`` at ``r = -x`` is ``{t > x}``.  The sharp constant
    of the untruncated inequality is ``p``.
    """
    if not p > 1:
        raise InstanceError("p must be > 1")
    if not (0 < delta < R):
        raise InstanceError(f"need 0 < delta < R, got delta={delta}, R={R}")
    if cells < 1:
        raise InstanceError("cells must be >= 1")
    edges = np.geomspace(delta, R, cells + 1)
    edges[0], edges[-1] = delta, R
    lo, hi = edges[:-1], edges[1:]
    psi_vals = (hi ** (p + 1.0) - lo ** (p + 1.0)) / ((p + 1.0) * (hi - lo))
    mu1 = RealMeasure((), (), lo, hi, np.ones(cells))
    mu2 = RealMeasure((), (), [-R], [-delta], [1.0])
    return LineInstance(mu1, mu2, tuple(zip(lo, hi, psi_vals)), REFLECTED)


# ---------------------------------------------------------------------------
# transformations


def reflect(inst: DiscreteInstance) -> DiscreteInstance:
    """Negate every level and push mu2 forward under ``r -> -r``."""
    return DiscreteInstance(inst.ids, -inst.level, inst.mu1, inst.psi,
                            inst.singular, inst.mu2.reflected())


def discretize(line: LineInstance, resolution: int) -> DiscreteInstance:
    """Lump mu1 onto points: each density piece is cut into ``resolution``
    equal subcells, each becoming a point at the subcell midpoint."""
    if resolution < 1:
        raise InstanceError("resolution must be >= 1")
    sign = -1.0 if line.orientation == REFLECTED else 1.0
    ids, level, mu1, psi = [], [], [], []
    for k, (x, m) in enumerate(line.mu1.atoms):
        ids.append(f"a{k}")
        level.append(sign * x)
        mu1.append(m)
        psi.append(float(line.psi_at(x)))
    lo, hi, val = line.mu1.piece_lo, line.mu1.piece_hi, line.mu1.piece_val
    t = (np.arange(resolution) + 0.5) / resolution
    mids = lo[:, None] + (hi - lo)[:, None] * t[None, :]
    weights = (val * (hi - lo) / resolution)[:, None] * np.ones(resolution)
    mids, weights = mids.ravel(), weights.ravel()
    width = len(str(max(mids.size - 1, 0)))
    ids.extend(f"c{k:0{width}d}" for k in range(mids.size))
    level.extend((sign * mids).tolist())
    mu1.extend(weights.tolist())
    psi.extend(line.psi_at(mids).tolist())
    n = len(ids)
    return DiscreteInstance(tuple(ids), level, mu1, psi, np.zeros(n), line.mu2)


# ---------------------------------------------------------------------------
# instance documents


def _fmt_number(x: float):
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if x == int(x) and abs(x) < 2 ** 53:
        return int(x)
    return float(x)


def _number(value, path, allow_inf=False, nonneg=False):
    if isinstance(value, bool):
        raise InstanceSemanticError(path, "expected a number")
    if isinstance(value, str):
        s = value.strip().lower()
        if s in ("inf", "+inf", "infinity", "+infinity"):
            x = math.inf
        elif s in ("-inf", "-infinity"):
            x = -math.inf
        else:
            raise InstanceSemanticError(path, f"expected a number or 'inf', got {value!r}")
    elif isinstance(value, (int, float)):
        x = float(value)
    else:
        raise InstanceSemanticError(path, "expected a number")
    if math.isnan(x):
        raise InstanceSemanticError(path, "NaN is not allowed")
    if math.isinf(x) and not allow_inf:
        raise InstanceSemanticError(path, "must be finite")
    if nonneg and x < 0:
        raise InstanceSemanticError(path, f"must be >= 0, got {x}")
    return x


def _list(value, path):
    if not isinstance(value, list):
        raise InstanceSemanticError(path, "expected a list")
    return value


def _pieces(value, path):
    out = []
    for k, item in enumerate(_list(value, path)):
        p = f"{path}[{k}]"
        if not isinstance(item, list) or len(item) != 3:
            raise InstanceSemanticError(p, "expected [lo, hi, value]")
        lo = _number(item[0], f"{p}[0]")
        hi = _number(item[1], f"{p}[1]")
        v = _number(item[2], f"{p}[2]", nonneg=True)
        if not lo < hi:
            raise InstanceSemanticError(p, "interval needs lo < hi")
        out.append((lo, hi, v))
    order = sorted(range(len(out)), key=lambda k: out[k][0])
    for a, b in zip(order, order[1:]):
        if out[a][1] > out[b][0]:
            raise InstanceSemanticError(f"{path}[{b}]",
                                        f"overlaps {path}[{a}]")
    return out


def _measure(value, path):
    if not isinstance(value, dict):
        raise InstanceSemanticError(path, "expected an object with 'atoms' and 'density'")
    unknown = set(value) - {"atoms", "density"}
    if unknown:
        raise InstanceSemanticError(f"{path}.{sorted(unknown)[0]}", "unknown field")
    atoms = []
    seen = {}
    for k, item in enumerate(_list(value.get("atoms", []), f"{path}.atoms")):
        p = f"{path}.atoms[{k}]"
        if not isinstance(item, list) or len(item) != 2:
            raise InstanceSemanticError(p, "expected [location, mass]")
        loc = _number(item[0], f"{p}[0]")
        mass = _number(item[1], f"{p}[1]", allow_inf=True, nonneg=True)
        if loc in seen:
            raise InstanceSemanticError(p, f"duplicate atom location (see {path}.atoms[{seen[loc]}])")
        seen[loc] = k
        atoms.append((loc, mass))
    density = _pieces(value.get("density", []), f"{path}.density")
    try:
        return RealMeasure.from_parts(atoms, density)
    except MeasureError as exc:
        raise InstanceSemanticError(path, str(exc)) from None


def instance_from_dict(doc) -> Instance:
    if not isinstance(doc, dict):
        raise InstanceSemanticError("$", "top level must be an object")
    kind = doc.get("kind")
    if kind == "discrete":
        allowed = {"kind", "points", "mu2"}
    elif kind == "line":
        allowed = {"kind", "mu1", "psi", "mu2", "orientation"}
    else:
        raise InstanceSemanticError("kind", f"expected 'discrete' or 'line', got {kind!r}")
    unknown = set(doc) - allowed
    if unknown:
        raise InstanceSemanticError(sorted(unknown)[0], "unknown field")
    mu2 = _measure(doc.get("mu2", {}), "mu2")
    if kind == "line":
        orientation = doc.get("orientation", IDENTITY)
        if orientation not in (IDENTITY, REFLECTED):
            raise InstanceSemanticError("orientation",
                                        f"expected 'identity' or 'reflected', got {orientation!r}")
        return LineInstance(_measure(doc.get("mu1", {}), "mu1"), mu2,
                            tuple(_pieces(doc.get("psi", []), "psi")), orientation)

    points = []
    seen = {}
    for k, pt in enumerate(_list(doc.get("points", []), "points")):
        path = f"points[{k}]"
        if not isinstance(pt, dict):
            raise InstanceSemanticError(path, "expected an object")
        unknown = set(pt) - {"id", "level", "mu1", "psi", "singular"}
        if unknown:
            raise InstanceSemanticError(f"{path}.{sorted(unknown)[0]}", "unknown field")
        if "id" not in pt:
            raise InstanceSemanticError(f"{path}.id", "missing")
        pid = pt["id"]
        if not isinstance(pid, (str, int)) or isinstance(pid, bool):
            raise InstanceSemanticError(f"{path}.id", "expected a string or integer")
        pid = str(pid)
        if pid in seen:
            raise InstanceSemanticError(f"{path}.id", f"duplicate id {pid!r} (see points[{seen[pid]}])")
        seen[pid] = k
        if "level" not in pt:
            raise InstanceSemanticError(f"{path}.level", "missing")
        points.append({
            "id": pid,
            "level": _number(pt["level"], f"{path}.level"),
            "mu1": _number(pt.get("mu1", 1.0), f"{path}.mu1", nonneg=True),
            "psi": _number(pt.get("psi", 1.0), f"{path}.psi", nonneg=True),
            "singular": _number(pt.get("singular", 0.0), f"{path}.singular", nonneg=True),
        })
    return DiscreteInstance.from_points(points, mu2)


def parse_instance(text: str) -> Instance:
    """Parse an instance document (JSON syntax)."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceSyntaxError(exc.msg, exc.lineno, exc.colno) from None
    return instance_from_dict(doc)


def load_instance(path) -> Instance:
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read())


def _measure_to_dict(mu: RealMeasure) -> dict:
    return {
        "atoms": [[_fmt_number(x), _fmt_number(m)] for x, m in mu.atoms],
        "density": [[_fmt_number(a), _fmt_number(b), _fmt_number(v)]
                    for a, b, v in mu.density],
    }


def instance_to_dict(inst: Instance) -> dict:
    if isinstance(inst, LineInstance):
        return {
            "kind": "line",
            "orientation": inst.orientation,
            "mu1": _measure_to_dict(inst.mu1),
            "psi": [[_fmt_number(a), _fmt_number(b), _fmt_number(v)]
                    for a, b, v in inst.psi],
            "mu2": _measure_to_dict(inst.mu2),
        }
    points = [
        {"id": i, "level": _fmt_number(l), "mu1": _fmt_number(w),
         "psi": _fmt_number(s), "singular": _fmt_number(g)}
        for i, l, w, s, g in zip(inst.ids, inst.level.tolist(), inst.mu1.tolist(),
                                 inst.psi.tolist(), inst.singular.tolist())
    ]
    return {"kind": "discrete", "points": points, "mu2": _measure_to_dict(inst.mu2)}


def dump_instance(inst: Instance, indent: Optional[int] = 2) -> str:
    return json.dumps(instance_to_dict(inst), indent=indent) + "\n"


def save_instance(inst: Instance, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_instance(inst))
