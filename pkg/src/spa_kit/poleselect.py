"""Approximating pole selections and their geometry.

The Archimedes spiral selection places ``m`` poles at

    theta_k = 2 sqrt(pi k),  r_k = sqrt(k / (m/2 + 1)),  p_{+-k} = r_k exp(+-i theta_k)

for ``k = 1 .. m/2``. All of them lie on the spiral ``r = c_m theta`` whose
windings are ``2 pi c_m`` apart.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np
from scipy.spatial import cKDTree

from . import _kernels
from .errors import InvalidCount, InvariantError, NotEnoughPoles, SchemaError, UnstablePole
from .tfcore import POLE_TOL, RationalSystem, parse_complex, parse_json

__all__ = [
    "PoleSelection",
    "AssignmentTable",
    "AssumptionAudit",
    "SpiralGeometryReport",
    "spiral_poles",
    "spiral_sequence",
    "winding_constant",
    "nearest_poles",
    "coverage_distance",
    "check_assumptions",
    "augment",
    "disk_coverage",
    "polar_grid",
    "spiral_geometry_check",
]


class PoleSelection:
    """Distinct approximating poles in the open unit disk, closed under
    conjugation.

    ``provenance[i]`` is ``"spiral:k"`` (signed index), ``"prior"`` or
    ``"manual"``.
    """

    __slots__ = ("poles", "provenance", "_conj_index")

    def __init__(self, poles: Iterable, provenance: Sequence[str] | None = None):
        p = np.array([complex(x) for x in poles], dtype=complex)
        if provenance is None:
            provenance = ["manual"] * len(p)
        provenance = tuple(str(s) for s in provenance)
        if len(provenance) != len(p):
            raise InvariantError("provenance must have one entry per pole")
        if not np.all(np.isfinite(p)):
            raise InvariantError("non-finite pole")
        bad = np.abs(p) >= 1.0
        if np.any(bad):
            raise UnstablePole(f"pole {p[bad][0]} is not inside the open unit disk")
        if len(p) > 1:
            close = cKDTree(_xy(p)).query_pairs(POLE_TOL)
            if close:
                i, j = min(close)
                raise InvariantError(f"poles {p[i]} and {p[j]} are not distinct")
        conj = _conjugate_index(p)
        if np.any(conj < 0):
            raise InvariantError(f"A3: conjugate of pole {p[conj < 0][0]} is missing")
        p.setflags(write=False)
        conj.setflags(write=False)
        object.__setattr__(self, "poles", p)
        object.__setattr__(self, "provenance", provenance)
        object.__setattr__(self, "_conj_index", conj)

    def __setattr__(self, name, value):
        raise AttributeError("PoleSelection is immutable")

    def __len__(self):
        return len(self.poles)

    def __iter__(self):
        return iter(self.poles)

    def __eq__(self, other):
        if not isinstance(other, PoleSelection):
            return NotImplemented
        return np.array_equal(self.poles, other.poles) and self.provenance == other.provenance

    def __hash__(self):
        return hash((self.poles.tobytes(), self.provenance))

    def __repr__(self):
        return f"PoleSelection({len(self)} poles, r={self.radius:.4g})"

    @property
    def radius(self) -> float:
        return float(np.abs(self.poles).max()) if len(self) else 0.0

    @property
    def conj_index(self) -> np.ndarray:
        """``conj_index[i]`` is the index of ``conj(poles[i])``."""
        return self._conj_index

    def to_dict(self) -> dict:
        return {"poles": [[p.real, p.imag] for p in self.poles],
                "provenance": list(self.provenance)}

    def dumps(self, **kw) -> str:
        return json.dumps(self.to_dict(), allow_nan=False, **kw)

    @classmethod
    def from_dict(cls, doc) -> "PoleSelection":
        if isinstance(doc, (str, bytes)):
            doc = parse_json(doc)
        if not isinstance(doc, dict) or "poles" not in doc:
            raise SchemaError("pole selection: missing field 'poles'")
        raw = doc["poles"]
        if not isinstance(raw, list):
            raise SchemaError("poles: expected a list")
        poles = [parse_complex(v, f"poles[{i}]") for i, v in enumerate(raw)]
        prov = doc.get("provenance")
        if prov is not None and (not isinstance(prov, list)
                                 or not all(isinstance(s, str) for s in prov)):
            raise SchemaError("provenance: expected a list of strings")
        return cls(poles, prov)


def _xy(p: np.ndarray) -> np.ndarray:
    return np.column_stack([p.real, p.imag])


def _conjugate_index(p: np.ndarray) -> np.ndarray:
    idx = np.full(len(p), -1, dtype=np.int64)
    if not len(p):
        return idx
    d, j = cKDTree(_xy(p)).query(_xy(np.conj(p)))
    ok = d <= POLE_TOL
    idx[ok] = j[ok]
    return idx


# spiral -------------------------------------------------------------------


def winding_constant(m: int) -> float:
    """``c_m`` such that the ``m``-pole selection lies on ``r = c_m theta``."""
    _check_even(m)
    return 1.0 / (2.0 * math.sqrt(math.pi * (m + 2) / 2.0))


def _check_even(m):
    if isinstance(m, bool) or int(m) != m or m < 2 or m % 2:
        raise InvalidCount(f"m must be even and >= 2, got {m}")


def spiral_poles(m: int) -> PoleSelection:
    """The ``m`` Archimedes spiral poles, ordered ``p_1, p_-1, p_2, p_-2, ...``."""
    _check_even(m)
    return _spiral_poles(int(m))


@lru_cache(maxsize=1024)
def _spiral_poles(m: int) -> PoleSelection:
    half = m // 2
    k = np.arange(1, half + 1)
    theta = 2.0 * np.sqrt(np.pi * k)
    r = np.sqrt(k / (half + 1.0))
    p = r * np.exp(1j * theta)
    poles = np.empty(m, dtype=complex)
    poles[0::2] = p
    poles[1::2] = np.conj(p)
    prov = [f"spiral:{s * kk}" for kk in k for s in (1, -1)]
    return PoleSelection(poles, prov)


def spiral_sequence(n: int) -> PoleSelection:
    """The n-th member of the spiral sequence: ``2n - 2`` poles."""
    if isinstance(n, bool) or int(n) != n or n < 2:
        raise InvalidCount(f"n must be an integer >= 2, got {n}")
    return spiral_poles(2 * int(n) - 2)


# assignment ---------------------------------------------------------------


def _nearest_indices(P: PoleSelection, q: complex, j: int) -> np.ndarray:
    if len(P) < j:
        raise NotEnoughPoles(len(P), j)
    q = complex(q)
    if q.imag < 0:
        return P.conj_index[_nearest_indices(P, q.conjugate(), j)]
    d = np.abs(P.poles - q)
    order = np.lexsort((P.poles.imag, P.poles.real, d))
    return order[:j]


def nearest_poles(P: PoleSelection, q, j: int) -> np.ndarray:
    """The ``j`` poles of ``P`` closest to ``q``, nearest first.

    Ties are broken by ``(distance, Re p, Im p)``. For ``Im q < 0`` the
    result is the conjugate of the answer for ``conj(q)``, which keeps
    assignments of conjugate poles mirror images of each other.
    """
    return P.poles[_nearest_indices(P, q, j)]


@dataclass(frozen=True)
class AssignmentTable:
    """Nearest-pole assignment of every source pole.

    ``indices[i]`` lists, nearest first, the indices into ``selection`` of the
    ``m_q`` poles assigned to ``source_poles[i]``; the assignment for order
    ``j`` is its first ``j`` entries.
    """

    selection: PoleSelection
    source_poles: np.ndarray
    multiplicities: tuple
    indices: tuple
    d_hat: np.ndarray
    D: float

    def assigned(self, i: int, j: int | None = None) -> np.ndarray:
        idx = self.indices[i] if j is None else self.indices[i][:j]
        return self.selection.poles[idx]

    def used_indices(self) -> np.ndarray:
        """Indices of every pole used by some assignment or its mirror."""
        if not self.indices:
            return np.zeros(0, dtype=np.int64)
        idx = np.concatenate(self.indices)
        return np.unique(np.concatenate([idx, self.selection.conj_index[idx]]))


def coverage_distance(P: PoleSelection, S: RationalSystem) -> AssignmentTable:
    """Assign to each pole ``q`` of ``S`` its ``m_q`` nearest poles of ``P``
    and compute ``d_hat(q)`` and ``D(P) = max_q d_hat(q)``."""
    if len(P) < S.m_max:
        raise NotEnoughPoles(len(P), S.m_max)
    indices, d_hat = [], []
    for t in S.terms:
        idx = _nearest_indices(P, t.pole, t.multiplicity)
        indices.append(idx)
        d_hat.append(float(np.abs(P.poles[idx] - t.pole).max()))
    d_hat = np.array(d_hat)
    return AssignmentTable(
        selection=P,
        source_poles=S.poles,
        multiplicities=tuple(S.multiplicities),
        indices=tuple(indices),
        d_hat=d_hat,
        D=float(d_hat.max()) if len(d_hat) else 0.0,
    )


# assumptions --------------------------------------------------------------


@dataclass(frozen=True)
class AssumptionAudit:
    """Outcome of checking A1-A5 for a selection against a system.

    ``a5`` and ``delta`` are ``None`` when no plant poles were supplied (or,
    for ``delta``, when no plant pole differs from every source pole).
    """

    a1: bool
    a2: bool
    a3: bool
    a4: bool
    a5: bool | None
    r: float
    m_max: int
    num_poles: int
    D: float | None
    delta: float | None
    details: dict = field(default_factory=dict)

    @property
    def core_passed(self) -> bool:
        """A1-A4, the hypotheses of the approximation bound."""
        return self.a1 and self.a2 and self.a3 and self.a4

    @property
    def passed(self) -> bool:
        return self.core_passed and self.a5 is not False

    def failures(self) -> list[str]:
        names = ("A1", "A2", "A3", "A4", "A5")
        flags = (self.a1, self.a2, self.a3, self.a4, self.a5)
        return [f"{n}: {self.details[n]}" for n, ok in zip(names, flags) if ok is False]

    def to_dict(self) -> dict:
        return {"A1": self.a1, "A2": self.a2, "A3": self.a3, "A4": self.a4, "A5": self.a5,
                "r": self.r, "m_max": self.m_max, "num_poles": self.num_poles,
                "D": self.D, "delta": self.delta,
                "details": dict(self.details)}


def check_assumptions(P, S: RationalSystem, sigma=None) -> AssumptionAudit:
    """Audit A1-A5 for the selection ``P`` (a PoleSelection or any pole list)
    against the poles of ``S`` and, optionally, plant poles ``sigma``."""
    raw = np.array(list(P.poles if isinstance(P, PoleSelection) else P), dtype=complex)
    details = {}
    r = float(np.abs(raw).max()) if len(raw) else 0.0
    a1 = bool(len(raw)) and r < 1.0
    details["A1"] = f"r = max|p| = {r:.6g}" + ("" if a1 else " (need r < 1)")
    m_max = S.m_max
    a2 = len(raw) >= m_max
    details["A2"] = f"|P| = {len(raw)}, m_max = {m_max}"
    conj = _conjugate_index(raw)
    a3 = bool(np.all(conj >= 0))
    details["A3"] = ("closed under conjugation" if a3
                     else f"conjugate of {raw[conj < 0][0]} missing")
    table = None
    if a1 and a2 and a3:
        try:
            Psel = P if isinstance(P, PoleSelection) else PoleSelection(raw)
            table = coverage_distance(Psel, S)
        except InvariantError as exc:
            details["A3"] = str(exc)
            a3 = False
    if table is None:
        D, a4 = None, False
        details["A4"] = "D(P) undefined (A1-A3 must hold)"
    else:
        D = table.D
        a4 = D < 1.0
        details["A4"] = f"D = {D:.6g}" + (" < 1" if a4 else " ≥ 1")
    a5, delta = None, None
    if sigma is not None:
        sigma = [complex(x) for x in sigma]
        if table is None:
            a5 = False
            details["A5"] = "assignment undefined (A1-A3 must hold)"
        else:
            a5 = True
            details["A5"] = "plant poles avoid every assignment"
            dmin = math.inf
            for q, idx in zip(table.source_poles, table.indices):
                assigned = table.selection.poles[idx]
                for lam in sigma:
                    if abs(lam - q) <= POLE_TOL:
                        continue
                    d = float(np.abs(assigned - lam).min())
                    dmin = min(dmin, d)
                    if d <= POLE_TOL and a5:
                        a5 = False
                        details["A5"] = f"plant pole {lam} is assigned to source pole {q}"
            delta = None if dmin == math.inf else dmin
            if a5 and delta is not None:
                details["A5"] += f", delta = {delta:.6g}"
    return AssumptionAudit(a1=a1, a2=a2, a3=a3, a4=a4, a5=a5, r=r, m_max=m_max,
                           num_poles=len(raw), D=D, delta=delta, details=details)


# augmentation -------------------------------------------------------------


def augment(P: PoleSelection, extra) -> PoleSelection:
    """Add prior poles (plant poles, known optimal poles) and their
    conjugates. Poles already present within 1e-12 are not duplicated; the
    existing copy is relabelled ``prior``."""
    poles = list(P.poles)
    prov = list(P.provenance)
    for x in extra:
        x = complex(x)
        if not (math.isfinite(x.real) and math.isfinite(x.imag)) or abs(x) >= 1.0:
            raise UnstablePole(f"prior pole {x} is not inside the open unit disk")
        for y in ([x] if x.imag == 0 else [x, x.conjugate()]):
            for i, p in enumerate(poles):
                if abs(p - y) <= POLE_TOL:
                    prov[i] = "prior"
                    break
            else:
                poles.append(y)
                prov.append("prior")
    return PoleSelection(poles, prov)


# disk geometry ------------------------------------------------------------


def polar_grid(step: float, closed: bool = True) -> np.ndarray:
    """Points ``r e^{i phi}`` with radial and angular spacing at most ``step``.

    ``closed`` includes the unit circle; otherwise radii stop below 1.
    """
    if closed:
        radii = np.linspace(0.0, 1.0, math.ceil(1.0 / step) + 1)
    else:
        radii = np.arange(0.0, 1.0, step)
        radii = radii[radii < 1.0]
    n_ang = math.ceil(2.0 * math.pi / step)
    phi = np.arange(n_ang) * (2.0 * math.pi / n_ang)
    pts = radii[1:, None] * np.exp(1j * phi[None, :])
    return np.concatenate([[0j], pts.ravel()])


def disk_coverage(P: PoleSelection, grid_step: float = 0.01) -> float:
    """``max_z d(z, P)`` over a polar grid of the closed unit disk, a grid
    surrogate for how far the selection is from filling the disk."""
    if not 0 < grid_step <= 0.1:
        raise ValueError("grid_step must be in (0, 0.1]")
    poles = P.poles if isinstance(P, PoleSelection) else np.asarray(list(P), dtype=complex)
    return float(_kernels.min_dist(polar_grid(grid_step), poles).max())


@dataclass(frozen=True)
class SpiralGeometryReport:
    m: int
    winding_gap: float
    max_successive_gap: float
    conjugate_gap: float
    worst_grid_distance: float
    worst_grid_point: complex
    gaps_passed: bool
    grid_passed: bool

    @property
    def passed(self) -> bool:
        return self.gaps_passed and self.grid_passed

    @property
    def gap_margin(self) -> float:
        return self.winding_gap - max(self.max_successive_gap, self.conjugate_gap)

    @property
    def grid_margin(self) -> float:
        return 2.0 * self.winding_gap - self.worst_grid_distance


def spiral_geometry_check(m: int, grid_step: float = 0.01) -> SpiralGeometryReport:
    """Check the spiral spacing facts for the ``m``-pole selection.

    (i) successive poles, and ``p_1, p_-1``, are closer than ``2 pi c_m``;
    (ii) every grid point ``z`` of the open disk has some ``p_k``, ``k >= 1``,
    within ``4 pi c_m`` with ``|p_k| <= |z|`` or ``k = 1``.
    """
    _check_even(m)
    gap = 2.0 * math.pi * winding_constant(m)
    upper = spiral_poles(m).poles[0::2]
    succ = float(np.abs(np.diff(upper)).max()) if len(upper) > 1 else 0.0
    cgap = float(abs(upper[0] - upper[0].conjugate()))
    z = polar_grid(grid_step, closed=False)
    d = _kernels.min_dist(z, upper, limit_radius=True)
    i = int(np.argmax(d))
    return SpiralGeometryReport(
        m=m, winding_gap=gap, max_successive_gap=succ, conjugate_gap=cgap,
        worst_grid_distance=float(d[i]), worst_grid_point=complex(z[i]),
        gaps_passed=succ < gap and cgap < gap, grid_passed=bool(d[i] < 2.0 * gap),
    )
