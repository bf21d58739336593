"""Transfer functions in partial-fraction form.

A strictly proper, stable, discrete-time transfer function is stored as

    S(z) = sum_q sum_{j=1}^{m_q} C_(q,j) / (z - q)**j

with complex ``n x m`` coefficient matrices. Everything downstream (norms,
pole assignment, the simple pole approximation) works on this form.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from numbers import Real
from typing import Iterable, Sequence

import numpy as np
from scipy.special import gammaln

from . import _kernels
from .errors import (
    DimensionMismatch,
    EvaluationAtPole,
    InvariantError,
    NotReal,
    SchemaError,
    TruncationOverflow,
    UnstablePole,
)

POLE_TOL = 1e-12
REAL_TOL = 1e-9
CLUSTER_RADIUS = 1e-7
T_CAP = 2_000_000

__all__ = [
    "PoleTerm",
    "RationalSystem",
    "ImpulseTruncation",
    "RealnessReport",
    "evaluate",
    "impulse_response",
    "check_realness",
    "serialize",
    "deserialize",
    "dumps",
    "loads",
    "tail_norm_bound",
    "truncation_length",
]


def _frozen(a):
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


def _check_finite_complex(z, what):
    z = complex(z)
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise InvariantError(f"{what} is not finite: {z!r}")
    return z


class PoleTerm:
    """One pole ``q`` with its coefficient matrices ``C_(q,1) .. C_(q,m_q)``."""

    __slots__ = ("pole", "coefficients")

    def __init__(self, pole, coefficients: Sequence):
        q = _check_finite_complex(pole, "pole")
        if not abs(q) < 1.0:
            raise UnstablePole(f"pole {q} is not inside the open unit disk (|q| = {abs(q)!r})")
        mats = [np.atleast_2d(np.asarray(c, dtype=complex)) for c in coefficients]
        if not mats:
            raise InvariantError(f"pole {q} has no coefficients")
        shape = mats[0].shape
        for c in mats:
            if c.ndim != 2 or c.shape != shape:
                raise InvariantError(f"pole {q}: coefficient matrices must share one 2-D shape")
            if not np.all(np.isfinite(c)):
                raise InvariantError(f"pole {q}: non-finite coefficient")
        if not np.any(mats[-1]):
            raise InvariantError(f"pole {q}: top coefficient C_(q,{len(mats)}) is zero")
        object.__setattr__(self, "pole", q)
        object.__setattr__(self, "coefficients", tuple(_frozen(c) for c in mats))

    def __setattr__(self, name, value):
        raise AttributeError("PoleTerm is immutable")

    @property
    def multiplicity(self) -> int:
        return len(self.coefficients)

    @property
    def shape(self):
        return self.coefficients[0].shape

    def __eq__(self, other):
        if not isinstance(other, PoleTerm):
            return NotImplemented
        return (self.pole == other.pole and self.multiplicity == other.multiplicity
                and all(np.array_equal(a, b)
                        for a, b in zip(self.coefficients, other.coefficients)))

    def __hash__(self):
        return hash((self.pole, self.multiplicity))

    def __repr__(self):
        return f"PoleTerm(pole={self.pole!r}, multiplicity={self.multiplicity})"


class RationalSystem:
    """Immutable partial-fraction transfer function.

    Parameters
    ----------
    terms : iterable of PoleTerm or (pole, [C_1, ..., C_m]) pairs
        Poles must be pairwise distinct and inside the open unit disk.
    dims : (int, int), optional
        Output/input dimensions. Required when ``terms`` is empty.

    Structural invariants (finiteness, stability, distinct poles, exact
    multiplicity, consistent shapes) are enforced here. Conjugate closure is
    audited by :func:`check_realness` and enforced by :func:`deserialize`
    and the approximation routines, so that non-real systems can still be
    built and inspected.
    """

    __slots__ = ("terms", "dims", "_flat")

    def __init__(self, terms: Iterable = (), dims=None):
        built = []
        for t in terms:
            if not isinstance(t, PoleTerm):
                q, mats = t
                t = PoleTerm(q, mats)
            built.append(t)
        if dims is None:
            if not built:
                raise InvariantError("dims are required for a system without terms")
            dims = built[0].shape
        dims = tuple(int(d) for d in dims)
        if len(dims) != 2 or min(dims) < 1:
            raise InvariantError(f"dims must be two positive integers, got {dims}")
        for t in built:
            if t.shape != dims:
                raise DimensionMismatch(
                    f"pole {t.pole}: coefficients are {t.shape}, system is {dims}")
        poles = np.array([t.pole for t in built], dtype=complex)
        if len(poles) > 1:
            gaps = np.abs(poles[:, None] - poles[None, :]) + np.eye(len(poles)) * 10
            if gaps.min() <= POLE_TOL:
                i, j = np.unravel_index(np.argmin(gaps), gaps.shape)
                raise InvariantError(f"poles {poles[i]} and {poles[j]} are not distinct")
        object.__setattr__(self, "terms", tuple(built))
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "_flat", None)

    def __setattr__(self, name, value):
        raise AttributeError("RationalSystem is immutable")

    # constructors -----------------------------------------------------

    @classmethod
    def zero(cls, dims=(1, 1)):
        return cls((), dims=dims)

    @classmethod
    def from_simple_poles(cls, poles, gains, dims=None):
        """``sum_p G_p / (z - p)``; zero gains are dropped."""
        terms = []
        for p, g in zip(poles, gains):
            g = np.atleast_2d(np.asarray(g, dtype=complex))
            if dims is None:
                dims = g.shape
            if np.any(g):
                terms.append((p, [g]))
        return cls(terms, dims=dims)

    @classmethod
    def from_polynomials(cls, num, den, cluster_radius=CLUSTER_RADIUS):
        """Partial-fraction form of the SISO ratio ``num(z) / den(z)``.

        Coefficients are in descending powers (numpy convention). Roots of
        ``den`` come from the companion matrix and are merged into repeated
        poles when closer than ``cluster_radius``; the merged pole is the
        cluster mean. Repeated roots are ill-conditioned, so expect residue
        errors of order ``sqrt(eps)`` or worse for high multiplicities.
        """
        num = np.trim_zeros(np.atleast_1d(np.asarray(num, dtype=float)), "f")
        den = np.trim_zeros(np.atleast_1d(np.asarray(den, dtype=float)), "f")
        if den.size < 2:
            raise InvariantError("denominator must have degree >= 1")
        if num.size == 0:
            return cls.zero((1, 1))
        if num.size >= den.size:
            raise InvariantError("num/den is not strictly proper")
        clusters = _cluster_roots(np.roots(den), cluster_radius)
        lead = den[0]
        upper = [(q, m) for q, m in clusters if q.imag >= 0]
        terms = {}
        for q, m in upper:
            others = [(r, k) for r, k in clusters if r != q]
            rest = np.array([lead], dtype=complex)
            for r, k in others:
                rest = np.polymul(rest, np.poly([r] * k))
            g = _series_divide(_taylor(num, q, m), _taylor(rest, q, m), m)
            coeffs = [g[m - j] for j in range(1, m + 1)]
            if q.imag == 0:
                coeffs = [c.real for c in coeffs]
            terms[q] = coeffs
            if q.imag > 0:
                terms[q.conjugate()] = [np.conj(c) for c in coeffs]
        items = []
        for q, m in clusters:
            coeffs = list(terms[q])
            while coeffs and coeffs[-1] == 0:
                coeffs.pop()
            if coeffs:
                items.append((q, [[[c]] for c in coeffs]))
        return cls(items, dims=(1, 1))

    # accessors --------------------------------------------------------

    @property
    def poles(self) -> np.ndarray:
        return np.array([t.pole for t in self.terms], dtype=complex)

    @property
    def multiplicities(self) -> list[int]:
        return [t.multiplicity for t in self.terms]

    @property
    def m_max(self) -> int:
        return max(self.multiplicities, default=0)

    @property
    def is_siso(self) -> bool:
        return self.dims == (1, 1)

    @property
    def flat(self) -> _kernels.FlatTerms:
        if self._flat is None:
            object.__setattr__(self, "_flat", _kernels.FlatTerms(
                [(t.pole, t.coefficients) for t in self.terms], self.dims))
        return self._flat

    def term_for(self, pole, tol=POLE_TOL):
        for t in self.terms:
            if abs(t.pole - pole) <= tol:
                return t
        return None

    def __call__(self, z):
        return evaluate(self, z)

    def to_polynomials(self):
        """SISO only: ``(num, den)`` in descending powers."""
        if not self.is_siso:
            raise DimensionMismatch("to_polynomials is only defined for SISO systems")
        den = np.array([1.0 + 0j])
        for t in self.terms:
            den = np.polymul(den, np.poly([t.pole] * t.multiplicity))
        num = np.zeros(1, dtype=complex)
        for t in self.terms:
            rest = np.array([1.0 + 0j])
            for o in self.terms:
                if o is not t:
                    rest = np.polymul(rest, np.poly([o.pole] * o.multiplicity))
            for j, c in enumerate(t.coefficients, start=1):
                part = np.polymul(rest, np.poly([t.pole] * (t.multiplicity - j))) * c[0, 0]
                num = np.polyadd(num, part)
        if np.all(np.abs(num.imag) <= 1e-12 * max(1.0, np.abs(num).max())) and \
                np.all(np.abs(den.imag) <= 1e-12 * np.abs(den).max()):
            num, den = num.real, den.real
        return np.trim_zeros(num, "f") if np.any(num) else num[-1:], den

    # algebra ----------------------------------------------------------

    def _combine(self, other, sign):
        if not isinstance(other, RationalSystem):
            return NotImplemented
        if other.dims != self.dims:
            raise DimensionMismatch(f"cannot combine {self.dims} with {other.dims} systems")
        merged = [[t.pole, list(t.coefficients)] for t in self.terms]
        for t in other.terms:
            for entry in merged:
                if abs(entry[0] - t.pole) <= POLE_TOL:
                    mats = entry[1]
                    while len(mats) < t.multiplicity:
                        mats.append(np.zeros(self.dims, dtype=complex))
                    for j, c in enumerate(t.coefficients):
                        mats[j] = mats[j] + sign * c
                    break
            else:
                merged.append([t.pole, [sign * c for c in t.coefficients]])
        terms = []
        for q, mats in merged:
            while mats and not np.any(mats[-1]):
                mats.pop()
            if mats:
                terms.append((q, mats))
        return RationalSystem(terms, dims=self.dims)

    def __add__(self, other):
        return self._combine(other, 1.0)

    def __sub__(self, other):
        return self._combine(other, -1.0)

    def __neg__(self):
        return self * -1.0

    def __mul__(self, alpha):
        if not isinstance(alpha, (Real, complex, np.number)):
            return NotImplemented
        if alpha == 0:
            return RationalSystem.zero(self.dims)
        return RationalSystem([(t.pole, [alpha * c for c in t.coefficients]) for t in self.terms],
                              dims=self.dims)

    __rmul__ = __mul__

    def __eq__(self, other):
        if not isinstance(other, RationalSystem):
            return NotImplemented
        return self.dims == other.dims and self.terms == other.terms

    def __hash__(self):
        return hash((self.dims, self.terms))

    def __repr__(self):
        parts = ", ".join(f"{t.pole:.6g}^{t.multiplicity}" for t in self.terms)
        return f"RationalSystem(dims={self.dims}, poles=[{parts}])"


def _cluster_roots(roots, radius):
    """Group roots closer than ``radius`` (single linkage); returns
    ``[(mean, count), ...]`` with near-real clusters snapped to the real axis
    and complex clusters paired exactly with their conjugates."""
    roots = list(np.asarray(roots, dtype=complex))
    groups = []
    for r in roots:
        hit = [g for g in groups if min(abs(r - x) for x in g) <= radius]
        for g in hit:
            groups.remove(g)
        groups.append(sum(hit, []) + [r])
    out = []
    for g in groups:
        q = complex(np.mean(g))
        if abs(q.imag) <= radius:
            q = complex(q.real, 0.0)
        out.append((q, len(g)))
    upper = [(q, m) for q, m in out if q.imag >= 0]
    lower = [(q.conjugate(), m) for q, m in out if q.imag > 0]
    return upper + lower


def _taylor(poly, q, order):
    """First ``order`` Taylor coefficients of a polynomial about ``q``."""
    coeffs = []
    p = np.asarray(poly, dtype=complex)
    fact = 1.0
    for i in range(order):
        coeffs.append(np.polyval(p, q) / fact if p.size else 0j)
        p = np.polyder(p) if p.size > 1 else np.zeros(1, dtype=complex)
        fact *= i + 1
    return np.array(coeffs, dtype=complex)


def _series_divide(a, b, order):
    g = np.zeros(order, dtype=complex)
    for i in range(order):
        acc = a[i] - sum(b[l] * g[i - l] for l in range(1, i + 1))
        g[i] = acc / b[0]
    return g


# evaluation -----------------------------------------------------------


def evaluate(S: RationalSystem, z) -> np.ndarray:
    """``S(z)`` as a complex ``n x m`` matrix, or a stack for array ``z``."""
    scalar = np.ndim(z) == 0
    zz = np.atleast_1d(np.asarray(z, dtype=complex))
    if not np.all(np.isfinite(zz)):
        raise InvariantError("evaluation point is not finite")
    if len(S.terms):
        gap = np.abs(zz[:, None] - S.poles[None, :]).min(axis=1)
        if gap.min() <= POLE_TOL:
            i = int(np.argmin(gap))
            raise EvaluationAtPole(f"z = {zz[i]} is within {POLE_TOL} of a pole")
    out = _kernels.pf_eval(S.flat, zz)
    return out[0] if scalar else out


# impulse response -----------------------------------------------------


@dataclass(frozen=True)
class ImpulseTruncation:
    """Samples ``I(S)(1..T)`` and a bound on the discarded H2 tail,
    ``sqrt(sum_{k>T} ||I(S)(k)||_F^2) <= tail_bound``."""

    samples: np.ndarray
    tail_bound: float

    @property
    def T(self) -> int:
        return self.samples.shape[0]

    def stacked(self) -> np.ndarray:
        """The block column ``[I(1); I(2); ...; I(T)]``."""
        T, n, m = self.samples.shape
        return self.samples.reshape(T * n, m)


def _term_tail_sq(rho: float, j: int, T: int) -> float:
    """sum_{k > T} (binom(k-1, j-1) rho**(k-j))**2, bounded from above.

    The ratio of successive terms, rho*k/(k-j+1), decreases to rho. Terms are
    summed exactly until it drops below (1+rho)/2, the rest by a geometric series.
    """
    if rho == 0.0:
        return 1.0 if T < j else 0.0
    k0 = max(T + 1, j)
    gamma = 0.5 * (1.0 + rho)
    kstar = max(k0, math.ceil(gamma * (j - 1) / (gamma - rho)))
    log_rho = math.log(rho)

    def loga(k):
        k = np.asarray(k, dtype=float)
        lb = gammaln(k) - gammaln(j) - gammaln(k - j + 1) if j > 1 else 0.0
        return lb + (k - j) * log_rho

    total = 0.0
    for s in range(k0, kstar, 1 << 20):
        ks = np.arange(s, min(s + (1 << 20), kstar), dtype=float)
        total += float(np.sum(np.exp(2.0 * loga(ks))))
    ratio = rho * kstar / (kstar - j + 1)
    total += math.exp(2.0 * float(loga(kstar))) / (1.0 - ratio * ratio)
    return total


def _abs_terms(S):
    """(|q|, j, ||C_(q,j)||_F) for every nonzero coefficient."""
    out = []
    for t in S.terms:
        rho = abs(t.pole)
        for j, c in enumerate(t.coefficients, start=1):
            nrm = float(np.linalg.norm(c))
            if nrm:
                out.append((rho, j, nrm))
    return out


def tail_norm_bound(S: RationalSystem, T: int) -> float:
    """Upper bound on ``sqrt(sum_{k>T} ||I(S)(k)||_F^2)``.

    Each term ``C/(z-q)^j`` contributes ``||C||_F binom(k-1,j-1)|q|^(k-j)``;
    the per-term tails are combined with Minkowski's inequality.
    """
    return sum(c * math.sqrt(_term_tail_sq(rho, j, T)) for rho, j, c in _abs_terms(S))


def truncation_length(S: RationalSystem, tol: float, cap: int = T_CAP) -> int:
    """Smallest ``T`` with ``tail_norm_bound(S, T) < tol``."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    terms = _abs_terms(S)
    if not terms:
        return 1

    def bound(T):
        return sum(c * math.sqrt(_term_tail_sq(rho, j, T)) for rho, j, c in terms)

    if bound(cap) >= tol:
        raise TruncationOverflow(
            f"tail bound needs T > {cap} for tol={tol}; "
            f"max pole modulus {max(r for r, _, _ in terms)!r}")
    if bound(1) < tol:
        return 1
    lo, hi = 1, 2
    while bound(hi) >= tol:
        lo, hi = hi, min(2 * hi, cap)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if bound(mid) < tol:
            hi = mid
        else:
            lo = mid
    return hi


def _envelope(S: RationalSystem, T: int) -> np.ndarray:
    """sum_t ||C_t||_F binom(k-1,j-1)|q|^(k-j) for k = 1..T; bounds ||I(S)(k)||_F."""
    abs_terms = [(abs(t.pole), [[[np.linalg.norm(c)]] for c in t.coefficients]) for t in S.terms]
    flat = _kernels.FlatTerms(abs_terms, (1, 1))
    return _kernels.impulse_block(flat, 1, T).real[:, 0, 0]


def impulse_response(S: RationalSystem, T: int, rtol: float = REAL_TOL) -> ImpulseTruncation:
    """First ``T`` impulse samples of ``S`` (real) with a tail bound.

    Raises :class:`NotReal` when any sample carries an imaginary part above
    ``rtol`` relative to the term-magnitude envelope at that sample.
    """
    T = int(T)
    if T < 1:
        raise ValueError("T must be >= 1")
    block = _kernels.impulse_block(S.flat, 1, T)
    if np.iscomplexobj(block) and np.any(block.imag):
        resid = np.sqrt(np.sum(block.imag ** 2, axis=(1, 2)))
        env = _envelope(S, T)
        bad = resid > rtol * env
        if np.any(bad):
            k = int(np.argmax(bad)) + 1
            raise NotReal(f"sample k={k}: imaginary residue {resid[k - 1]:.3e} "
                          f"exceeds {rtol:g} x envelope {env[k - 1]:.3e}")
    samples = np.ascontiguousarray(block.real)
    samples.setflags(write=False)
    return ImpulseTruncation(samples=samples, tail_bound=tail_norm_bound(S, T))


# realness audit -------------------------------------------------------


@dataclass(frozen=True)
class RealnessReport:
    passed: bool
    violation: float
    pole: complex | None = None
    order: int | None = None
    reason: str = ""

    def __bool__(self):
        return self.passed


def _rel(num, den):
    if num == 0.0:
        return 0.0
    return num / den if den > 0 else math.inf


def check_realness(S: RationalSystem, tol: float = REAL_TOL) -> RealnessReport:
    """Audit conjugate closure with matched coefficients.

    Complex poles need a partner at the conjugate with
    ``C_(conj q, j) = conj(C_(q, j))``; real poles need real coefficients.
    Deviations are measured relative to the Frobenius norm of the coefficient.
    """
    worst = RealnessReport(True, 0.0)
    for t in S.terms:
        q = t.pole
        if q.imag == 0.0:
            for j, c in enumerate(t.coefficients, start=1):
                v = _rel(float(np.linalg.norm(c.imag)), float(np.linalg.norm(c)))
                if v > worst.violation:
                    worst = RealnessReport(v <= tol, v, q, j, "real pole with complex coefficient")
            continue
        partner = S.term_for(q.conjugate())
        if partner is None:
            return RealnessReport(False, 1.0, q, None, "conjugate partner missing")
        if partner.multiplicity != t.multiplicity:
            return RealnessReport(False, 1.0, q, None, "conjugate partner multiplicity differs")
        for j, (c, d) in enumerate(zip(t.coefficients, partner.coefficients), start=1):
            v = _rel(float(np.linalg.norm(d - np.conj(c))), float(np.linalg.norm(c)))
            if v > worst.violation:
                worst = RealnessReport(v <= tol, v, q, j, "conjugate coefficient mismatch")
    if worst.violation > tol:
        return RealnessReport(False, worst.violation, worst.pole, worst.order, worst.reason)
    return RealnessReport(True, worst.violation, worst.pole, worst.order, worst.reason)


# JSON -----------------------------------------------------------------


def _pair(z):
    z = complex(z)
    return [z.real, z.imag]


def serialize(S: RationalSystem) -> dict:
    return {
        "dims": list(S.dims),
        "terms": [
            {
                "pole": _pair(t.pole),
                "coefficients": [[[_pair(x) for x in row] for row in c] for c in t.coefficients],
            }
            for t in S.terms
        ],
    }


def dumps(S: RationalSystem, **kw) -> str:
    return json.dumps(serialize(S), allow_nan=False, **kw)


def _reject_constant(name):
    raise SchemaError(f"non-finite number {name} in document")


def loads(text: str) -> RationalSystem:
    return deserialize(text)


def parse_json(text):
    try:
        return json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}") from exc


def _number(x, where):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise SchemaError(f"{where}: expected a number, got {type(x).__name__}")
    x = float(x)
    if not math.isfinite(x):
        raise SchemaError(f"{where}: non-finite number")
    return x


def parse_complex(v, where):
    if not isinstance(v, (list, tuple)) or len(v) != 2:
        raise SchemaError(f"{where}: expected [re, im]")
    return complex(_number(v[0], where), _number(v[1], where))


def _field(doc, key, where):
    if not isinstance(doc, dict) or key not in doc:
        raise SchemaError(f"{where}: missing field '{key}'")
    return doc[key]


def deserialize(doc) -> RationalSystem:
    """Build a system from a document (dict or JSON text) and enforce every
    invariant, conjugate closure included."""
    if isinstance(doc, (str, bytes)):
        doc = parse_json(doc)
    dims = _field(doc, "dims", "system")
    if (not isinstance(dims, list) or len(dims) != 2
            or not all(isinstance(d, int) and not isinstance(d, bool) and d >= 1 for d in dims)):
        raise SchemaError("dims: expected [nhat, mhat] positive integers")
    raw_terms = _field(doc, "terms", "system")
    if not isinstance(raw_terms, list):
        raise SchemaError("terms: expected a list")
    auto = doc.get("auto_conjugate", False)
    if not isinstance(auto, bool):
        raise SchemaError("auto_conjugate: expected true/false")
    items = []
    for i, rt in enumerate(raw_terms):
        where = f"terms[{i}]"
        q = parse_complex(_field(rt, "pole", where), where + ".pole")
        coeffs = _field(rt, "coefficients", where)
        if not isinstance(coeffs, list) or not coeffs:
            raise SchemaError(f"{where}.coefficients: expected a non-empty list")
        mats = []
        for j, mat in enumerate(coeffs):
            w = f"{where}.coefficients[{j}]"
            if not isinstance(mat, list) or len(mat) != dims[0]:
                raise SchemaError(f"{w}: expected {dims[0]} rows")
            rows = []
            for r, row in enumerate(mat):
                if not isinstance(row, list) or len(row) != dims[1]:
                    raise SchemaError(f"{w}[{r}]: expected {dims[1]} entries")
                rows.append([parse_complex(x, f"{w}[{r}]") for x in row])
            mats.append(np.array(rows, dtype=complex))
        items.append((q, mats))
    if auto:
        for q, mats in list(items):
            if q.imag != 0 and not any(abs(p - q.conjugate()) <= POLE_TOL for p, _ in items):
                items.append((q.conjugate(), [np.conj(c) for c in mats]))
    S = RationalSystem(items, dims=tuple(dims))
    report = check_realness(S)
    if not report.passed:
        raise InvariantError(f"conjugate closure broken at pole {report.pole}: {report.reason} "
                             f"(violation {report.violation:.3g})")
    return S
