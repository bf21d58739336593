"""Simple pole approximation.

Every term ``C / (z - q)**j`` of the source system is replaced by
``C * sum_i c_i / (z - p_i)`` over the ``j`` approximating poles nearest to
``q``, where ``c_i = 1 / prod_{l != i} (p_i - p_l)`` makes
``sum_i c_i / (z - p_i) = 1 / prod_i (z - p_i)`` exact. Collecting the
contributions per approximating pole gives the gains ``G_p``.
"""
from __future__ import annotations

import csv
import hashlib
import io
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import AssumptionViolation, InvalidCount, IllConditioned, NotEnoughPoles, RepeatedPole
from .norms import h2_distance, hinf_distance
from .poleselect import (AssumptionAudit, PoleSelection, _nearest_indices, augment,
                         check_assumptions, coverage_distance, spiral_sequence)
from .tfcore import POLE_TOL, RationalSystem, dumps, impulse_response, serialize

ILL_CONDITIONED_GAP = 1e-6

SWEEP_HEADER = ("n", "num_poles", "D", "bound_h2", "bound_hinf", "err_h2", "err_hinf",
                "fir_err_h2", "fir_err_hinf", "feasible")

__all__ = [
    "Approximant",
    "ErrorCertificate",
    "SisoTermApprox",
    "SweepRow",
    "simple_pole_coefficients",
    "siso_term_approx",
    "approximate",
    "error_certificate",
    "spiral_rate_bound",
    "fir_approximant",
    "convergence_sweep",
    "write_sweep_csv",
    "sweep_csv",
    "SWEEP_HEADER",
]


def simple_pole_coefficients(poles) -> np.ndarray:
    """Residues ``c_i`` of ``1 / prod_i (z - p_i)`` at each ``p_i``.

    Raises ``RepeatedPole`` for poles closer than 1e-12 and warns with
    ``IllConditioned`` when the smallest gap is below 1e-6.
    """
    p = np.asarray(list(poles), dtype=complex)
    if len(p) < 2:
        return np.ones(len(p), dtype=complex)
    diff = p[:, None] - p[None, :]
    np.fill_diagonal(diff, 1.0)
    gap = float(np.abs(diff).min())
    if gap <= POLE_TOL:
        raise RepeatedPole(f"poles are not distinct (gap {gap:.3g})")
    if gap < ILL_CONDITIONED_GAP:
        warnings.warn(f"approximating poles only {gap:.3g} apart; coefficients are large",
                      IllConditioned, stacklevel=2)
    return 1.0 / np.prod(diff, axis=1)


def _bound_factor(q_abs: float, j: int, r: float) -> float:
    return ((q_abs + 2.0) ** j - (q_abs + 1.0) ** j) / ((1.0 - q_abs) ** j * (1.0 - r) ** j)


@dataclass(frozen=True)
class SisoTermApprox:
    """Simple-pole replacement of ``1 / (z - q)**j``."""

    poles: np.ndarray
    coefficients: np.ndarray
    d_hat: float
    bound: float

    def system(self) -> RationalSystem:
        return RationalSystem.from_simple_poles(self.poles, self.coefficients, dims=(1, 1))


def siso_term_approx(q, j: int, P: PoleSelection) -> SisoTermApprox:
    """Approximate ``1 / (z - q)**j`` over the ``j`` poles of ``P`` nearest ``q``.

    The H-infinity error is at most
    ``((|q|+2)^j - (|q|+1)^j) / ((1-|q|)^j (1-r)^j) * d_hat`` with
    ``r = max |p|`` over ``P`` and ``d_hat`` the farthest assigned distance.
    """
    q = complex(q)
    if j < 1:
        raise InvalidCount(f"j must be >= 1, got {j}")
    idx = _nearest_indices(P, q, j)
    poles = P.poles[idx]
    d_hat = float(np.abs(poles - q).max())
    if d_hat >= 1.0:
        raise AssumptionViolation("A4", f"d_hat = {d_hat:.6g} >= 1 for pole {q}", witness=d_hat)
    coeffs = simple_pole_coefficients(poles)
    bound = _bound_factor(abs(q), j, P.radius) * d_hat
    return SisoTermApprox(poles=poles, coefficients=coeffs, d_hat=d_hat, bound=bound)


def _raise_for(audit: AssumptionAudit, need_a5: bool = False):
    flags = [("A1", audit.a1), ("A2", audit.a2), ("A3", audit.a3), ("A4", audit.a4)]
    if need_a5:
        flags.append(("A5", audit.a5))
    for name, ok in flags:
        if ok is False:
            witness = {"A1": audit.r, "A2": audit.m_max, "A4": audit.D, "A5": audit.delta}.get(name)
            if name == "A2":
                raise NotEnoughPoles(audit.num_poles, audit.m_max)
            raise AssumptionViolation(name, audit.details[name], witness=witness)


@dataclass(frozen=True)
class Approximant:
    """``sum_p G_p / (z - p)`` over a pole selection.

    ``gains[i]`` is ``G_p`` for ``poles[i]``, zeros included. ``fingerprint``
    is a SHA-256 digest of the source system and the selection.
    """

    poles: np.ndarray
    gains: np.ndarray
    provenance: tuple
    dims: tuple
    fingerprint: str

    @property
    def system(self) -> RationalSystem:
        """The approximant as a system; a pole is dropped only when its gain
        and its conjugate partner's gain are both exactly zero."""
        keep = np.array([np.any(g) for g in self.gains], dtype=bool)
        conj = _conj_map(self.poles)
        keep = keep | keep[conj]
        return RationalSystem([(p, [g]) for p, g, k in zip(self.poles, self.gains, keep) if k],
                              dims=self.dims)

    def gain_for(self, pole) -> np.ndarray:
        i = int(np.argmin(np.abs(self.poles - complex(pole))))
        if abs(self.poles[i] - complex(pole)) > POLE_TOL:
            raise KeyError(pole)
        return self.gains[i]

    def to_dict(self, certificate: "ErrorCertificate | None" = None) -> dict:
        doc = serialize(self.system)
        doc["source_fingerprint"] = self.fingerprint
        if certificate is not None:
            doc["certificate"] = certificate.to_dict()
        return doc


def _conj_map(poles):
    d = np.abs(poles[:, None] - np.conj(poles)[None, :])
    return np.argmin(d, axis=0)


def fingerprint(S: RationalSystem, P: PoleSelection) -> str:
    h = hashlib.sha256()
    h.update(dumps(S, sort_keys=True).encode())
    h.update(b"\0")
    h.update(P.dumps(sort_keys=True).encode())
    return h.hexdigest()


def approximate(S: RationalSystem, P: PoleSelection) -> Approximant:
    """Simple pole approximant of ``S`` over ``P``.

    Complex source poles use their own nearest-pole assignment, which is the
    mirror image of the one for the conjugate pole. A real source pole ``q``
    averages the coefficients over its assignment and over the mirrored
    assignment, so that the gains come out conjugate-symmetric. Raises
    ``AssumptionViolation`` unless A1-A4 hold.
    """
    _raise_for(check_assumptions(P, S))
    n, m = S.dims
    gains = np.zeros((len(P), n, m), dtype=complex)
    conj = P.conj_index
    for t in S.terms:
        q = t.pole
        idx = _nearest_indices(P, q, t.multiplicity)
        for j, C in enumerate(t.coefficients, start=1):
            sel = idx[:j]
            c = simple_pole_coefficients(P.poles[sel])
            if q.imag == 0:
                mirror = conj[sel]
                c_bar = simple_pole_coefficients(P.poles[mirror])
                gains[sel] += 0.5 * c[:, None, None] * C
                gains[mirror] += 0.5 * c_bar[:, None, None] * C
            else:
                gains[sel] += c[:, None, None] * C
    gains.setflags(write=False)
    return Approximant(poles=P.poles, gains=gains, provenance=P.provenance, dims=S.dims,
                       fingerprint=fingerprint(S, P))


@dataclass(frozen=True)
class ErrorCertificate:
    """A-priori error bounds ``||S - S_hat|| <= K * D``.

    ``K_inf = sum_q sum_j ||C_(q,j)||_2 ((|q|+2)^j - (|q|+1)^j) /
    ((1-|q|)^j (1-r)^j)`` and ``K_2 = sqrt(s) K_inf`` with
    ``s = min(nhat, mhat)``.
    """

    D: float
    r: float
    s: int
    K_inf: float
    K_2: float
    bound_h2: float
    bound_hinf: float
    audit: AssumptionAudit
    d_hat: tuple = ()
    tight_r: bool = False

    def to_dict(self) -> dict:
        a = self.audit
        assumptions = {"A1": a.a1, "A2": a.a2, "A3": a.a3, "A4": a.a4, "A5": a.a5,
                       "m_max": a.m_max, "delta": a.delta}
        return {"D": self.D, "r": self.r, "s": self.s, "K_inf": self.K_inf, "K_2": self.K_2,
                "bound_h2": self.bound_h2, "bound_hinf": self.bound_hinf,
                "tight_r": self.tight_r, "assumptions": assumptions}


def error_certificate(S: RationalSystem, P: PoleSelection, tight_r: bool = False,
                      sigma=None) -> ErrorCertificate:
    """Certify the approximation error of ``approximate(S, P)``.

    With ``tight_r`` the radius ``r`` is taken over the poles actually used
    by some assignment (and their mirrors) instead of all of ``P``. Plant
    poles ``sigma`` add the A5 audit; a failure raises like A1-A4 do.
    """
    audit = check_assumptions(P, S, sigma)
    _raise_for(audit, need_a5=sigma is not None)
    table = coverage_distance(P, S)
    if tight_r:
        used = table.used_indices()
        r = float(np.abs(P.poles[used]).max()) if len(used) else 0.0
    else:
        r = P.radius
    K_inf = 0.0
    for t in S.terms:
        qa = abs(t.pole)
        for j, C in enumerate(t.coefficients, start=1):
            K_inf += float(np.linalg.norm(C, 2)) * _bound_factor(qa, j, r)
    s = min(S.dims)
    K_2 = math.sqrt(s) * K_inf
    D = table.D
    return ErrorCertificate(D=D, r=r, s=s, K_inf=K_inf, K_2=K_2, bound_h2=K_2 * D,
                            bound_hinf=K_inf * D, audit=audit, d_hat=tuple(table.d_hat),
                            tight_r=tight_r)


def spiral_rate_bound(n: int, m_max: int) -> float:
    """``sqrt(pi) (1 + m_max) / sqrt(n)``, the decay guaranteed for
    ``D(spiral_sequence(n))``."""
    if n < 2:
        raise InvalidCount(f"n must be >= 2, got {n}")
    return math.sqrt(math.pi) * (1 + m_max) / math.sqrt(n)


def fir_approximant(S: RationalSystem, n_taps: int) -> RationalSystem:
    """``sum_{k=1}^{n_taps} h_k z^{-k}`` with ``h_k`` the impulse response of
    ``S``: every pole at the origin."""
    if n_taps < 1:
        raise InvalidCount(f"n_taps must be >= 1, got {n_taps}")
    if not S.terms:
        return RationalSystem.zero(S.dims)
    taps = [np.asarray(h, dtype=complex) for h in impulse_response(S, n_taps).samples]
    while taps and not np.any(taps[-1]):
        taps.pop()
    if not taps:
        return RationalSystem.zero(S.dims)
    return RationalSystem([(0.0, taps)], dims=S.dims)


# sweeps -------------------------------------------------------------------


@dataclass(frozen=True)
class SweepRow:
    """One row of a convergence sweep; unavailable numbers are ``None``."""

    n: int
    num_poles: int
    D: float | None
    bound_h2: float | None = None
    bound_hinf: float | None = None
    err_h2: float | None = None
    err_hinf: float | None = None
    fir_err_h2: float | None = None
    fir_err_hinf: float | None = None
    feasible: bool = False
    reason: str = field(default="", compare=False)

    def values(self) -> tuple:
        return tuple(getattr(self, k) for k in SWEEP_HEADER)


def _sweep_row(S, n, baseline, prior, tol):
    P = spiral_sequence(n)
    if prior:
        P = augment(P, prior)
    try:
        cert = error_certificate(S, P)
    except AssumptionViolation as exc:
        D = None
        if len(P) >= S.m_max:
            D = coverage_distance(P, S).D
        return SweepRow(n=n, num_poles=len(P), D=D, feasible=False, reason=str(exc))
    approx = approximate(S, P).system
    row = dict(n=n, num_poles=len(P), D=cert.D, bound_h2=cert.bound_h2,
               bound_hinf=cert.bound_hinf, err_h2=h2_distance(S, approx, tol),
               err_hinf=hinf_distance(S, approx, tol), feasible=True)
    if baseline == "fir":
        fir = fir_approximant(S, len(P))
        row.update(fir_err_h2=h2_distance(S, fir, tol), fir_err_hinf=hinf_distance(S, fir, tol))
    return SweepRow(**row)


def convergence_sweep(S: RationalSystem, n_values, baseline: str = "none", prior=(),
                      tol: float = 1e-8, threads: int = 1) -> list[SweepRow]:
    """Certify, approximate and measure ``S`` over ``spiral_sequence(n)``.

    ``prior`` poles are merged into every selection. With ``baseline="fir"``
    an FIR approximant with ``|P|`` taps is measured too. Rows where an
    assumption fails are marked infeasible and the sweep continues. Rows are
    returned in the order of ``n_values`` whatever ``threads`` is.
    """
    if baseline not in ("none", "fir"):
        raise ValueError(f"baseline must be 'none' or 'fir', got {baseline!r}")
    n_values = [int(n) for n in n_values]
    for n in n_values:
        if not 2 <= n <= 1000:
            raise InvalidCount(f"n must be in [2, 1000], got {n}")
    prior = [complex(x) for x in prior]

    def run(n):
        return _sweep_row(S, n, baseline, prior, tol)

    if threads <= 1 or len(n_values) < 2:
        return [run(n) for n in n_values]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(run, n_values))


def _cell(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_sweep_csv(rows, fh) -> None:
    """Write rows with the fixed sweep header. Floats use the shortest
    round-trip representation; missing values are empty cells."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(SWEEP_HEADER)
    for row in rows:
        w.writerow([_cell(v) for v in row.values()])


def sweep_csv(rows) -> str:
    buf = io.StringIO()
    write_sweep_csv(rows, buf)
    return buf.getvalue()
