"""Brute-force checkers for the approximation inequalities, and the seeded
random system generator shared by the test suites.

The subset sums are enumerated literally (``2**m`` and ``3**m`` terms), so
these routines are slow by design and capped at small ``m``.
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import TooManyPoles
from .poleselect import spiral_poles, winding_constant
from .spa import simple_pole_coefficients
from .tfcore import RationalSystem

FIRST_MAX_M = 12
SECOND_MAX_M = 10

__all__ = [
    "LemmaResult",
    "lemma_first_check",
    "lemma_second_check",
    "g_function",
    "g_grid",
    "g_monotonicity_check",
    "random_system",
    "random_disk_points",
    "lemma_suite",
    "spiral_gaps",
]


class LemmaResult(NamedTuple):
    lhs: float
    rhs: float
    passed: bool

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs


def _subset_products(values: np.ndarray) -> np.ndarray:
    """``out[mask] = prod_{i in mask} values[i]`` for every bitmask."""
    m = len(values)
    out = np.ones(1 << m)
    for i, v in enumerate(values):
        out[1 << i:1 << (i + 1)] = out[:1 << i] * v
    return out


def _popcounts(m: int) -> np.ndarray:
    return np.array([bin(s).count("1") for s in range(1 << m)])


def lemma_first_check(q, poles, atol: float = 1e-12) -> LemmaResult:
    """``|q^m - prod p_i|`` against ``sum_{S != {}} |q|^{m-|S|} prod_S |p_i - q|``."""
    p = np.asarray(list(poles), dtype=complex)
    m = len(p)
    if m > FIRST_MAX_M:
        raise TooManyPoles(f"m = {m} exceeds {FIRST_MAX_M}")
    q = complex(q)
    lhs = abs(q ** m - np.prod(p))
    a = _subset_products(np.abs(p - q))
    k = _popcounts(m)
    rhs = float(np.sum(abs(q) ** (m - k[1:]) * a[1:]))
    return LemmaResult(float(lhs), rhs, bool(lhs <= rhs + atol))


def _second_rhs(q: complex, p: np.ndarray) -> float:
    m = len(p)
    a = _subset_products(np.abs(p - q))
    k = _popcounts(m)
    qa = abs(q)
    num = 0.0
    for S in range(1, 1 << m):
        T = S
        while T:
            num += qa ** (k[S] - k[T]) * a[T]
            T = (T - 1) & S
    den = (1.0 - qa) ** m * float(np.prod(1.0 - np.abs(p)))
    return float(num / den)


def lemma_second_check(q, poles, circle_samples: int = 4096,
                       atol: float = 1e-9) -> LemmaResult:
    """Worst error of ``sum c_i / (z - p_i)`` against ``1 / (z - q)^m`` on
    ``circle_samples`` equispaced points of the unit circle, compared with
    the enumerated bound whose denominator is ``(1-|q|)^m prod (1-|p_i|)``."""
    p = np.asarray(list(poles), dtype=complex)
    m = len(p)
    if m > SECOND_MAX_M:
        raise TooManyPoles(f"m = {m} exceeds {SECOND_MAX_M}")
    q = complex(q)
    c = simple_pole_coefficients(p)
    z = np.exp(2j * np.pi * np.arange(circle_samples) / circle_samples)
    approx = (c[None, :] / (z[:, None] - p[None, :])).sum(axis=1)
    lhs = float(np.abs(approx - 1.0 / (z - q) ** m).max())
    rhs = _second_rhs(q, p)
    return LemmaResult(lhs, rhs, bool(lhs <= rhs + atol))


def g_function(x, m: int):
    """Squared distance between spiral poles ``k = x`` and ``x + 1`` for the
    ``m``-pole selection, as a function of continuous ``x >= 1``.

    Evaluated as ``(sqrt(x+1) - sqrt(x))^2 + 4 sqrt(x(x+1)) sin^2(phi/2)``
    with ``phi = 2 sqrt(pi) (sqrt(x+1) - sqrt(x))``, which avoids the
    cancellation in ``2x + 1 - 2 sqrt(x(x+1)) cos(phi)`` at large ``x``.
    """
    winding_constant(m)  # validates m
    x = np.asarray(x, dtype=float)
    s1, s0 = np.sqrt(x + 1.0), np.sqrt(x)
    delta = 1.0 / (s1 + s0)
    phi = 2.0 * math.sqrt(math.pi) * delta
    val = (delta ** 2 + 4.0 * s0 * s1 * np.sin(phi / 2.0) ** 2) / (m / 2 + 1.0)
    return float(val) if val.ndim == 0 else val


def g_grid() -> np.ndarray:
    """Step 0.5 on ``[1, 50]`` followed by log-spaced points up to 1e6."""
    return np.concatenate([np.arange(1.0, 50.0 + 0.25, 0.5),
                           np.logspace(np.log10(60.0), 6.0, 200)])


def g_monotonicity_check(m: int, grid=None) -> LemmaResult:
    """Sampled check that ``g`` is nondecreasing and stays below its limit
    ``(2 pi c_m)^2``. A numerical surrogate for a symbolic argument.

    ``lhs`` is the largest sampled value, ``rhs`` the limit; ``passed`` also
    requires no decrease between consecutive samples.
    """
    x = g_grid() if grid is None else np.asarray(grid, dtype=float)
    g = g_function(x, m)
    limit = (2.0 * math.pi * winding_constant(m)) ** 2
    monotone = bool(np.all(np.diff(g) >= 0.0))
    top = float(g.max())
    return LemmaResult(top, limit, monotone and top < limit)


def random_disk_points(rng: np.random.Generator, size: int, radius: float = 1.0) -> np.ndarray:
    """Uniform points in the open disk of the given radius."""
    r = radius * np.sqrt(rng.random(size)) * (1.0 - 1e-12)
    return r * np.exp(2j * np.pi * rng.random(size))


def random_system(seed, nhat: int = 1, mhat: int = 1, max_poles: int = 4, max_mult: int = 1,
                  pole_radius_cap: float = 0.9, min_gap: float = 1e-3) -> RationalSystem:
    """Seeded random real system.

    Draws between 1 and ``max_poles`` distinct poles with modulus below
    ``pole_radius_cap``, as real poles and conjugate pairs, each with a
    multiplicity up to ``max_mult``. Real poles get real coefficients and
    the conjugate partner of a complex pole gets conjugated coefficients.
    """
    if not 0 < pole_radius_cap < 1:
        raise ValueError("pole_radius_cap must be in (0, 1)")
    rng = np.random.default_rng(seed)
    target = int(rng.integers(1, max_poles + 1))
    terms = []
    poles = []

    def far(z):
        return all(abs(z - p) > min_gap for p in poles)

    while len(poles) < target:
        r = pole_radius_cap * math.sqrt(rng.random())
        mult = int(rng.integers(1, max_mult + 1))
        pair = target - len(poles) >= 2 and rng.random() < 0.5
        if pair:
            q = r * np.exp(1j * math.pi * rng.uniform(0.02, 0.98))
            if not (far(q) and abs(q.imag) > min_gap):
                continue
            mats = [rng.standard_normal((nhat, mhat)) + 1j * rng.standard_normal((nhat, mhat))
                    for _ in range(mult)]
            terms.append((q, mats))
            terms.append((q.conjugate(), [np.conj(c) for c in mats]))
            poles += [q, q.conjugate()]
        else:
            q = r * (1.0 if rng.random() < 0.5 else -1.0)
            if not far(q):
                continue
            terms.append((q, [rng.standard_normal((nhat, mhat)) for _ in range(mult)]))
            poles.append(q)
    return RationalSystem(terms, dims=(nhat, mhat))


# batch suite --------------------------------------------------------------


def _check_record(name, results, instances):
    worst = min(range(len(results)), key=lambda i: results[i].margin)
    failed = [i for i, r in enumerate(results) if not r.passed]
    bad = failed[0] if failed else None
    return {
        "check": name,
        "count": len(results),
        "passed": not failed,
        "failures": len(failed),
        "worst_margin": results[worst].margin,
        "counterexample": None if bad is None else {**instances[bad],
                                                   "lhs": results[bad].lhs,
                                                   "rhs": results[bad].rhs},
    }


def _pairs(z):
    return [[float(np.real(v)), float(np.imag(v))] for v in np.atleast_1d(z)]


def lemma_suite(seed: int = 0, count: int = 500, circle_samples: int = 4096,
                first_max_m: int = 6, second_max_m: int = 4, g_max_m: int = 64) -> list[dict]:
    """Run the three oracle batches and return one record per check.

    ``count`` random instances are drawn for each of the two subset
    inequalities; the g check covers every even ``m`` up to ``g_max_m``.
    """
    rng = np.random.default_rng(seed)
    records = []
    inst, res = [], []
    for _ in range(count):
        m = int(rng.integers(1, first_max_m + 1))
        q = random_disk_points(rng, 1)[0]
        p = random_disk_points(rng, m)
        inst.append({"q": _pairs(q)[0], "poles": _pairs(p)})
        res.append(lemma_first_check(q, p))
    records.append(_check_record("lemma_first", res, inst))
    inst, res = [], []
    for _ in range(count):
        m = int(rng.integers(1, second_max_m + 1))
        q = random_disk_points(rng, 1)[0]
        p = random_disk_points(rng, m)
        inst.append({"q": _pairs(q)[0], "poles": _pairs(p)})
        res.append(lemma_second_check(q, p, circle_samples))
    records.append(_check_record("lemma_second", res, inst))
    ms = list(range(2, g_max_m + 1, 2))
    records.append(_check_record("g_monotone", [g_monotonicity_check(m) for m in ms],
                                 [{"m": m} for m in ms]))
    return records


def spiral_gaps(m: int) -> np.ndarray:
    """``|p_k - p_{k+1}|`` for ``k = 1 .. m/2 - 1``."""
    upper = spiral_poles(m).poles[0::2]
    return np.abs(np.diff(upper))

