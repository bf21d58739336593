"""H2 and H-infinity norms of partial-fraction systems.

H2 sums squared impulse samples up to a truncation length chosen from a
rigorous tail bound. H-infinity maximizes the spectral norm of S on the unit
circle: a fixed uniform grid, then golden-section refinement around the best
grid point. The block-Toeplitz estimate is an independent cross-check.
"""
import math

import numpy as np
from scipy.linalg import svdvals

from . import _kernels
from .errors import DimensionMismatch
from .tfcore import RationalSystem, check_realness, impulse_response, truncation_length

GRID_SIZE = 8192
MAX_REFINE = 200
_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0

__all__ = [
    "h2_norm",
    "hinf_norm",
    "hinf_norm_toeplitz",
    "h2_distance",
    "hinf_distance",
    "spectral_norms",
    "block_toeplitz",
]


def spectral_norms(values: np.ndarray) -> np.ndarray:
    """Largest singular value of each matrix in a ``(N, n, m)`` stack."""
    if values.shape[1:] == (1, 1):
        return np.abs(values[:, 0, 0])
    return np.linalg.svd(values, compute_uv=False)[:, 0]


def _gain(S, theta):
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    return spectral_norms(_kernels.pf_eval(S.flat, np.exp(1j * theta)))


def h2_norm(S: RationalSystem, tol: float = 1e-8) -> float:
    """``||S||_H2`` to within ``tol``.

    The truncation length ``T`` is the smallest one for which the analytic
    tail bound is below ``tol``; raises ``TruncationOverflow`` past the cap.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if not S.terms:
        return 0.0
    T = truncation_length(S, tol)
    return math.sqrt(_kernels.impulse_energy(S.flat, T))


def hinf_norm(S: RationalSystem, tol: float = 1e-8) -> float:
    """``sup_{|z|=1} ||S(z)||_2``, estimated from below.

    For conjugate-closed systems only the upper half circle is sampled
    (``||S(conj z)|| = ||S(z)||``). The two grid cells around the best grid
    point are then refined by golden-section search until the bracket width
    times a secant slope estimate drops below ``tol``.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if not S.terms:
        return 0.0
    if check_realness(S).passed:
        theta = np.linspace(0.0, math.pi, GRID_SIZE)
    else:
        theta = np.linspace(0.0, 2.0 * math.pi, 2 * GRID_SIZE, endpoint=False)
    vals = _gain(S, theta)
    i = int(np.argmax(vals))
    best = float(vals[i])
    step = theta[1] - theta[0]
    a, b = theta[i] - step, theta[i] + step
    fa, fb = float(_gain(S, a)[0]), float(_gain(S, b)[0])
    x, fx = theta[i], best
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = float(_gain(S, c)[0]), float(_gain(S, d)[0])
    for _ in range(MAX_REFINE):
        for t, ft in ((c, fc), (d, fd)):
            if ft > fx:
                x, fx = t, ft
        best = max(best, fx)
        slope = max(abs(fb - fx) / max(b - x, 1e-300), abs(fx - fa) / max(x - a, 1e-300))
        if (b - a) * slope < tol or b - a < 1e-14:
            break
        if fc >= fd:
            b, fb = d, fd
            d, fd = c, fc
            c = b - _INVPHI * (b - a)
            fc = float(_gain(S, c)[0])
        else:
            a, fa = c, fc
            c, fc = d, fd
            d = a + _INVPHI * (b - a)
            fd = float(_gain(S, d)[0])
    return max(best, fc, fd)


def block_toeplitz(samples: np.ndarray) -> np.ndarray:
    """Block lower-triangular Toeplitz matrix of the convolution with
    ``samples[0..T-1]`` (``samples[k-1]`` is the response at time ``k``)."""
    T, n, m = samples.shape
    M = np.zeros((T * n, T * m), dtype=samples.dtype)
    for i in range(T):
        for j in range(i + 1):
            M[i * n:(i + 1) * n, j * m:(j + 1) * m] = samples[i - j]
    return M


def hinf_norm_toeplitz(S: RationalSystem, T: int) -> float:
    """Largest singular value of the ``T``-step truncated convolution operator.

    Nondecreasing in ``T`` and converges to ``||S||_Hinf`` from below. Cost
    grows as ``T**3``.
    """
    if T < 1:
        raise ValueError("T must be >= 1")
    if not S.terms:
        return 0.0
    samples = impulse_response(S, T).samples
    return float(svdvals(block_toeplitz(samples))[0])


def _difference(S1, S2):
    if S1.dims != S2.dims:
        raise DimensionMismatch(f"dims differ: {S1.dims} vs {S2.dims}")
    return S1 - S2


def h2_distance(S1: RationalSystem, S2: RationalSystem, tol: float = 1e-8) -> float:
    return h2_norm(_difference(S1, S2), tol)


def hinf_distance(S1: RationalSystem, S2: RationalSystem, tol: float = 1e-8) -> float:
    return hinf_norm(_difference(S1, S2), tol)
