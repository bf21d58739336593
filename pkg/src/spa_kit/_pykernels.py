"""Pure-numpy kernels; the reference backend and the fallback when the
compiled module is unavailable.

All functions take the flattened term layout used by ``_kernels``: one row
per ``(pole, order)`` pair with its coefficient matrix. Terms with a pole at
the origin are passed separately as ``origin`` (row ``k-1`` holds the summed
coefficient of ``z**-k``) because they only contribute to a single sample.
"""
import numpy as np
from scipy.special import gammaln

NAME = "python"

# bound on N*K temporaries in the vectorized evaluation
_CHUNK = 1 << 21


def pf_eval(poles, orders, coeffs, origin, z):
    """Evaluate ``sum_t coeffs[t] / (z - poles[t])**orders[t]`` at every ``z``."""
    z = np.asarray(z, dtype=complex)
    n, m = coeffs.shape[1:] if coeffs.ndim == 3 else origin.shape[1:]
    out = np.zeros((z.size, n, m), dtype=complex)
    k = len(poles)
    if k:
        step = max(1, _CHUNK // k)
        flat = coeffs.reshape(k, n * m)
        for s in range(0, z.size, step):
            zz = z[s:s + step]
            w = (zz[:, None] - poles[None, :]) ** (-orders[None, :])
            out[s:s + step] = (w @ flat).reshape(-1, n, m)
    if len(origin):
        flat = origin.reshape(len(origin), n * m)
        powers = np.arange(1, len(origin) + 1)
        step = max(1, _CHUNK // len(origin))
        for s in range(0, z.size, step):
            zz = z[s:s + step]
            w = zz[:, None] ** (-powers[None, :])
            out[s:s + step] += (w @ flat).reshape(-1, n, m)
    return out


def _term_weights(q, j, k):
    """binom(k-1, j-1) * q**(k-j) for integer array k, zero where k < j."""
    w = np.zeros(k.shape, dtype=complex)
    mask = k >= j
    kk = k[mask].astype(float)
    logbinom = gammaln(kk) - gammaln(j) - gammaln(kk - j + 1) if j > 1 else 0.0
    e = kk - j
    logmag = logbinom + e * np.log(abs(q))
    if q.imag == 0.0:
        sign = np.where((e % 2 == 1) & (q.real < 0), -1.0, 1.0)
        w[mask] = sign * np.exp(logmag)
    else:
        w[mask] = np.exp(logmag + 1j * e * np.angle(q))
    return w


def impulse_block(poles, orders, coeffs, origin, k0, count):
    """Impulse samples ``k0 .. k0+count-1`` as a ``(count, n, m)`` array."""
    n, m = coeffs.shape[1:] if coeffs.ndim == 3 else origin.shape[1:]
    k = np.arange(k0, k0 + count)
    out = np.zeros((count, n, m), dtype=complex)
    for t in range(len(poles)):
        w = _term_weights(complex(poles[t]), int(orders[t]), k)
        out += w[:, None, None] * coeffs[t]
    lo, hi = max(k0, 1), min(k0 + count - 1, len(origin))
    if lo <= hi:
        out[lo - k0:hi - k0 + 1] += origin[lo - 1:hi]
    return out


def impulse_energy(poles, orders, coeffs, origin, T):
    """Sum of squared Frobenius norms of impulse samples ``1 .. T``."""
    total = 0.0
    step = 1 << 15
    for k0 in range(1, T + 1, step):
        blk = impulse_block(poles, orders, coeffs, origin, k0, min(step, T - k0 + 1))
        total += float(np.sum(blk.real ** 2 + blk.imag ** 2))
    return total


def min_dist(z, p, limit_radius=False):
    """For each ``z`` the distance to the nearest ``p``.

    With ``limit_radius`` only poles with ``|p| <= |z|`` are eligible, plus
    ``p[0]`` which is always eligible.
    """
    z = np.asarray(z, dtype=complex)
    p = np.asarray(p, dtype=complex)
    out = np.empty(z.size)
    step = max(1, _CHUNK // max(p.size, 1))
    pr = np.abs(p)
    for s in range(0, z.size, step):
        zz = z[s:s + step]
        d = np.abs(zz[:, None] - p[None, :])
        if limit_radius:
            ok = pr[None, :] <= np.abs(zz)[:, None]
            ok[:, 0] = True
            d = np.where(ok, d, np.inf)
        out[s:s + step] = d.min(axis=1)
    return out
