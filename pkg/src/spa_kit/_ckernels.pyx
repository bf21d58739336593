# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels. Same signatures and layout as ``_pykernels``."""
import numpy as np
cimport numpy as cnp
from libc.math cimport lgamma, log, exp, cos, sin, atan2, hypot, fabs, INFINITY

cnp.import_array()

NAME = "cython"


def pf_eval(const double complex[:] poles, const long[:] orders,
            const double complex[:, :, :] coeffs, const double complex[:, :, :] origin,
            z):
    cdef const double complex[:] zv = np.ascontiguousarray(z, dtype=complex).ravel()
    cdef Py_ssize_t N = zv.shape[0], K = poles.shape[0], L = origin.shape[0]
    cdef Py_ssize_t n, m
    if K:
        n, m = coeffs.shape[1], coeffs.shape[2]
    else:
        n, m = origin.shape[1], origin.shape[2]
    out_arr = np.zeros((N, n, m), dtype=complex)
    cdef double complex[:, :, :] out = out_arr
    cdef Py_ssize_t i, t, a, b, l
    cdef double complex zz, w, inv, acc
    cdef long e
    for i in range(N):
        zz = zv[i]
        for t in range(K):
            inv = 1.0 / (zz - poles[t])
            w = 1.0
            e = orders[t]
            while e > 0:
                w = w * inv
                e -= 1
            for a in range(n):
                for b in range(m):
                    out[i, a, b] = out[i, a, b] + w * coeffs[t, a, b]
        if L:
            inv = 1.0 / zz
            w = 1.0
            for l in range(L):
                w = w * inv
                for a in range(n):
                    for b in range(m):
                        out[i, a, b] = out[i, a, b] + w * origin[l, a, b]
    return out_arr


cdef double complex _start_weight(double complex q, long j, long k):
    # binom(k-1, j-1) * q**(k-j), zero for k < j
    cdef double logmag, e, ang
    if k < j:
        return 0.0
    e = <double>(k - j)
    logmag = e * log(hypot(q.real, q.imag))
    if j > 1:
        logmag += lgamma(<double>k) - lgamma(<double>j) - lgamma(e + 1.0)
    if q.imag == 0.0:
        if q.real < 0 and (k - j) % 2 == 1:
            return -exp(logmag)
        return exp(logmag)
    ang = e * atan2(q.imag, q.real)
    return exp(logmag) * (cos(ang) + 1j * sin(ang))


cdef inline bint _spent(double complex w, double qa, long k, long j):
    # past the peak the weights only shrink; flushing avoids subnormal arithmetic
    return fabs(w.real) < 1e-290 and fabs(w.imag) < 1e-290 and qa * k < k - j + 1


def impulse_block(const double complex[:] poles, const long[:] orders,
                  const double complex[:, :, :] coeffs, const double complex[:, :, :] origin,
                  long k0, long count):
    cdef Py_ssize_t K = poles.shape[0], L = origin.shape[0]
    cdef Py_ssize_t n, m
    if K:
        n, m = coeffs.shape[1], coeffs.shape[2]
    else:
        n, m = origin.shape[1], origin.shape[2]
    out_arr = np.zeros((count, n, m), dtype=complex)
    cdef double complex[:, :, :] out = out_arr
    cdef Py_ssize_t t, a, b, i
    cdef long k, j
    cdef double complex w, q
    for t in range(K):
        q = poles[t]
        j = orders[t]
        k = k0 if k0 > j else j
        if k >= k0 + count:
            continue
        w = _start_weight(q, j, k)
        while k < k0 + count:
            i = k - k0
            for a in range(n):
                for b in range(m):
                    out[i, a, b] = out[i, a, b] + w * coeffs[t, a, b]
            if _spent(w, hypot(q.real, q.imag), k, j):
                break
            w = w * q * (<double>k / <double>(k - j + 1))
            k += 1
    for k in range(max(k0, 1), min(k0 + count - 1, L) + 1):
        i = k - k0
        for a in range(n):
            for b in range(m):
                out[i, a, b] = out[i, a, b] + origin[k - 1, a, b]
    return out_arr


def impulse_energy(const double complex[:] poles, const long[:] orders,
                   const double complex[:, :, :] coeffs, const double complex[:, :, :] origin,
                   long T):
    cdef Py_ssize_t K = poles.shape[0], L = origin.shape[0]
    cdef Py_ssize_t n, m
    if K:
        n, m = coeffs.shape[1], coeffs.shape[2]
    else:
        n, m = origin.shape[1], origin.shape[2]
    w_arr = np.empty(K, dtype=complex)
    acc_arr = np.empty((n, m), dtype=complex)
    qa_arr = np.abs(np.asarray(poles))
    spent_arr = np.zeros(K, dtype=np.uint8)
    cdef double complex[:] w = w_arr
    cdef double complex[:, :] acc = acc_arr
    cdef double[:] qa = qa_arr
    cdef unsigned char[:] spent = spent_arr
    cdef Py_ssize_t t, a, b
    cdef long k
    cdef double total = 0.0
    cdef double complex v
    for t in range(K):
        w[t] = 0.0
    for k in range(1, T + 1):
        for a in range(n):
            for b in range(m):
                acc[a, b] = 0.0
        for t in range(K):
            if spent[t] or k < orders[t]:
                continue
            if k == orders[t]:
                w[t] = 1.0
            else:
                w[t] = w[t] * poles[t] * (<double>(k - 1) / <double>(k - orders[t]))
            if _spent(w[t], qa[t], k, orders[t]):
                spent[t] = 1
            for a in range(n):
                for b in range(m):
                    acc[a, b] = acc[a, b] + w[t] * coeffs[t, a, b]
        if k <= L:
            for a in range(n):
                for b in range(m):
                    acc[a, b] = acc[a, b] + origin[k - 1, a, b]
        for a in range(n):
            for b in range(m):
                v = acc[a, b]
                total += v.real * v.real + v.imag * v.imag
    return total


def min_dist(z, p, bint limit_radius=False):
    cdef const double complex[:] zv = np.ascontiguousarray(z, dtype=complex).ravel()
    cdef const double complex[:] pv = np.ascontiguousarray(p, dtype=complex).ravel()
    cdef Py_ssize_t N = zv.shape[0], M = pv.shape[0], i, l
    out_arr = np.empty(N)
    cdef double[:] out = out_arr
    # moduli via numpy so the eligibility test matches the fallback bit for bit
    pr_arr = np.abs(np.asarray(pv))
    zr_arr = np.abs(np.asarray(zv))
    cdef double[:] pr = pr_arr
    cdef double[:] zr = zr_arr
    cdef double best, d
    for i in range(N):
        best = INFINITY
        for l in range(M):
            if limit_radius and l > 0 and pr[l] > zr[i]:
                continue
            d = hypot(zv[i].real - pv[l].real, zv[i].imag - pv[l].imag)
            if d < best:
                best = d
        out[i] = best
    return out_arr
