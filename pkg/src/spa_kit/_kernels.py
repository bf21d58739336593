"""Backend selection for the numeric hot loops.

The compiled ``_ckernels`` module is used when it imports; otherwise the
pure-numpy ``_pykernels`` module. Setting ``SPA_KIT_PURE_PYTHON=1`` forces
the fallback.
"""
import os

import numpy as np

from . import _pykernels

python_backend = _pykernels
compiled_backend = None
if not os.environ.get("SPA_KIT_PURE_PYTHON"):
    try:
        from . import _ckernels as compiled_backend
    except ImportError:  # extension not built
        compiled_backend = None

backend = compiled_backend if compiled_backend is not None else python_backend


class FlatTerms:
    """Kernel-ready layout of a partial-fraction expansion."""

    __slots__ = ("poles", "orders", "coeffs", "origin", "shape")

    def __init__(self, terms, shape):
        n, m = shape
        poles, orders, coeffs = [], [], []
        origin = []
        for q, mats in terms:
            if q == 0:
                if len(mats) > len(origin):
                    origin.extend(np.zeros((n, m), dtype=complex)
                                  for _ in range(len(mats) - len(origin)))
                for j, c in enumerate(mats):
                    origin[j] = origin[j] + c
                continue
            for j, c in enumerate(mats, start=1):
                poles.append(q)
                orders.append(j)
                coeffs.append(c)
        self.poles = np.array(poles, dtype=complex)
        self.orders = np.array(orders, dtype=np.int64)
        self.coeffs = (np.ascontiguousarray(coeffs, dtype=complex) if coeffs
                       else np.zeros((0, n, m), dtype=complex))
        self.origin = (np.ascontiguousarray(origin, dtype=complex) if origin
                       else np.zeros((0, n, m), dtype=complex))
        self.shape = (n, m)

    def args(self):
        return self.poles, self.orders, self.coeffs, self.origin


def pf_eval(flat, z, impl=None):
    impl = impl or backend
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if not flat.poles.size and not flat.origin.shape[0]:
        return np.zeros((z.size,) + flat.shape, dtype=complex)
    return impl.pf_eval(*flat.args(), z)


def impulse_block(flat, k0, count, impl=None):
    impl = impl or backend
    return impl.impulse_block(*flat.args(), int(k0), int(count))


def impulse_energy(flat, T, impl=None):
    impl = impl or backend
    return float(impl.impulse_energy(*flat.args(), int(T)))


def min_dist(z, p, limit_radius=False, impl=None):
    impl = impl or backend
    return impl.min_dist(np.asarray(z, dtype=complex), np.asarray(p, dtype=complex),
                         bool(limit_radius))
