"""Backend selection for the arithmetic kernels.

The compiled module is used when it imports; setting ``RANKSTAIR_PURE=1``
forces the numpy fallback.  ``BACKEND`` names the active one.
"""

import os

import numpy as np

from . import _purekernels

if os.environ.get("RANKSTAIR_PURE"):
    _impl = _purekernels
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _purekernels

BACKEND = "compiled" if _impl is not _purekernels else "pure"


def _c(x):
    return np.ascontiguousarray(x, dtype=np.int64)


def use(name):
    """Switch backend at runtime ("compiled" or "pure"); returns the previous name."""
    global _impl, BACKEND
    prev = BACKEND
    if name == "pure":
        _impl = _purekernels
    elif name == "compiled":
        from . import _kernels
        _impl = _kernels
    else:
        raise ValueError(f"unknown backend {name!r}")
    BACKEND = name
    return prev


def ext_mul(F, modulus, a, b):
    a, b = np.broadcast_arrays(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64))
    shape = a.shape
    m = shape[-1]
    out = _impl.ext_mul(F, _c(modulus), _c(a.reshape(-1, m)), _c(b.reshape(-1, m)))
    return out.reshape(shape)


def ext_inv(F, modulus, a):
    a = np.asarray(a, dtype=np.int64)
    m = a.shape[-1]
    return _impl.ext_inv(F, _c(modulus), _c(a.reshape(-1, m))).reshape(a.shape)


def _linearized(F, modulus, B):
    """(k m) x (c m) matrix over F_q of y -> y @ B acting on coordinate rows."""
    k, c, m = B.shape
    units = np.eye(m, dtype=np.int64)
    # entry (l, u, j, v): coordinate v of x^u * B[l, j]
    prod = ext_mul(F, modulus, units[None, :, None, :], B[:, None, :, :])
    return np.ascontiguousarray(prod.reshape(k * m, c * m))


def ext_matmul(F, modulus, A, B):
    A, B = _c(A), _c(B)
    if A.shape[1] != B.shape[0]:
        raise ValueError(f"shape mismatch {A.shape[:2]} @ {B.shape[:2]}")
    r, k, m = A.shape
    if k == 0:
        return np.zeros((r, B.shape[1], m), dtype=np.int64)
    if F.mode != 2 and m > 1 and r > 4 * m:
        # tall products: one integer matmul over F_q against the linearized B
        out = base_matmul(F, A.reshape(r, k * m), _linearized(F, modulus, B))
        return out.reshape(r, B.shape[1], m)
    return _impl.ext_matmul(F, _c(modulus), A, B)


def ext_rref(F, modulus, M):
    M = _c(M)
    if M.size == 0:
        return M.copy(), []
    return _impl.ext_rref(F, _c(modulus), M)


def base_matmul(F, X, Y):
    X, Y = _c(X), _c(Y)
    if X.shape[1] != Y.shape[0]:
        raise ValueError(f"shape mismatch {X.shape} @ {Y.shape}")
    if X.shape[1] == 0:
        return np.zeros((X.shape[0], Y.shape[1]), dtype=np.int64)
    if F.s == 1:
        inner = X.shape[1]
        if X.shape[0] * inner * Y.shape[1] > 1 << 16 and (F.p - 1) ** 2 * inner < 1 << 53:
            # BLAS in double precision is exact below 2^53
            prod = (X.astype(np.float64) @ Y.astype(np.float64)).astype(np.int64)
        else:
            prod = X @ Y
        return prod & 1 if F.q == 2 else prod % F.p
    return _impl.base_matmul(F, X, Y)


def base_rref(F, X):
    X = _c(X)
    if X.size == 0:
        return X.copy(), []
    return _impl.base_rref(F, X)


def gf2_min_rank(basis, split):
    return int(_impl.gf2_min_rank(np.ascontiguousarray(basis, dtype=np.uint64), int(split)))
