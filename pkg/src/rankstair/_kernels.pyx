# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops for F_q and F_{q^m} arithmetic.

Every function here has a numpy twin in ``_purekernels`` with the same
signature and the same output, bit for bit.  Field tables come from
``rankstair.fields.BaseField``: ``exp`` has length 2(q-1) so that
``exp[log a + log b]`` never needs a modulo, ``log[0]`` is -1, and ``zech[n]``
is ``log(1 + g^n)`` (-1 when that sum vanishes).
"""

import numpy as np

from libc.stdint cimport int64_t, uint64_t
from libc.stdlib cimport malloc, free
from libc.string cimport memset, memcpy


cdef extern from *:
    int __builtin_clzll(unsigned long long) nogil
    int __builtin_ctzll(unsigned long long) nogil


cdef struct Ctx:
    const int64_t* exp
    const int64_t* log
    const int64_t* zech
    int64_t p
    int64_t q
    int64_t mode
    int64_t half


cdef inline int64_t fmul(const Ctx* c, int64_t a, int64_t b) noexcept nogil:
    if a == 0 or b == 0:
        return 0
    return c.exp[c.log[a] + c.log[b]]


cdef inline int64_t fadd(const Ctx* c, int64_t a, int64_t b) noexcept nogil:
    cdef int64_t r, d, z
    if c.mode == 0:
        return a ^ b
    if c.mode == 1:
        r = a + b
        if r >= c.p:
            r -= c.p
        return r
    if a == 0:
        return b
    if b == 0:
        return a
    d = c.log[b] - c.log[a]
    if d < 0:
        d += c.q - 1
    z = c.zech[d]
    if z < 0:
        return 0
    return c.exp[c.log[a] + z]


cdef inline int64_t fneg(const Ctx* c, int64_t a) noexcept nogil:
    if c.mode == 0 or a == 0:
        return a
    if c.mode == 1:
        return c.p - a
    return c.exp[c.log[a] + c.half]


cdef inline int64_t finv(const Ctx* c, int64_t a) noexcept nogil:
    return c.exp[c.q - 1 - c.log[a]]


cdef inline Ctx _ctx(object F, const int64_t[::1] exp, const int64_t[::1] log,
                     const int64_t[::1] zech):
    cdef Ctx c
    c.exp = &exp[0]
    c.log = &log[0]
    c.zech = &zech[0]
    c.p = F.p
    c.q = F.q
    c.mode = F.mode
    c.half = F.half
    return c


cdef inline bint _nonzero(const int64_t* a, Py_ssize_t m) noexcept nogil:
    cdef Py_ssize_t i
    for i in range(m):
        if a[i] != 0:
            return True
    return False


cdef void _poly_acc(const Ctx* c, const int64_t* a, const int64_t* b,
                    int64_t* acc, Py_ssize_t m) noexcept nogil:
    # acc[0 .. 2m-2] += a * b
    cdef Py_ssize_t u, v
    cdef int64_t la
    for u in range(m):
        if a[u] == 0:
            continue
        la = c.log[a[u]]
        if c.mode == 0:
            for v in range(m):
                if b[v] != 0:
                    acc[u + v] ^= c.exp[la + c.log[b[v]]]
        else:
            for v in range(m):
                if b[v] != 0:
                    acc[u + v] = fadd(c, acc[u + v], c.exp[la + c.log[b[v]]])


cdef void _poly_acc_logs(const Ctx* c, const int64_t* la, const int64_t* lb,
                         int64_t* acc, Py_ssize_t m) noexcept nogil:
    # same as _poly_acc with both operands given as log tables (-1 for zero)
    cdef Py_ssize_t u, v
    cdef int64_t x
    for u in range(m):
        x = la[u]
        if x < 0:
            continue
        if c.mode == 0:
            for v in range(m):
                if lb[v] >= 0:
                    acc[u + v] ^= c.exp[x + lb[v]]
        else:
            for v in range(m):
                if lb[v] >= 0:
                    acc[u + v] = fadd(c, acc[u + v], c.exp[x + lb[v]])


cdef void _reduce(const Ctx* c, int64_t* acc, const int64_t* negmod,
                  Py_ssize_t m, int64_t* out) noexcept nogil:
    # acc has length 2m-1 and is destroyed; negmod[i] = -f_i, f monic of degree m
    cdef Py_ssize_t d, i
    cdef int64_t lc
    for d in range(2 * m - 2, m - 1, -1):
        if acc[d] == 0:
            continue
        lc = c.log[acc[d]]
        for i in range(m):
            if negmod[i] != 0:
                acc[d - m + i] = fadd(c, acc[d - m + i], c.exp[lc + c.log[negmod[i]]])
        acc[d] = 0
    for i in range(m):
        out[i] = acc[i]


cdef void _mul_into(const Ctx* c, const int64_t* a, const int64_t* b, const int64_t* negmod,
                    Py_ssize_t m, int64_t* acc, int64_t* out) noexcept nogil:
    memset(acc, 0, (2 * m - 1) * sizeof(int64_t))
    _poly_acc(c, a, b, acc, m)
    _reduce(c, acc, negmod, m, out)


cdef int _inv_into(const Ctx* c, const int64_t* a, const int64_t* mod, Py_ssize_t m,
                   int64_t* out, int64_t* work) noexcept nogil:
    # extended Euclid in F_q[x]; work needs 2*(m+1) + 2*(2m+2) slots
    cdef int64_t* r0 = work
    cdef int64_t* r1 = work + (m + 1)
    cdef int64_t* s0 = work + 2 * (m + 1)
    cdef int64_t* s1 = work + 2 * (m + 1) + (2 * m + 2)
    cdef int64_t* tmp
    cdef Py_ssize_t dr0, dr1, ds0, ds1, shift, i, t
    cdef int64_t lead_inv, nco
    memset(work, 0, (2 * (m + 1) + 2 * (2 * m + 2)) * sizeof(int64_t))
    for i in range(m + 1):
        r0[i] = mod[i]
    for i in range(m):
        r1[i] = a[i]
    dr0 = m
    dr1 = m - 1
    while dr1 >= 0 and r1[dr1] == 0:
        dr1 -= 1
    if dr1 < 0:
        return -1
    ds0 = -1
    s1[0] = 1
    ds1 = 0
    while dr1 > 0:
        lead_inv = finv(c, r1[dr1])
        while dr0 >= dr1:
            nco = fneg(c, fmul(c, r0[dr0], lead_inv))
            shift = dr0 - dr1
            for i in range(dr1 + 1):
                r0[i + shift] = fadd(c, r0[i + shift], fmul(c, nco, r1[i]))
            for i in range(ds1 + 1):
                s0[i + shift] = fadd(c, s0[i + shift], fmul(c, nco, s1[i]))
            if ds1 + shift > ds0:
                ds0 = ds1 + shift
            while dr0 >= 0 and r0[dr0] == 0:
                dr0 -= 1
        while ds0 >= 0 and s0[ds0] == 0:
            ds0 -= 1
        tmp = r0; r0 = r1; r1 = tmp
        tmp = s0; s0 = s1; s1 = tmp
        t = dr0; dr0 = dr1; dr1 = t
        t = ds0; ds0 = ds1; ds1 = t
    if dr1 < 0:
        return -1
    lead_inv = finv(c, r1[0])
    for i in range(m):
        out[i] = fmul(c, s1[i], lead_inv) if i <= ds1 else 0
    return 0


def _negmod(F, const int64_t[::1] modulus):
    m = modulus.shape[0] - 1
    return np.ascontiguousarray(F.neg(np.asarray(modulus[:m])), dtype=np.int64)


def ext_mul(F, const int64_t[::1] modulus, const int64_t[:, ::1] a, const int64_t[:, ::1] b):
    """Row-wise product of two (N, m) coordinate arrays modulo ``modulus``."""
    cdef const int64_t[::1] exp = F.exp
    cdef const int64_t[::1] log = F.log
    cdef const int64_t[::1] zech = F.zech
    cdef Ctx c = _ctx(F, exp, log, zech)
    cdef Py_ssize_t n = a.shape[0], m = a.shape[1], i
    cdef const int64_t[::1] negmod = _negmod(F, modulus)
    out_arr = np.zeros((n, m), dtype=np.int64)
    cdef int64_t[:, ::1] out = out_arr
    cdef int64_t* acc = <int64_t*> malloc((2 * m + 1) * sizeof(int64_t))
    try:
        with nogil:
            for i in range(n):
                _mul_into(&c, &a[i, 0], &b[i, 0], &negmod[0], m, acc, &out[i, 0])
    finally:
        free(acc)
    return out_arr


def ext_inv(F, const int64_t[::1] modulus, const int64_t[:, ::1] a):
    """Row-wise inverse of an (N, m) coordinate array; raises on zero."""
    cdef const int64_t[::1] exp = F.exp
    cdef const int64_t[::1] log = F.log
    cdef const int64_t[::1] zech = F.zech
    cdef Ctx c = _ctx(F, exp, log, zech)
    cdef Py_ssize_t n = a.shape[0], m = a.shape[1], i
    cdef int status = 0
    out_arr = np.zeros((n, m), dtype=np.int64)
    cdef int64_t[:, ::1] out = out_arr
    cdef int64_t* work = <int64_t*> malloc((6 * m + 8) * sizeof(int64_t))
    try:
        with nogil:
            for i in range(n):
                status = _inv_into(&c, &a[i, 0], &modulus[0], m, &out[i, 0], work)
                if status != 0:
                    break
    finally:
        free(work)
    if status != 0:
        raise ZeroDivisionError("element is not invertible")
    return out_arr


def ext_matmul(F, const int64_t[::1] modulus, const int64_t[:, :, ::1] A, const int64_t[:, :, ::1] B):
    """(r, k, m) @ (k, c, m) over F_{q^m}."""
    cdef const int64_t[::1] exp = F.exp
    cdef const int64_t[::1] log = F.log
    cdef const int64_t[::1] zech = F.zech
    cdef Ctx c = _ctx(F, exp, log, zech)
    cdef Py_ssize_t r = A.shape[0], k = A.shape[1], m = A.shape[2], cc = B.shape[1]
    cdef Py_ssize_t i, j, l
    cdef const int64_t[::1] negmod = _negmod(F, modulus)
    logs_a = np.asarray(F.log)[np.asarray(A)]
    logs_b = np.asarray(F.log)[np.asarray(B)]
    cdef const int64_t[:, :, ::1] la = np.ascontiguousarray(logs_a, dtype=np.int64)
    cdef const int64_t[:, :, ::1] lb = np.ascontiguousarray(logs_b, dtype=np.int64)
    out_arr = np.zeros((r, cc, m), dtype=np.int64)
    cdef int64_t[:, :, ::1] out = out_arr
    if k == 0 or m == 0:
        return out_arr
    cdef int64_t* acc = <int64_t*> malloc((2 * m + 1) * sizeof(int64_t))
    try:
        with nogil:
            for i in range(r):
                for j in range(cc):
                    memset(acc, 0, (2 * m - 1) * sizeof(int64_t))
                    for l in range(k):
                        _poly_acc_logs(&c, &la[i, l, 0], &lb[l, j, 0], acc, m)
                    _reduce(&c, acc, &negmod[0], m, &out[i, j, 0])
    finally:
        free(acc)
    return out_arr


def ext_rref(F, const int64_t[::1] modulus, M_in):
    """Reduced row echelon form over F_{q^m}; pivots chosen as first nonzero in column order."""
    cdef const int64_t[::1] exp = F.exp
    cdef const int64_t[::1] log = F.log
    cdef const int64_t[::1] zech = F.zech
    cdef Ctx c = _ctx(F, exp, log, zech)
    M_arr = np.array(M_in, dtype=np.int64, order="C", copy=True)
    cdef int64_t[:, :, ::1] M = M_arr
    cdef Py_ssize_t R = M.shape[0], C = M.shape[1], m = M.shape[2]
    cdef Py_ssize_t row = 0, col, r, j, piv, i
    cdef const int64_t[::1] negmod = _negmod(F, modulus)
    cdef int64_t* acc = <int64_t*> malloc((2 * m + 1) * sizeof(int64_t))
    cdef int64_t* work = <int64_t*> malloc((6 * m + 8) * sizeof(int64_t))
    cdef int64_t* inv = <int64_t*> malloc((m + 1) * sizeof(int64_t))
    cdef int64_t* fac = <int64_t*> malloc((m + 1) * sizeof(int64_t))
    cdef int64_t* prod = <int64_t*> malloc((m + 1) * sizeof(int64_t))
    cdef int64_t* swap = <int64_t*> malloc((C * m + 1) * sizeof(int64_t))
    pivots = []
    try:
        for col in range(C):
            if row == R:
                break
            piv = -1
            for r in range(row, R):
                if _nonzero(&M[r, col, 0], m):
                    piv = r
                    break
            if piv < 0:
                continue
            with nogil:
                if piv != row:
                    memcpy(swap, &M[row, 0, 0], C * m * sizeof(int64_t))
                    memcpy(&M[row, 0, 0], &M[piv, 0, 0], C * m * sizeof(int64_t))
                    memcpy(&M[piv, 0, 0], swap, C * m * sizeof(int64_t))
                _inv_into(&c, &M[row, col, 0], &modulus[0], m, inv, work)
                for j in range(col, C):
                    if _nonzero(&M[row, j, 0], m):
                        _mul_into(&c, &M[row, j, 0], inv, &negmod[0], m, acc, prod)
                        memcpy(&M[row, j, 0], prod, m * sizeof(int64_t))
                for r in range(R):
                    if r == row or not _nonzero(&M[r, col, 0], m):
                        continue
                    for i in range(m):
                        fac[i] = fneg(&c, M[r, col, i])
                    for j in range(col, C):
                        if _nonzero(&M[row, j, 0], m):
                            _mul_into(&c, fac, &M[row, j, 0], &negmod[0], m, acc, prod)
                            for i in range(m):
                                M[r, j, i] = fadd(&c, M[r, j, i], prod[i])
            pivots.append(col)
            row += 1
    finally:
        free(acc); free(work); free(inv); free(fac); free(prod); free(swap)
    return M_arr, pivots


def base_matmul(F, const int64_t[:, ::1] X, const int64_t[:, ::1] Y):
    """(a, b) @ (b, c) over F_q."""
    cdef const int64_t[::1] exp = F.exp
    cdef const int64_t[::1] log = F.log
    cdef const int64_t[::1] zech = F.zech
    cdef Ctx c = _ctx(F, exp, log, zech)
    cdef Py_ssize_t a = X.shape[0], b = X.shape[1], cc = Y.shape[1], i, j, l
    cdef int64_t x, lx
    out_arr = np.zeros((a, cc), dtype=np.int64)
    cdef int64_t[:, ::1] out = out_arr
    with nogil:
        for i in range(a):
            for l in range(b):
                x = X[i, l]
                if x == 0:
                    continue
                lx = c.log[x]
                for j in range(cc):
                    if Y[l, j] != 0:
                        out[i, j] = fadd(&c, out[i, j], c.exp[lx + c.log[Y[l, j]]])
    return out_arr


def base_rref(F, X_in):
    """Reduced row echelon form over F_q with first-nonzero pivoting."""
    cdef const int64_t[::1] exp = F.exp
    cdef const int64_t[::1] log = F.log
    cdef const int64_t[::1] zech = F.zech
    cdef Ctx c = _ctx(F, exp, log, zech)
    X_arr = np.array(X_in, dtype=np.int64, order="C", copy=True)
    cdef int64_t[:, ::1] X = X_arr
    cdef Py_ssize_t R = X.shape[0], C = X.shape[1], row = 0, col, r, j, piv
    cdef int64_t inv, f, t
    pivots = []
    for col in range(C):
        if row == R:
            break
        piv = -1
        for r in range(row, R):
            if X[r, col] != 0:
                piv = r
                break
        if piv < 0:
            continue
        with nogil:
            if piv != row:
                for j in range(C):
                    t = X[row, j]; X[row, j] = X[piv, j]; X[piv, j] = t
            inv = finv(&c, X[row, col])
            for j in range(col, C):
                X[row, j] = fmul(&c, X[row, j], inv)
            for r in range(R):
                if r == row or X[r, col] == 0:
                    continue
                f = fneg(&c, X[r, col])
                for j in range(col, C):
                    if X[row, j] != 0:
                        X[r, j] = fadd(&c, X[r, j], fmul(&c, f, X[row, j]))
        pivots.append(col)
        row += 1
    return X_arr, pivots


cdef inline int _rank_masks(const uint64_t* rows, Py_ssize_t n, uint64_t* piv) noexcept nogil:
    cdef Py_ssize_t i
    cdef int rank = 0, hb
    cdef uint64_t x
    memset(piv, 0, 64 * sizeof(uint64_t))
    for i in range(n):
        x = rows[i]
        while x:
            hb = 63 - __builtin_clzll(x)
            if piv[hb]:
                x ^= piv[hb]
            else:
                piv[hb] = x
                rank += 1
                break
    return rank


def gf2_min_rank(const uint64_t[:, ::1] basis, Py_ssize_t split):
    """Minimum GF(2) rank over all combinations of ``basis`` that use some vector at index >= split.

    Each basis vector is a stack of row bitmasks.  Returns -1 when no such
    combination exists.  Walks the binary reflected Gray code, one XOR per step.
    """
    cdef Py_ssize_t K = basis.shape[0], R = basis.shape[1], b, i
    cdef uint64_t step, total
    cdef int best = 1 << 30, rk
    cdef uint64_t piv[64]
    if split >= K:
        return -1
    if K >= 63:
        raise ValueError("enumeration too large")
    cur_arr = np.zeros(R, dtype=np.uint64)
    cdef uint64_t[::1] cur = cur_arr
    total = (<uint64_t> 1) << K
    with nogil:
        step = 1
        while step < total:
            b = __builtin_ctzll(step)
            for i in range(R):
                cur[i] ^= basis[b, i]
            if (step >> split) != 0:
                rk = _rank_masks(&cur[0], R, piv)
                if rk < best:
                    best = rk
            step += 1
    return best
