"""Numpy implementations of the hot loops.

Used when the compiled extension is unavailable or RANKSTAIR_PURE=1.  The
signatures and outputs match ``_kernels`` exactly.
"""

import numpy as np


def _mul(F, a, b):
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    out = F.exp[F.log[a] + F.log[b]]
    return np.where((a == 0) | (b == 0), 0, out)


def _add(F, a, b):
    if F.mode == 0:
        return np.bitwise_xor(a, b)
    if F.mode == 1:
        return (a + b) % F.p
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    la = F.log[a]
    lb = F.log[b]
    d = (lb - la) % (F.q - 1)
    z = F.zech[d]
    s = np.where(z < 0, 0, F.exp[np.maximum(la, 0) + np.maximum(z, 0)])
    return np.where(a == 0, b, np.where(b == 0, a, s))


def _sum(F, x, axis):
    if F.mode == 0:
        return np.bitwise_xor.reduce(x, axis=axis)
    if F.mode == 1:
        return x.sum(axis=axis) % F.p
    x = np.moveaxis(x, axis, 0)
    acc = np.zeros(x.shape[1:], dtype=np.int64)
    for part in x:
        acc = _add(F, acc, part)
    return acc


def _neg(F, a):
    a = np.asarray(a, dtype=np.int64)
    if F.mode == 0:
        return a.copy()
    if F.mode == 1:
        return np.where(a == 0, 0, F.p - a)
    return np.where(a == 0, 0, F.exp[F.log[a] + F.half])


def _poly_products(F, a, b):
    # unreduced products of broadcast coordinate arrays, shape (..., 2m-1)
    m = a.shape[-1]
    shape = np.broadcast_shapes(a.shape, b.shape)[:-1]
    acc = np.zeros(shape + (2 * m - 1,), dtype=np.int64)
    for u in range(m):
        acc[..., u:u + m] = _add(F, acc[..., u:u + m], _mul(F, a[..., u:u + 1], b))
    return acc


def _reduce(F, negmod, acc):
    m = negmod.shape[0]
    acc = acc.copy()
    for d in range(acc.shape[-1] - 1, m - 1, -1):
        top = acc[..., d:d + 1]
        acc[..., d - m:d] = _add(F, acc[..., d - m:d], _mul(F, top, negmod))
    return acc[..., :m].copy()


def _negmod(F, modulus):
    m = len(modulus) - 1
    return _neg(F, np.asarray(modulus[:m], dtype=np.int64))


def ext_mul(F, modulus, a, b):
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    return _reduce(F, _negmod(F, modulus), _poly_products(F, a, b))


def _scalar_inv(F, a):
    return int(F.exp[F.q - 1 - F.log[a]])


_FROB_CACHE = {}


def _frobenius_powers(F, modulus):
    """[Phi^(2^i)] where a^q = a @ Phi in power-basis coordinates."""
    key = (F.p, F.poly, np.asarray(modulus, dtype=np.int64).tobytes())
    if key in _FROB_CACHE:
        return _FROB_CACHE[key]
    m = len(modulus) - 1
    negmod = _negmod(F, modulus)
    x = np.zeros((1, m), dtype=np.int64)
    x[0, 1] = 1
    xq = np.zeros((1, m), dtype=np.int64)
    xq[0, 0] = 1
    e, base = F.q, x
    while e:
        if e & 1:
            xq = _reduce(F, negmod, _poly_products(F, xq, base))
        e >>= 1
        if e:
            base = _reduce(F, negmod, _poly_products(F, base, base))
    rows = [np.eye(1, m, dtype=np.int64)[0]]
    for _ in range(1, m):
        rows.append(_reduce(F, negmod, _poly_products(F, rows[-1][None], xq))[0])
    phi = np.stack(rows)
    powers = [phi]
    while (1 << len(powers)) < m:
        powers.append(base_matmul(F, powers[-1], powers[-1]))
    _FROB_CACHE[key] = powers
    return powers


def _frob(F, powers, a, k):
    # a^(q^k) via the binary expansion of k
    i = 0
    while k:
        if k & 1:
            a = base_matmul(F, a, powers[i])
        k >>= 1
        i += 1
    return a


def ext_inv(F, modulus, a):
    """Itoh-Tsujii: a^-1 = a^(r-1) / a^r with r = (q^m - 1)/(q - 1) and a^r in F_q."""
    a = np.asarray(a, dtype=np.int64)
    m = a.shape[-1]
    flat = a.reshape(-1, m)
    if not flat.any(axis=1).all():
        raise ZeroDivisionError("element is not invertible")
    if m == 1:
        lg = F.log[flat[:, 0]]
        return F.exp[(F.q - 1 - lg) % (F.q - 1)].reshape(a.shape)
    negmod = _negmod(F, modulus)
    powers = _frobenius_powers(F, modulus)

    def mul(x, y):
        return _reduce(F, negmod, _poly_products(F, x, y))

    # P(k) = a^(1 + q + ... + q^(k-1)), built along the bits of m - 1
    target = m - 1
    P, k = flat, 1
    for bit in bin(target)[3:]:
        P = mul(P, _frob(F, powers, P, k))
        k *= 2
        if bit == "1":
            P = mul(flat, _frob(F, powers, P, 1))
            k += 1
    head = _frob(F, powers, P, 1)  # a^(q + ... + q^(m-1))
    norm = mul(flat, head)[:, 0]
    inv_norm = F.exp[(F.q - 1 - F.log[norm]) % (F.q - 1)]
    return _mul(F, head, inv_norm[:, None]).reshape(a.shape)


def ext_matmul(F, modulus, A, B):
    A = np.asarray(A, dtype=np.int64)
    B = np.asarray(B, dtype=np.int64)
    r, k, m = A.shape
    c = B.shape[1]
    acc = np.zeros((r, c, 2 * m - 1), dtype=np.int64)
    for l in range(k):
        acc = _add(F, acc, _poly_products(F, A[:, l, None, :], B[None, l, :, :]))
    return _reduce(F, _negmod(F, modulus), acc)


def ext_rref(F, modulus, M):
    M = np.array(M, dtype=np.int64, copy=True)
    R, C, m = M.shape
    negmod = _negmod(F, modulus)
    pivots = []
    row = 0
    for col in range(C):
        if row == R:
            break
        nz = np.flatnonzero(M[row:, col].any(axis=1))
        if nz.size == 0:
            continue
        piv = row + nz[0]
        if piv != row:
            M[[row, piv]] = M[[piv, row]]
        inv = ext_inv(F, modulus, M[row, col][None])[0]
        M[row] = _reduce(F, negmod, _poly_products(F, M[row], inv[None, :]))
        others = np.flatnonzero(M[:, col].any(axis=1))
        others = others[others != row]
        if others.size:
            fac = _neg(F, M[others, col])[:, None, :]
            prod = _reduce(F, negmod, _poly_products(F, fac, M[row][None, :, :]))
            M[others] = _add(F, M[others], prod)
        pivots.append(col)
        row += 1
    return M, pivots


def base_matmul(F, X, Y):
    X = np.asarray(X, dtype=np.int64)
    Y = np.asarray(Y, dtype=np.int64)
    out = np.zeros((X.shape[0], Y.shape[1]), dtype=np.int64)
    for l in range(X.shape[1]):
        out = _add(F, out, _mul(F, X[:, l, None], Y[None, l, :]))
    return out


def base_rref(F, X):
    X = np.array(X, dtype=np.int64, copy=True)
    R, C = X.shape
    pivots = []
    row = 0
    for col in range(C):
        if row == R:
            break
        nz = np.flatnonzero(X[row:, col])
        if nz.size == 0:
            continue
        piv = row + nz[0]
        if piv != row:
            X[[row, piv]] = X[[piv, row]]
        X[row] = _mul(F, X[row], _scalar_inv(F, X[row, col]))
        others = np.flatnonzero(X[:, col])
        others = others[others != row]
        if others.size:
            fac = _neg(F, X[others, col])[:, None]
            X[others] = _add(F, X[others], _mul(F, fac, X[row][None, :]))
        pivots.append(col)
        row += 1
    return X, pivots


def _rank_masks(rows):
    piv = {}
    rank = 0
    for x in rows:
        while x:
            hb = x.bit_length() - 1
            if hb in piv:
                x ^= piv[hb]
            else:
                piv[hb] = x
                rank += 1
                break
    return rank


def gf2_min_rank(basis, split):
    K, R = basis.shape
    if split >= K:
        return -1
    vecs = [[int(v) for v in row] for row in basis]
    cur = [0] * R
    best = 1 << 30
    for step in range(1, 1 << K):
        b = (step & -step).bit_length() - 1
        vb = vecs[b]
        cur = [c ^ v for c, v in zip(cur, vb)]
        if step >> split:
            best = min(best, _rank_masks(cur))
    return best
