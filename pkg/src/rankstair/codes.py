"""Rank-metric codes over F_{q^m}: Gabidulin codes, their cartesian products,
nested pairs, brute-force distance oracles and the coherent decoder.

Gabidulin codes use the evaluation form: row i of the generator holds
gamma_j^(q^i), so the generator of the k-dimensional code is the k-row prefix
of the generator of the (k+1)-dimensional one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .fields import FieldTower, batch_rank_q, matmul_mixed, rank_q

ENUM_BUDGET = 1 << 24


class DecodingFailure(Exception):
    """The received word is not within decoding capability of any coset."""

    def __init__(self, message, stage=None):
        super().__init__(message if stage is None else f"stage {stage}: {message}")
        self.stage = stage


class BudgetExceeded(ValueError):
    pass


def moore_matrix(T: FieldTower, points, rows):
    """rows x len(points) matrix with entry (i, j) = points[j]^(q^i)."""
    points = np.asarray(points, dtype=np.int64)
    out = T.zeros(rows, points.shape[0])
    cur = points
    for i in range(rows):
        out[i] = cur
        cur = T.frobenius(cur, 1)
    return out


@dataclass(frozen=True, eq=False)
class LinearCode:
    """F_{q^m}-linear code given by a k x n generator matrix."""

    tower: FieldTower
    generator: np.ndarray

    @property
    def n(self):
        return self.generator.shape[1]

    @property
    def k(self):
        return self.generator.shape[0]

    def encode(self, msg):
        msg = np.asarray(msg, dtype=np.int64)
        single = msg.ndim == 2
        if single:
            msg = msg[None]
        if msg.shape[1] != self.k:
            raise ValueError(f"message length {msg.shape[1]} != k={self.k}")
        out = self.tower.matmul(msg, self.generator) if self.k else self.tower.zeros(msg.shape[0], self.n)
        return out[0] if single else out

    def contains(self, words):
        words = np.asarray(words, dtype=np.int64).reshape(-1, self.n, self.tower.m)
        return self.tower.rank(np.concatenate([self.generator, words])) == self.tower.rank(self.generator)

    def prefix(self, k):
        return LinearCode(self.tower, self.generator[:k].copy())

    def dimension(self):
        return self.tower.rank(self.generator) if self.k else 0


@dataclass(frozen=True, eq=False)
class GabidulinCode(LinearCode):
    points: np.ndarray = field(default=None, repr=False)

    @classmethod
    def build(cls, T: FieldTower, n, k, points=None):
        if n > T.m:
            raise ValueError(f"Gabidulin length n={n} exceeds m={T.m}")
        if not 0 <= k <= n:
            raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
        if points is None:
            points = T.basis[:n].copy()
        else:
            points = np.asarray(points, dtype=np.int64)
            if rank_q(T, points[None]) != n:
                raise ValueError("evaluation points are not linearly independent over F_q")
        return cls(T, moore_matrix(T, points, k), points)

    def prefix(self, k):
        return GabidulinCode(self.tower, self.generator[:k].copy(), self.points)

    @property
    def parity(self):
        """(n-k) x n Moore matrix on the dual points, so generator @ parity^T = 0."""
        T, n, k = self.tower, self.n, self.k
        if k == n:
            return T.zeros(0, n)
        return moore_matrix(T, self.dual_points(), n - k)

    def dual_points(self):
        """Points of the Gabidulin code of dimension n-k dual to this one."""
        T, n, k = self.tower, self.n, self.k
        h = T.nullspace(moore_matrix(T, self.points, n - 1))[0]
        return T.frobenius(h, (T.m - (n - k - 1)) % T.m)


def gabidulin(T: FieldTower, n, k, points=None) -> GabidulinCode:
    return GabidulinCode.build(T, n, k, points)


@dataclass(frozen=True, eq=False)
class ProductCode(LinearCode):
    """Cartesian product of ``l`` copies of a length-m Gabidulin code.

    Generator rows are ordered (i, b) with i the inner row and b the block, so
    lowering the inner dimension drops a row prefix.
    """

    inner: GabidulinCode = field(default=None, repr=False)
    l: int = 1

    @classmethod
    def build(cls, inner: GabidulinCode, l):
        T = inner.tower
        n_in, k_in = inner.n, inner.k
        G = T.zeros(k_in * l, n_in * l)
        for i in range(k_in):
            for b in range(l):
                G[i * l + b, b * n_in:(b + 1) * n_in] = inner.generator[i]
        return cls(T, G, inner, l)

    def prefix(self, k):
        if k % self.l:
            raise ValueError(f"product-code dimensions are multiples of l={self.l}")
        return ProductCode.build(self.inner.prefix(k // self.l), self.l)


def product_code(T: FieldTower, k, l, n_inner=None) -> ProductCode:
    return ProductCode.build(gabidulin(T, n_inner or T.m, k), l)


def dual_code(code: LinearCode) -> LinearCode:
    T = code.tower
    if code.k == 0:
        return LinearCode(T, T.identity(code.n))
    return LinearCode(T, T.nullspace(code.generator))


@dataclass(frozen=True, eq=False)
class CodePair:
    """Nested pair C2 < C1 with generator of C1 stacked as [G2; Gc]."""

    code1: LinearCode
    code2: LinearCode
    complement: np.ndarray
    stacked: bool

    @classmethod
    def build(cls, code1: LinearCode, code2: LinearCode):
        T = code1.tower
        k1, k2 = code1.k, code2.k
        if T.rank(code1.generator) != k1 or (k2 and T.rank(code2.generator) != k2):
            raise ValueError("generators must have full row rank")
        if k2 >= k1:
            raise ValueError("C2 must be a proper subcode of C1")
        if k2 and not code1.contains(code2.generator):
            raise ValueError("C2 is not contained in C1")
        if np.array_equal(code1.generator[:k2], code2.generator):
            return cls(code1, code2, code1.generator[k2:].copy(), True)
        # complete a basis of C2 with rows of G1, first-come order
        chosen = [r for r in code2.generator]
        comp = []
        for row in code1.generator:
            trial = np.array(chosen + [row])
            if T.rank(trial) == len(chosen) + 1:
                chosen.append(row)
                comp.append(row)
        return cls(code1, code2, np.array(comp), False)

    @property
    def tower(self):
        return self.code1.tower

    @property
    def n(self):
        return self.code1.n

    @property
    def k1(self):
        return self.code1.k

    @property
    def k2(self):
        return self.code2.k

    @property
    def ell(self):
        return self.k1 - self.k2

    @property
    def G1(self):
        return np.concatenate([self.code2.generator, self.complement], axis=0)


def gabidulin_pair(T: FieldTower, n, k1, k2) -> CodePair:
    c1 = gabidulin(T, n, k1)
    return CodePair.build(c1, c1.prefix(k2))


# brute-force distance oracles -------------------------------------------------

def _fq_basis(T: FieldTower, G):
    """F_q-basis of the F_{q^m}-row space of G: x^u * row_i, ordered by row then u."""
    k, n, m = G.shape
    units = np.zeros((m, m), dtype=np.int64)
    units[np.arange(m), np.arange(m)] = 1
    return T.mul(G[:, None, :, :], units[None, :, None, :]).reshape(k * m, n, m)


def _min_rank_enumerate(T: FieldTower, basis, split, budget):
    """min rank_q over F_q-combinations using some basis vector at index >= split."""
    K, n, m = basis.shape
    if split >= K:
        return None
    if T.q ** K > budget:
        raise BudgetExceeded(f"enumeration of q^{K} codewords exceeds budget {budget}")
    if T.q == 2 and min(n, m) <= 63 and K < 63:
        bits = basis.transpose(0, 2, 1)  # (K, m, n): coordinate rows
        if n > 63:
            bits = basis  # (K, n, m): use columns as rows instead
        w = np.uint64(1) << np.arange(bits.shape[2], dtype=np.uint64)
        masks = (bits.astype(np.uint64) * w).sum(axis=2).astype(np.uint64)
        return kernels.gf2_min_rank(masks, split)
    best = None
    q = T.q
    flat = basis.reshape(K, n * m)
    total = q ** K
    chunk = 1 << 14
    for start in range(1, total, chunk):
        codes = np.arange(start, min(start + chunk, total), dtype=np.int64)
        coeffs = np.stack([(codes // q**i) % q for i in range(K)], axis=1)
        keep = coeffs[:, split:].any(axis=1)
        coeffs = coeffs[keep]
        if coeffs.size == 0:
            continue
        words = kernels.base_matmul(T.base, coeffs, flat).reshape(-1, 1, n, m)
        r = int(batch_rank_q(T, words).min())
        best = r if best is None else min(best, r)
    return best


def min_rank_distance_bruteforce(code: LinearCode, budget=ENUM_BUDGET):
    """Minimum rank_q over nonzero codewords; n+1 for the zero code."""
    if code.k == 0:
        return code.n + 1
    basis = _fq_basis(code.tower, code.generator)
    return _min_rank_enumerate(code.tower, basis, 0, budget)


def relative_min_rank_distance_bruteforce(pair: CodePair, budget=ENUM_BUDGET):
    """Minimum rank_q over C1 minus C2."""
    T = pair.tower
    G = pair.G1
    basis = _fq_basis(T, G)
    return _min_rank_enumerate(T, basis, pair.k2 * T.m, budget)


# decoding ---------------------------------------------------------------------

def independent_rows(F, A):
    """Indices of a maximal set of linearly independent rows, greedy from the top."""
    A = np.asarray(A, dtype=np.int64)
    if A.size == 0:
        return []
    _, piv = kernels.base_rref(F, np.ascontiguousarray(A.T))
    return list(piv)


def reduce_observation(F, Y, A):
    """Drop linearly dependent rows of A together with the matching columns of Y."""
    keep = independent_rows(F, A)
    A = np.asarray(A, dtype=np.int64)
    return np.ascontiguousarray(Y[..., keep, :]), np.ascontiguousarray(A[keep]), keep


def _compose_coeffs(T, V, f):
    """Coefficients of V o f for linearized polynomials given by coefficient arrays."""
    out = T.zeros(len(V) + len(f) - 1)
    for i, v in enumerate(V):
        if not v.any():
            continue
        term = T.mul(v[None, :], T.frobenius(f, i))
        out[i:i + len(f)] = T.add(out[i:i + len(f)], term)
    return out


def _right_divide(T, V, N, k):
    """f of length k with V o f = N, or None if the division leaves a remainder."""
    nz = [i for i in range(len(V)) if V[i].any()]
    if not nz:
        return None
    tau = nz[-1]
    inv_lead = T.inv(V[tau])
    f = T.zeros(k)
    back = (T.m - tau % T.m) % T.m
    for l in range(k - 1, -1, -1):
        acc = N[tau + l].copy()
        for i in range(tau):
            idx = tau + l - i
            if idx < k:
                acc = T.sub(acc, T.mul(V[i], T.frobenius(f[idx], i)))
        f[l] = T.frobenius(T.mul(acc, inv_lead), back)
    full = _compose_coeffs(T, V, f)
    target = T.zeros(len(full))
    target[:len(N)] = N[:len(full)]
    if len(N) > len(full) and np.any(N[len(full):]):
        return None
    if not np.array_equal(full, target):
        return None
    return f


def gabidulin_decode_word(T, points, y, k, t):
    """Welch-Berlekamp decoding of one received word y = f(points) + e.

    ``points`` are F_q-independent evaluation points (length d) and f has k
    coefficients.  Raises DecodingFailure unless a unique f with rank_q(e) <= t
    is found.
    """
    d = points.shape[0]
    if k > d:
        raise DecodingFailure(f"{d} observations cannot determine {k} coefficients")
    tau = (d - k) // 2
    if k == 0:
        if rank_q(T, y[None]) <= t:
            return T.zeros(0)
        raise DecodingFailure("residual rank exceeds t")
    # unknowns: V_0..V_tau, N_0..N_{k+tau-1}; equations V(y_j) - N(points_j) = 0
    ym = moore_matrix(T, y, tau + 1)
    pm = moore_matrix(T, points, k + tau)
    system = np.concatenate([ym, T.neg(pm)], axis=0)  # (unknowns, d)
    sol = T.left_nullspace(system)
    if sol.shape[0] == 0:
        raise DecodingFailure("interpolation system has only the zero solution")
    V, N = sol[0, :tau + 1], sol[0, tau + 1:]
    f = _right_divide(T, V, N, k)
    if f is None:
        raise DecodingFailure("error span does not divide the interpolation polynomial")
    resid = T.sub(y, T.matmul(f[None], moore_matrix(T, points, k))[0])
    if rank_q(T, resid[None]) > t:
        raise DecodingFailure("residual rank exceeds t")
    return f


def _solve_erasures(T, code: LinearCode, Y, A, k_low):
    """Noiseless recovery of coefficient columns k_low.. for every row of Y."""
    GA = matmul_mixed(T, code.generator, A)
    k, d, r = code.k, A.shape[0], Y.shape[0]
    # X GA = Y  <=>  GA^T X^T = Y^T; reduce [GA^T | I] once, then apply the
    # recorded row operations to all of Y^T with a single product
    aug = np.concatenate([np.swapaxes(GA, 0, 1), T.identity(d)], axis=1)
    R, piv = T.rref(aug)
    rank = sum(pc < k for pc in piv)
    Z = T.matmul(Y, np.swapaxes(R[:, k:], 0, 1))  # (r, d): row ops applied to Y^T
    if Z[:, rank:].any():
        raise DecodingFailure("observation is not consistent with any codeword")
    if rank < k:
        # free coefficients must not reach the message part
        pivset = set(piv[:rank])
        for f in (c for c in range(k) if c not in pivset):
            if f >= k_low:
                raise DecodingFailure("erasures leave the message part undetermined")
            if any(pc >= k_low and R[i, f].any() for i, pc in enumerate(piv[:rank])):
                raise DecodingFailure("erasures leave the message part undetermined")
    X = T.zeros(r, k)
    for i, pc in enumerate(piv[:rank]):
        X[:, pc] = Z[:, i]
    return X[:, k_low:]


def decode_rows(code: LinearCode, Y, A, t, k_low=0, budget=ENUM_BUDGET):
    """Recover message coefficients k_low..k-1 of each row of Y = X G A^T + E.

    ``A`` is used as given (call :func:`reduce_observation` first to drop
    dependent rows).  The error matrix E may have rank_q up to ``t`` jointly.
    """
    T = code.tower
    Y = np.asarray(Y, dtype=np.int64)
    A = np.asarray(A, dtype=np.int64)
    if Y.shape[1] != A.shape[0] or A.shape[1] != code.n:
        raise ValueError(f"dimension mismatch: Y {Y.shape[:2]}, A {A.shape}, n={code.n}")
    if t == 0:
        return _solve_erasures(T, code, Y, A, k_low)
    if isinstance(code, GabidulinCode):
        if len(independent_rows(T.base, A)) < A.shape[0]:
            Y, A, _ = reduce_observation(T.base, Y, A)
        beta = matmul_mixed(T, code.points[None], A)[0]
        out = T.zeros(Y.shape[0], code.k - k_low)
        for r in range(Y.shape[0]):
            out[r] = gabidulin_decode_word(T, beta, Y[r], code.k, t)[k_low:]
        return out
    return _nearest_coefficients(code, Y, A, t, k_low, budget)


def _enumerate_messages(T, k, budget):
    size = T.q ** (T.m * k)
    if size > budget:
        raise BudgetExceeded(f"enumerating {size} messages exceeds budget {budget}")
    ints = np.arange(T.q ** T.m, dtype=np.int64)
    elems = T.from_ints(ints)
    grids = np.meshgrid(*([np.arange(T.q ** T.m)] * k), indexing="ij")
    idx = np.stack([g.reshape(-1) for g in grids], axis=1) if k else np.zeros((1, 0), dtype=np.int64)
    return elems[idx]  # (size, k, m)


def _nearest_coefficients(code, Y, A, t, k_low, budget):
    # exhaustive search, one row at a time; unique nearest coset with rank <= t
    T = code.tower
    msgs = _enumerate_messages(T, code.k, budget)
    words = matmul_mixed(T, T.matmul(msgs, code.generator), A)
    out = T.zeros(Y.shape[0], code.k - k_low)
    for r in range(Y.shape[0]):
        resid = T.sub(Y[r][None], words)
        ranks = batch_rank_q(T, resid[:, None])
        ok = np.flatnonzero(ranks <= t)
        if ok.size == 0:
            raise DecodingFailure("no codeword within rank distance t")
        parts = {msgs[i, k_low:].tobytes() for i in ok}
        if len(parts) > 1:
            raise DecodingFailure("several cosets lie within rank distance t")
        out[r] = msgs[ok[0], k_low:]
    return out


def decode_coherent(pair: CodePair, y, A, t, budget=ENUM_BUDGET):
    """Recover the secret part s of y = (r|s) G1 A^T + e.

    ``y`` is one received word of shape (N, m) or a stack of rows (rows, N, m)
    sharing the same A and a joint error rank bound t.
    """
    T = pair.tower
    y = np.asarray(y, dtype=np.int64)
    single = y.ndim == 2
    Y = y[None] if single else y
    Yr, Ar, _ = reduce_observation(T.base, Y, A)
    if pair.stacked:
        s = decode_rows(pair.code1, Yr, Ar, t, k_low=pair.k2, budget=budget)
    else:
        # decode against the structured generator, then change basis to [G2; Gc]
        x = decode_rows(pair.code1, Yr, Ar, t, k_low=0, budget=budget)
        c = T.matmul(x, pair.code1.generator)
        s = T.solve_left(pair.G1, c)[:, pair.k2:]
    return s[0] if single else s


def decode_coherent_bruteforce(pair: CodePair, y, A, budget=ENUM_BUDGET):
    """Nearest-coset oracle: the s whose coset attains the least residual rank.

    Returns (s, rank) and raises DecodingFailure on ties between cosets.
    """
    T = pair.tower
    y = np.asarray(y, dtype=np.int64)
    msgs = _enumerate_messages(T, pair.k1, budget)
    G1 = pair.G1
    words = matmul_mixed(T, T.matmul(msgs, G1), A)
    resid = T.sub(y[None], words)
    ranks = batch_rank_q(T, resid[:, None])
    best = int(ranks.min())
    winners = {tuple(msgs[i, pair.k2:].reshape(-1)) for i in np.flatnonzero(ranks == best)}
    if len(winners) > 1:
        raise DecodingFailure("nearest coset is not unique")
    i = int(np.flatnonzero(ranks == best)[0])
    return msgs[i, pair.k2:].copy(), best
