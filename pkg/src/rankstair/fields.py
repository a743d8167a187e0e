"""Finite fields F_q (q = p^s) and extension towers F_{q^m} over them.

Elements of F_q are ints in [0, q) whose base-p digits are the polynomial
coefficients, constant term first.  Elements of F_{q^m} are int64 arrays whose
last axis holds the m power-basis coordinates over F_q, so an a x n matrix over
the extension is an array of shape (a, n, m).
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from . import _purekernels as _pk
from . import kernels

MAX_Q = 1 << 16
MAX_M = 256


def is_prime(n):
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def _prime_factors(n):
    out, d = [], 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


class BaseField:
    """F_q built from a monic irreducible ``poly`` over F_p, with log/antilog tables."""

    def __init__(self, p, poly):
        poly = tuple(int(c) for c in poly)
        s = len(poly) - 1
        if not is_prime(p):
            raise ValueError(f"p={p} is not prime")
        if s < 1 or poly[-1] != 1:
            raise ValueError("base polynomial must be monic of degree >= 1")
        if any(not 0 <= c < p for c in poly):
            raise ValueError("base polynomial coefficients must lie in [0, p)")
        self.p, self.s, self.q, self.poly = p, s, p**s, poly
        if self.q > MAX_Q:
            raise ValueError(f"q={self.q} exceeds the supported size {MAX_Q}")
        self.mode = 0 if p == 2 else (1 if s == 1 else 2)
        self.half = (self.q - 1) // 2 if p != 2 else 0
        self._build_tables()

    def _digits_table(self):
        q, p, s = self.q, self.p, self.s
        v = np.arange(q, dtype=np.int64)
        return np.stack([(v // p**i) % p for i in range(s)], axis=1)

    def _encode(self, digits):
        return digits @ (self.p ** np.arange(self.s, dtype=np.int64))

    def _slow_mul_digits(self, a, b):
        # schoolbook product of digit lists modulo poly, over F_p
        p, s, poly = self.p, self.s, self.poly
        acc = [0] * (2 * s - 1)
        for i, x in enumerate(a):
            for j, y in enumerate(b):
                acc[i + j] = (acc[i + j] + x * y) % p
        for d in range(2 * s - 2, s - 1, -1):
            c = acc[d]
            if c:
                for i in range(s):
                    acc[d - s + i] = (acc[d - s + i] - c * poly[i]) % p
                acc[d] = 0
        return acc[:s]

    def _build_tables(self):
        q, p, s = self.q, self.p, self.s
        if q == 2:
            exp = np.array([1, 1], dtype=np.int64)
            log = np.array([-1, 0], dtype=np.int64)
            zech = np.array([-1], dtype=np.int64)
        else:
            digits = self._digits_table()
            order = q - 1
            factors = _prime_factors(order)
            exp_list = None
            for g in range(2, q):
                gd = [int(x) for x in digits[g]]
                basis_images = []
                for i in range(s):
                    unit = [0] * s
                    unit[i] = 1
                    basis_images.append(self._slow_mul_digits(unit, gd))
                Mg = np.array(basis_images, dtype=np.int64)
                mulg = self._encode((digits @ Mg) % p).tolist()
                # order test before walking the whole cycle
                walk = [1]
                for _ in range(order - 1):
                    walk.append(mulg[walk[-1]])
                if mulg[walk[-1]] != 1:
                    continue
                if any(walk[order // r] == 1 for r in factors):
                    continue
                exp_list = walk
                break
            if exp_list is None:
                raise ValueError("no primitive element found; polynomial is reducible")
            exp1 = np.array(exp_list, dtype=np.int64)
            if len(set(exp_list)) != order:
                raise ValueError("base polynomial is reducible")
            exp = np.concatenate([exp1, exp1])
            log = np.full(q, -1, dtype=np.int64)
            log[exp1] = np.arange(order, dtype=np.int64)
            d1 = digits[exp1].copy()
            d1[:, 0] = (d1[:, 0] + 1) % p
            onep = self._encode(d1)
            zech = np.where(onep == 0, -1, log[onep])
        self.exp = np.ascontiguousarray(exp)
        self.log = np.ascontiguousarray(log)
        self.zech = np.ascontiguousarray(zech, dtype=np.int64)
        self._exp_l = self.exp.tolist()
        self._log_l = self.log.tolist()
        self._zech_l = self.zech.tolist()

    # vectorized arithmetic -------------------------------------------------
    def add(self, a, b):
        return _pk._add(self, np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64))

    def neg(self, a):
        return _pk._neg(self, a)

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        return _pk._mul(self, a, b)

    def inv(self, a):
        a = np.asarray(a, dtype=np.int64)
        if np.any(a == 0):
            raise ZeroDivisionError("inverse of zero in F_q")
        return self.exp[self.q - 1 - self.log[a]]

    def sum(self, x, axis=0):
        return _pk._sum(self, np.asarray(x, dtype=np.int64), axis)

    # scalar arithmetic on python ints --------------------------------------
    def smul(self, a, b):
        if a == 0 or b == 0:
            return 0
        return self._exp_l[self._log_l[a] + self._log_l[b]]

    def sadd(self, a, b):
        if self.mode == 0:
            return a ^ b
        if self.mode == 1:
            return (a + b) % self.p
        if a == 0:
            return b
        if b == 0:
            return a
        la = self._log_l[a]
        z = self._zech_l[(self._log_l[b] - la) % (self.q - 1)]
        return 0 if z < 0 else self._exp_l[la + z]

    def sneg(self, a):
        if self.mode == 0 or a == 0:
            return a
        if self.mode == 1:
            return self.p - a
        return self._exp_l[self._log_l[a] + self.half]

    def sinv(self, a):
        if a == 0:
            raise ZeroDivisionError("inverse of zero in F_q")
        return self._exp_l[self.q - 1 - self._log_l[a]]

    def random(self, rng, shape):
        return rng.integers(0, self.q, size=shape, dtype=np.int64)

    def __repr__(self):
        return f"BaseField(p={self.p}, s={self.s}, poly={list(self.poly)})"


# polynomials over a BaseField, coefficient lists constant term first --------

def _trim(f):
    f = list(f)
    while f and f[-1] == 0:
        f.pop()
    return f


def poly_divmod(F, a, b):
    a, b = _trim(a), _trim(b)
    if not b:
        raise ZeroDivisionError("polynomial division by zero")
    inv = F.sinv(b[-1])
    quo = [0] * max(len(a) - len(b) + 1, 0)
    while len(a) >= len(b):
        c = F.smul(a[-1], inv)
        shift = len(a) - len(b)
        quo[shift] = c
        nc = F.sneg(c)
        for i, bi in enumerate(b):
            if bi:
                a[i + shift] = F.sadd(a[i + shift], F.smul(nc, bi))
        a = _trim(a)
    return quo, a


def poly_gcd(F, a, b):
    a, b = _trim(a), _trim(b)
    while b:
        a, b = b, poly_divmod(F, a, b)[1]
    if a:
        inv = F.sinv(a[-1])
        a = [F.smul(c, inv) for c in a]
    return a


def _poly_eval_all(F, f):
    # evaluate f at every element of F_q at once (Horner)
    xs = np.arange(F.q, dtype=np.int64)
    acc = np.zeros(F.q, dtype=np.int64)
    for c in reversed(f):
        acc = F.add(F.mul(acc, xs), np.int64(c))
    return acc


def _frobenius_matrix(F, modulus):
    """Rows are the coordinates of (x^u)^q modulo ``modulus``; a^q = a @ matrix."""
    m = len(modulus) - 1
    mod = np.asarray(modulus, dtype=np.int64)
    if m == 1:
        return np.ones((1, 1), dtype=np.int64)
    x = np.zeros(m, dtype=np.int64)
    x[1] = 1
    # x^q by square-and-multiply
    result = np.zeros(m, dtype=np.int64)
    result[0] = 1
    base, e = x, F.q
    while e:
        if e & 1:
            result = kernels.ext_mul(F, mod, result, base)
        e >>= 1
        if e:
            base = kernels.ext_mul(F, mod, base, base)
    rows = [np.eye(1, m, 0, dtype=np.int64)[0]]
    for _ in range(1, m):
        rows.append(kernels.ext_mul(F, mod, rows[-1], result))
    return np.array(rows, dtype=np.int64)


def _rabin(F, f):
    # f monic of degree m >= 2 without roots in F_q
    m = len(f) - 1
    frob = _frobenius_matrix(F, f)
    x = np.zeros(m, dtype=np.int64)
    x[1] = 1
    powers = [x]
    for _ in range(m):
        powers.append(kernels.base_matmul(F, powers[-1][None, :], frob)[0])
    if not np.array_equal(powers[m], x):
        return False
    for r in _prime_factors(m):
        diff = [int(c) for c in powers[m // r]]
        diff[1] = F.sadd(diff[1], F.sneg(1))
        if len(poly_gcd(F, f, diff)) > 1:
            return False
    return True


def is_irreducible(F, f):
    """Rabin's test for a monic polynomial over F_q, after a root check."""
    f = _trim(f)
    m = len(f) - 1
    if m < 1 or f[-1] != 1:
        return False
    if m == 1:
        return True
    if np.any(_poly_eval_all(F, f) == 0):
        return False
    return _rabin(F, f)


def first_irreducible(F, degree):
    """Lexicographically first monic irreducible of ``degree`` over F_q.

    Candidates are ordered by the integer whose base-q digits are the lower
    coefficients, constant term first.  Constant terms that would give a root
    are skipped in bulk: f(a) = g(a) + c0 vanishes somewhere exactly when -c0
    lies in the image of g.
    """
    q = F.q
    if degree == 1:
        return (0, 1)
    for prefix in range(q ** (degree - 1)):
        upper = [(prefix // q**i) % q for i in range(degree - 1)] + [1]
        image = set(_poly_eval_all(F, [0] + upper).tolist())
        for c0 in range(1, q):
            if F.sneg(c0) in image:
                continue
            f = [c0] + upper
            if _rabin(F, f):
                return tuple(f)
    raise ValueError(f"no irreducible polynomial of degree {degree}")  # unreachable


def stream_irreducible(F, degree, key=0):
    """First monic irreducible of ``degree`` in a seeded pseudo-random candidate stream.

    Used for extensions of non-prime base fields, where lexicographic search
    stalls on long runs of reducible affine polynomials.  Candidate i takes its
    lower coefficients from Philox keyed by (key, q, degree) at counter i.
    """
    if degree == 1:
        return (0, 1)
    rng = np.random.Generator(np.random.Philox(key=[key, (F.q << 16) | degree]))
    while True:
        lower = rng.integers(0, F.q, size=degree).tolist()
        if lower[0] == 0:
            continue
        f = lower + [1]
        if is_irreducible(F, f):
            return tuple(f)


def default_ext_poly(F, degree):
    if F.s == 1:
        return first_irreducible(F, degree)
    return stream_irreducible(F, degree)


@functools.lru_cache(maxsize=None)
def prime_field(p):
    return BaseField(p, (0, 1))


@functools.lru_cache(maxsize=None)
def base_field(p, s, poly=None):
    if poly is None:
        poly = (0, 1) if s == 1 else first_irreducible(prime_field(p), s)
    else:
        poly = tuple(int(c) for c in poly)
        if len(poly) != s + 1:
            raise ValueError(f"base polynomial must have degree {s}")
        if not is_irreducible(prime_field(p), poly):
            raise ValueError(f"base polynomial {list(poly)} is reducible over F_{p}")
    return BaseField(p, poly)


# linear algebra over F_q ------------------------------------------------------

def base_rref(F, X):
    return kernels.base_rref(F, np.asarray(X, dtype=np.int64).reshape(np.shape(X)))


def base_rank(F, X):
    X = np.asarray(X, dtype=np.int64)
    if X.size == 0:
        return 0
    return len(kernels.base_rref(F, X)[1])


def base_nullspace(F, X):
    """Rows spanning {v : X v = 0}."""
    X = np.asarray(X, dtype=np.int64)
    n = X.shape[1]
    R, piv = kernels.base_rref(F, X) if X.size else (X, [])
    free = [c for c in range(n) if c not in set(piv)]
    N = np.zeros((len(free), n), dtype=np.int64)
    for i, f in enumerate(free):
        N[i, f] = 1
        for r, pc in enumerate(piv):
            N[i, pc] = F.neg(R[r, f])
    return N


def base_inverse(F, X):
    X = np.asarray(X, dtype=np.int64)
    n = X.shape[0]
    if X.shape != (n, n):
        raise ValueError("matrix is not square")
    R, piv = kernels.base_rref(F, np.concatenate([X, np.eye(n, dtype=np.int64)], axis=1))
    if piv[:n] != list(range(n)) or len(piv) < n:
        raise np.linalg.LinAlgError("matrix is singular over F_q")
    return R[:, n:].copy()


def base_matmul(F, X, Y):
    return kernels.base_matmul(F, X, Y)


# the tower ------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FieldTower:
    """F_q inside F_{q^m}, with a fixed F_q-basis of the extension."""

    base: BaseField
    m: int
    ext_poly: tuple
    basis: np.ndarray
    modulus: np.ndarray = field(repr=False)
    basis_inv: np.ndarray = field(repr=False)
    frob: np.ndarray = field(repr=False)

    @property
    def p(self):
        return self.base.p

    @property
    def s(self):
        return self.base.s

    @property
    def q(self):
        return self.base.q

    @property
    def base_poly(self):
        return self.base.poly

    @property
    def power_basis(self):
        return bool(np.array_equal(self.basis, np.eye(self.m, dtype=np.int64)))

    def __repr__(self):
        return (f"FieldTower(p={self.p}, s={self.s}, m={self.m}, "
                f"base_poly={list(self.base_poly)}, ext_poly={list(self.ext_poly)})")

    # element construction
    def zeros(self, *shape):
        return np.zeros(tuple(shape) + (self.m,), dtype=np.int64)

    def one(self):
        e = np.zeros(self.m, dtype=np.int64)
        e[0] = 1
        return e

    def identity(self, n):
        I = self.zeros(n, n)
        I[np.arange(n), np.arange(n), 0] = 1
        return I

    def embed(self, X):
        """Lift an F_q array into the extension."""
        X = np.asarray(X, dtype=np.int64)
        out = np.zeros(X.shape + (self.m,), dtype=np.int64)
        out[..., 0] = X
        return out

    def random(self, rng, *shape):
        return self.base.random(rng, tuple(shape) + (self.m,))

    def gamma(self, u):
        return self.basis[u].copy()

    # arithmetic
    def add(self, a, b):
        return self.base.add(a, b)

    def sub(self, a, b):
        return self.base.sub(a, b)

    def neg(self, a):
        return self.base.neg(a)

    def mul(self, a, b):
        return kernels.ext_mul(self.base, self.modulus, a, b)

    def scale(self, c, a):
        """Multiply extension elements ``a`` by F_q scalars ``c`` (broadcast)."""
        return self.base.mul(np.asarray(c, dtype=np.int64)[..., None], a)

    def inv(self, a):
        a = np.asarray(a, dtype=np.int64)
        if not np.all(a.reshape(-1, self.m).any(axis=1)):
            raise ZeroDivisionError("inverse of zero in F_{q^m}")
        return kernels.ext_inv(self.base, self.modulus, a)

    def pow(self, a, e):
        a = np.asarray(a, dtype=np.int64)
        if e < 0:
            a, e = self.inv(a), -e
        result = np.broadcast_to(self.one(), a.shape).copy()
        while e:
            if e & 1:
                result = self.mul(result, a)
            e >>= 1
            if e:
                a = self.mul(a, a)
        return result

    def sum(self, a, axis=0):
        """Sum along a non-coordinate axis (must be given as a nonnegative index)."""
        return self.base.sum(a, axis=axis)

    @functools.cached_property
    def _frob_powers(self):
        mats = [np.eye(self.m, dtype=np.int64)]
        for _ in range(1, self.m):
            mats.append(kernels.base_matmul(self.base, mats[-1], self.frob))
        return mats

    def frobenius(self, a, i=1):
        """a^(q^i), applied elementwise."""
        if i < 0:
            raise ValueError("Frobenius exponent must be nonnegative")
        a = np.asarray(a, dtype=np.int64)
        i %= self.m
        if i == 0:
            return a.copy()
        flat = a.reshape(-1, self.m)
        return kernels.base_matmul(self.base, flat, self._frob_powers[i]).reshape(a.shape)

    def is_zero(self, a):
        return not np.any(a)

    # matrices over the extension
    def matmul(self, A, B):
        return kernels.ext_matmul(self.base, self.modulus, A, B)

    def rref(self, M):
        return kernels.ext_rref(self.base, self.modulus, M)

    def rank(self, M):
        M = np.asarray(M, dtype=np.int64)
        if M.shape[0] == 0 or M.shape[1] == 0:
            return 0
        return len(self.rref(M)[1])

    def nullspace(self, M):
        """Rows N with M @ N^T = 0, spanning the right kernel of M."""
        M = np.asarray(M, dtype=np.int64)
        n = M.shape[1]
        if M.shape[0] == 0:
            return self.identity(n)
        R, piv = self.rref(M)
        pivset = set(piv)
        free = [c for c in range(n) if c not in pivset]
        N = self.zeros(len(free), n)
        for i, f in enumerate(free):
            N[i, f] = self.one()
            for r, pc in enumerate(piv):
                N[i, pc] = self.neg(R[r, f])
        return N

    def left_nullspace(self, M):
        """Rows y with y @ M = 0."""
        return self.nullspace(np.swapaxes(np.asarray(M), 0, 1))

    def solve_left(self, A, B):
        """X with X @ A = B; raises ValueError when no solution exists.

        Free variables are set to zero, so the answer is unique when A has full
        row rank.
        """
        A = np.asarray(A, dtype=np.int64)
        B = np.asarray(B, dtype=np.int64)
        k, n = A.shape[:2]
        r = B.shape[0]
        if B.shape[1] != n:
            raise ValueError("dimension mismatch in solve_left")
        aug = np.concatenate([np.swapaxes(A, 0, 1), np.swapaxes(B, 0, 1)], axis=1)
        R, piv = self.rref(aug)
        if piv and piv[-1] >= k:
            raise ValueError("inconsistent linear system")
        X = self.zeros(r, k)
        for i, pc in enumerate(piv):
            X[:, pc] = R[i, k:]
        return X

    def inverse(self, M):
        n = M.shape[0]
        R, piv = self.rref(np.concatenate([M, self.identity(n)], axis=1))
        if piv[:n] != list(range(n)) or len(piv) < n:
            raise np.linalg.LinAlgError("matrix is singular over F_{q^m}")
        return R[:, n:].copy()

    def row_space_equal(self, A, B):
        ra, rb = self.rank(A), self.rank(B)
        return ra == rb == self.rank(np.concatenate([A, B], axis=0))

    def to_ints(self, a):
        """Integer code sum_u a_u q^u of each element (needs q^m < 2^63)."""
        if self.q ** self.m >= 1 << 63:
            raise OverflowError("extension too large for integer codes")
        w = self.q ** np.arange(self.m, dtype=np.int64)
        return np.asarray(a, dtype=np.int64) @ w

    def from_ints(self, v):
        v = np.asarray(v, dtype=np.int64)
        return np.stack([(v // self.q**u) % self.q for u in range(self.m)], axis=-1)

    def all_elements(self):
        return self.from_ints(np.arange(self.q ** self.m, dtype=np.int64))


@functools.lru_cache(maxsize=64)
def _make_tower(p, s, m, base_poly, ext_poly, basis):
    if m < 1 or m > MAX_M:
        raise ValueError(f"m={m} outside the supported range 1..{MAX_M}")
    F = base_field(p, s, base_poly)
    if ext_poly is None:
        ext_poly = default_ext_poly(F, m)
    else:
        if len(ext_poly) != m + 1:
            raise ValueError(f"extension polynomial must have degree {m}")
        if any(not 0 <= c < F.q for c in ext_poly):
            raise ValueError("extension polynomial coefficients must lie in [0, q)")
        if not is_irreducible(F, ext_poly):
            raise ValueError(f"extension polynomial {list(ext_poly)} is reducible over F_{F.q}")
    if basis is None:
        B = np.eye(m, dtype=np.int64)
    else:
        B = np.array(basis, dtype=np.int64).reshape(m, m)
        if base_rank(F, B) != m:
            raise ValueError("basis is not linearly independent over F_q")
    binv = base_inverse(F, B)
    modulus = np.array(ext_poly, dtype=np.int64)
    frob = _frobenius_matrix(F, modulus)
    for arr in (B, binv, modulus, frob):
        arr.setflags(write=False)
    return FieldTower(F, m, tuple(ext_poly), B, modulus, binv, frob)


def make_tower(p, s=1, m=1, base_poly=None, ext_poly=None, basis=None):
    """Build (or fetch from cache) the tower F_{p^s} inside F_{p^(s m)}.

    Polynomials over a prime field default to the lexicographically first
    irreducible of each degree; extensions of F_{p^s} with s > 1 take the first
    irreducible of :func:`stream_irreducible`.  The basis defaults to the power
    basis.  A supplied ``basis`` is a list of
    m elements given by their power-basis coordinates.
    """
    if not is_prime(p):
        raise ValueError(f"p={p} is not prime")
    if s < 1:
        raise ValueError("s must be positive")
    if p**s > MAX_Q:
        raise ValueError(f"q={p**s} exceeds the supported size {MAX_Q}")
    bp = None if base_poly is None else tuple(int(c) for c in base_poly)
    ep = None if ext_poly is None else tuple(int(c) for c in ext_poly)
    bs = None if basis is None else tuple(tuple(int(c) for c in row) for row in np.asarray(basis).reshape(m, m))
    return _make_tower(p, s, m, bp, ep, bs)


# the coordinate expansion and the rank metric ---------------------------------

def expand_phi(T, C):
    """alpha x n over F_{q^m} -> (alpha m) x n over F_q, gamma-coordinates stacked per row."""
    C = np.asarray(C, dtype=np.int64)
    a, n, m = C.shape
    coords = kernels.base_matmul(T.base, C.reshape(-1, m), T.basis_inv).reshape(a, n, m)
    return np.ascontiguousarray(coords.transpose(0, 2, 1).reshape(a * m, n))


def contract_phi(T, D):
    """Inverse of :func:`expand_phi`."""
    D = np.asarray(D, dtype=np.int64)
    rows, n = D.shape
    if rows % T.m:
        raise ValueError(f"row count {rows} is not a multiple of m={T.m}")
    a = rows // T.m
    coords = D.reshape(a, T.m, n).transpose(0, 2, 1).reshape(-1, T.m)
    return kernels.base_matmul(T.base, coords, T.basis).reshape(a, n, T.m)


def rank_q(T, E):
    E = np.asarray(E, dtype=np.int64)
    if E.shape[0] == 0 or E.shape[1] == 0 or not E.any():
        return 0
    # coordinates in any basis give the same F_q-rank, so skip the basis change
    flat = np.ascontiguousarray(E.transpose(0, 2, 1).reshape(-1, E.shape[1]))
    return base_rank(T.base, flat)


def matmul_mixed(T, C, A):
    """C @ A^T for C over F_{q^m} (alpha x n) and A over F_q (N x n)."""
    C = np.asarray(C, dtype=np.int64)
    A = np.asarray(A, dtype=np.int64)
    a, n, m = C.shape
    if A.ndim != 2 or A.shape[1] != n:
        raise ValueError(f"dimension mismatch: C has {n} columns, A is {A.shape}")
    flat = np.ascontiguousarray(C.transpose(0, 2, 1).reshape(a * m, n))
    out = kernels.base_matmul(T.base, flat, np.ascontiguousarray(A.T))
    return np.ascontiguousarray(out.reshape(a, m, -1).transpose(0, 2, 1))


# thin matrix wrappers ---------------------------------------------------------

@dataclass(frozen=True, eq=False)
class BaseMatrix:
    field: BaseField
    data: np.ndarray

    def __post_init__(self):
        if self.data.ndim != 2:
            raise ValueError("BaseMatrix data must be 2-D")

    @property
    def rows(self):
        return self.data.shape[0]

    @property
    def cols(self):
        return self.data.shape[1]

    @property
    def T(self):
        return BaseMatrix(self.field, np.ascontiguousarray(self.data.T))

    def rank(self):
        return base_rank(self.field, self.data)

    def __matmul__(self, other):
        return BaseMatrix(self.field, base_matmul(self.field, self.data, other.data))

    def __add__(self, other):
        return BaseMatrix(self.field, self.field.add(self.data, other.data))

    def __eq__(self, other):
        return isinstance(other, BaseMatrix) and np.array_equal(self.data, other.data)

    __hash__ = None


@dataclass(frozen=True, eq=False)
class ExtMatrix:
    tower: FieldTower
    data: np.ndarray

    def __post_init__(self):
        if self.data.ndim != 3 or self.data.shape[2] != self.tower.m:
            raise ValueError("ExtMatrix data must have shape (rows, cols, m)")

    @classmethod
    def zeros(cls, tower, rows, cols):
        return cls(tower, tower.zeros(rows, cols))

    @classmethod
    def random(cls, tower, rng, rows, cols):
        return cls(tower, tower.random(rng, rows, cols))

    @property
    def rows(self):
        return self.data.shape[0]

    @property
    def cols(self):
        return self.data.shape[1]

    def __add__(self, other):
        return ExtMatrix(self.tower, self.tower.add(self.data, other.data))

    def __sub__(self, other):
        return ExtMatrix(self.tower, self.tower.sub(self.data, other.data))

    def __neg__(self):
        return ExtMatrix(self.tower, self.tower.neg(self.data))

    def __matmul__(self, other):
        return ExtMatrix(self.tower, self.tower.matmul(self.data, other.data))

    def times_transpose(self, A: BaseMatrix):
        """self @ A^T with A over the base field."""
        return ExtMatrix(self.tower, matmul_mixed(self.tower, self.data, A.data))

    def rank_q(self):
        return rank_q(self.tower, self.data)

    def rank(self):
        return self.tower.rank(self.data)

    def expand(self):
        return BaseMatrix(self.tower.base, expand_phi(self.tower, self.data))

    def __eq__(self, other):
        return isinstance(other, ExtMatrix) and np.array_equal(self.data, other.data)

    __hash__ = None


def batch_rank(F, X):
    """Ranks of a stack of F_q matrices, shape (B, R, C) -> (B,)."""
    X = np.array(X, dtype=np.int64, copy=True)
    B, R, C = X.shape
    rank = np.zeros(B, dtype=np.int64)
    if B == 0 or R == 0 or C == 0:
        return rank
    used = np.zeros((B, R), dtype=bool)
    idx = np.arange(B)
    for c in range(C):
        cand = (X[:, :, c] != 0) & ~used
        has = cand.any(axis=1)
        if not has.any():
            continue
        piv = np.argmax(cand, axis=1)
        b = idx[has]
        pr = piv[has]
        used[b, pr] = True
        rank[b] += 1
        prow = X[b, pr]
        if F.q == 2:
            hit = X[b, :, c].astype(bool)
            hit[np.arange(b.size), pr] = False
            X[b] ^= hit[:, :, None] * prow[:, None, :]
        else:
            inv = F.inv(prow[:, c])
            prow = F.mul(prow, inv[:, None])
            fac = F.neg(X[b, :, c])
            fac[np.arange(b.size), pr] = 0
            X[b] = F.add(X[b], F.mul(fac[:, :, None], prow[:, None, :]))
    return rank


def batch_rank_q(T, E):
    """rank_q of a stack of extension matrices, shape (B, a, n, m) -> (B,)."""
    E = np.asarray(E, dtype=np.int64)
    B, a, n, m = E.shape
    flat = E.transpose(0, 1, 3, 2).reshape(B, a * m, n)
    return batch_rank(T.base, flat)
