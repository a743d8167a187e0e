"""Staircase subpacketization over a chain of nested codes.

A secret of alpha x ell symbols is spread over alpha rows.  Row block u of the
message matrix carries its own secret part plus copies of lower blocks' data
("D" columns), so a receiver that sees d_j columns only needs the first
ell*alpha/alpha_j rows of every response to decode.  All block bookkeeping
lives in :class:`BlockLayout`; rows and columns are zero-based here while level
indices j and block indices u run from 1 to h.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce

import numpy as np

from .codes import (CodePair, DecodingFailure, LinearCode, decode_rows, gabidulin,
                    product_code, reduce_observation)
from .fields import FieldTower, matmul_mixed


@dataclass(frozen=True)
class StaircasePlan:
    n: int
    k1: int
    k2: int
    t0: int
    rho0: int
    D: tuple
    k_list: tuple
    alpha_list: tuple
    alpha: int
    ell: int
    p_list: tuple
    family: str = "gabidulin"
    l: int = 1
    m_inner: int | None = None
    tight: bool = True

    @property
    def h(self):
        return len(self.D)

    @property
    def dims(self):
        """Code dimensions over F_{q^m}: k_list scaled by l for product chains."""
        return tuple(self.l * k for k in self.k_list)

    @property
    def dim2(self):
        return self.l * self.k2

    def prefix_rows(self, j):
        """ell*alpha/alpha_j, the rows kept at level j."""
        return self.ell * self.alpha // self.alpha_list[j - 1]

    def level_of(self, d):
        """Level j with d = d_j; ValueError when d is not in D."""
        try:
            return self.D.index(d) + 1
        except ValueError:
            raise ValueError(f"d={d} is not in D={list(self.D)}") from None

    def level_for_rank(self, d):
        """Largest d_j not exceeding d (the receiver discards extra columns)."""
        usable = [x for x in self.D if x <= d]
        if not usable:
            raise ValueError(f"only {d} independent columns; need at least {min(self.D)}")
        return self.level_of(max(usable))

    def to_dict(self):
        return {
            "n": self.n, "k1": self.k1, "k2": self.k2, "t0": self.t0, "rho0": self.rho0,
            "D": list(self.D), "k_list": list(self.k_list), "alpha_list": list(self.alpha_list),
            "alpha": self.alpha, "ell": self.ell, "p_list": list(self.p_list),
            "family": self.family, "l": self.l, "tight": self.tight,
        }


def plan(n, k1, k2, t0, D, family="gabidulin", l=1, m=None) -> StaircasePlan:
    """Derive the staircase parameters for target distances D.

    For Gabidulin chains the level dimensions are k^(j) = d_j - 2 t0 above the
    bottom level, whose dimension is k1.  For products of l Gabidulin codes of
    length m (n = l m) the inner dimensions are k^(j) = d_j - (l-1) m - 2 t0.
    The bottom level is ``tight`` when k1 meets that formula at d_h as well.
    """
    D = tuple(sorted({int(d) for d in D}, reverse=True))
    if not D:
        raise ValueError("D must be nonempty")
    if family == "gabidulin":
        l, span = 1, n
        if m is not None and n > m:
            raise ValueError(f"Gabidulin chains need n <= m (n={n}, m={m})")
    elif family == "product":
        if m is None or l < 1 or n != l * m:
            raise ValueError("product chains need m and l with n = l*m")
        span = m
    else:
        raise ValueError(f"unknown code family {family!r}")
    if not 0 <= k2 < k1 <= span:
        raise ValueError(f"need 0 <= k2 < k1 <= {span}, got k1={k1}, k2={k2}")
    if t0 < 0:
        raise ValueError("t0 must be nonnegative")
    if D[0] > n or D[-1] < 1:
        raise ValueError(f"D must lie in [1, n={n}]")
    rho0 = n - D[-1]
    offset = (l - 1) * m if family == "product" else 0
    if 2 * t0 + rho0 > span - k1:
        raise ValueError(f"2 t0 + rho0 = {2 * t0 + rho0} exceeds {span - k1}, the pair's capability")
    k_list = [d - offset - 2 * t0 for d in D[:-1]] + [k1]
    for j, k in enumerate(k_list[:-1], 1):
        if k > span:
            raise ValueError(f"level {j}: k = {k} exceeds {span}")
        if k <= k_list[j]:
            raise ValueError(f"level dimensions must strictly decrease, got {k_list}")
    if k_list[-1] <= k2:
        raise ValueError("bottom level must exceed k2")
    alpha_list = [l * (k - k2) for k in k_list]
    alpha = reduce(math.lcm, alpha_list)
    ell = l * (k1 - k2)
    prefix = [ell * alpha // a for a in alpha_list]
    p_list = [prefix[0]] + [prefix[j] - prefix[j - 1] for j in range(1, len(prefix))]
    tight = k1 == D[-1] - offset - 2 * t0
    return StaircasePlan(n, k1, k2, t0, rho0, D, tuple(k_list), tuple(alpha_list), alpha,
                         ell, tuple(p_list), family, l, m if family == "product" else None, tight)


def overhead(p: StaircasePlan, d):
    """(CO, DB) in packets for a receiver contacting d = d_j columns."""
    j = p.level_of(d)
    db = Fraction(d * p.ell, p.alpha_list[j - 1])
    return db - p.ell, db


def bound_info_rate(n, t, rho, mu):
    """Largest secret size ell any universal scheme can reach."""
    value = n - 2 * t - rho - mu
    if value < 0:
        raise ValueError(f"no positive rate possible: n - 2t - rho - mu = {value}")
    return value


def bound_co(ell, d, t, mu):
    """Lower bound on the communication overhead when contacting d columns."""
    denom = d - 2 * t - mu
    if denom <= 0:
        raise ValueError(f"d - 2t - mu = {denom} must be positive")
    return Fraction(ell * (2 * t + mu), denom)


@dataclass(frozen=True, eq=False)
class CodeChain:
    """Nested generators: levels[j-1] is C^(j); bottom is C1, below it C2."""

    top: LinearCode
    levels: tuple
    code2: LinearCode

    @property
    def G1_full(self):
        return self.top.generator

    @property
    def pair(self):
        return CodePair.build(self.levels[-1], self.code2)


def build_chain(T: FieldTower, p: StaircasePlan) -> CodeChain:
    if p.family == "gabidulin":
        top = gabidulin(T, p.n, p.dims[0])
    else:
        if T.m != p.m_inner:
            raise ValueError("tower degree must equal the inner code length")
        top = product_code(T, p.k_list[0], p.l)
    levels = tuple(top.prefix(k) for k in p.dims)
    return CodeChain(top, levels, top.prefix(p.dim2))


@dataclass(frozen=True, eq=False)
class BlockLayout:
    """Row/column ranges of each block and the fixed row-major rearrangement.

    ``moves[u]`` for u = 2..h maps the source region of block u, namely its
    secret plus its own D columns, onto the target column block inside the
    rows of blocks 1..u-1.  Both regions are read row by row.
    """

    plan: StaircasePlan
    block_rows: tuple
    moves: dict = field(repr=False)

    def r_cols(self):
        return (0, self.plan.dim2)

    def s_cols(self):
        k2 = self.plan.dim2
        return (k2, k2 + self.plan.ell)

    def d_cols(self, v):
        """Columns of the v-th D column block, v = 1..h-1."""
        a, k2, h = self.plan.alpha_list, self.plan.dim2, self.plan.h
        return (k2 + a[h - v], k2 + a[h - v - 1])

    def source(self, u):
        """(rows, cols) of block u's region copied into lower-indexed rows."""
        k2 = self.plan.dim2
        return self.block_rows[u - 1], (k2, k2 + self.plan.alpha_list[u - 1])

    def target(self, u):
        k2, a = self.plan.dim2, self.plan.alpha_list
        return (0, self.block_rows[u - 1][0]), (k2 + a[u - 1], k2 + a[u - 2])


def build_layout(p: StaircasePlan) -> BlockLayout:
    starts = np.concatenate([[0], np.cumsum(p.p_list)]).tolist()
    block_rows = tuple((starts[u], starts[u + 1]) for u in range(p.h))
    layout = BlockLayout(p, block_rows, {})
    for u in range(2, p.h + 1):
        (r0, r1), (c0, c1) = layout.source(u)
        (t0, t1), (d0, d1) = layout.target(u)
        if (r1 - r0) * (c1 - c0) != (t1 - t0) * (d1 - d0):
            raise AssertionError(f"block {u}: source and target sizes differ")
        src = np.indices((r1 - r0, c1 - c0)).reshape(2, -1)
        dst = np.indices((t1 - t0, d1 - d0)).reshape(2, -1)
        layout.moves[u] = (src[0] + r0, src[1] + c0, dst[0] + t0, dst[1] + d0)
    return layout


@dataclass(frozen=True, eq=False)
class StaircaseScheme:
    tower: FieldTower
    plan: StaircasePlan
    chain: CodeChain
    layout: BlockLayout

    @classmethod
    def build(cls, tower, p: StaircasePlan):
        return cls(tower, p, build_chain(tower, p), build_layout(p))

    @property
    def alpha(self):
        return self.plan.alpha

    @property
    def ell(self):
        return self.plan.ell


def _rows_matmul(T, X, G):
    """X @ G for X with any leading batch axes, shape (..., r, k, m)."""
    lead = X.shape[:-2]
    out = T.matmul(X.reshape(-1, X.shape[-2], T.m), G)
    return out.reshape(lead + out.shape[-2:])


def message_matrix(scheme: StaircaseScheme, S, R):
    """The alpha x k^(1) matrix whose product with G^(1) is the codeword array.

    ``S`` and ``R`` may carry a leading batch axis.
    """
    p, lay, T = scheme.plan, scheme.layout, scheme.tower
    S = np.asarray(S, dtype=np.int64)
    R = np.asarray(R, dtype=np.int64)
    if S.shape[-3:-1] != (p.alpha, p.ell):
        raise ValueError(f"secret must be {p.alpha} x {p.ell}, got {S.shape[-3:-1]}")
    if R.shape[-3:-1] != (p.alpha, p.dim2) or R.shape[:-3] != S.shape[:-3]:
        raise ValueError(f"randomness must be {p.alpha} x {p.dim2}, got {R.shape[-3:-1]}")
    M = T.zeros(*S.shape[:-3], p.alpha, p.dims[0])
    M[..., :p.dim2, :] = R
    s0, s1 = lay.s_cols()
    M[..., s0:s1, :] = S
    for u in range(p.h, 1, -1):
        sr, sc, dr, dc = lay.moves[u]
        M[..., dr, dc, :] = M[..., sr, sc, :]
    return M


def staircase_encode(scheme: StaircaseScheme, S, rng, R=None):
    """alpha x n codeword array for secret S; R is drawn uniformly unless given."""
    p, T = scheme.plan, scheme.tower
    S = np.asarray(S, dtype=np.int64)
    if R is None:
        R = T.random(rng, *S.shape[:-3], p.alpha, p.dim2)
    M = message_matrix(scheme, S, R)
    return _rows_matmul(T, M, scheme.chain.top.generator)


def preprocess(scheme: StaircaseScheme, d, column_response):
    """Keep the first ell*alpha/alpha_j entries of one column response (d = d_j)."""
    j = scheme.plan.level_of(d)
    return np.asarray(column_response)[:scheme.plan.prefix_rows(j)].copy()


def preprocess_all(scheme: StaircaseScheme, d, Y):
    """Column-wise preprocessing of an alpha x d response matrix (batch axes allowed)."""
    j = scheme.plan.level_of(d)
    return np.asarray(Y)[..., :scheme.plan.prefix_rows(j), :, :].copy()


def _decode_level(scheme: StaircaseScheme, Y, A, t, j):
    """Recover the secret from the first P_j rows of Y = C A^T + E.

    Y has shape (rows, d, m) or (batch, rows, d, m); a batch shares A.
    """
    p, lay, T = scheme.plan, scheme.layout, scheme.tower
    k2 = p.dim2
    a_j = p.alpha_list[j - 1]
    rows_needed = p.prefix_rows(j)
    batched = Y.ndim == 4
    Yb = Y if batched else Y[None]
    B = Yb.shape[0]
    if Yb.shape[1] < rows_needed:
        raise ValueError(f"level {j} needs {rows_needed} rows, got {Yb.shape[1]}")
    code = scheme.chain.levels[j - 1]
    GA = matmul_mixed(T, scheme.chain.top.generator, A)
    d = A.shape[0]
    M = T.zeros(B, p.alpha, p.dims[0])
    for u in range(j, 0, -1):
        r0, r1 = lay.block_rows[u - 1]
        Yu = Yb[:, r0:r1]
        a_u = p.alpha_list[u - 1]
        if a_u > a_j:
            extra = slice(k2 + a_j, k2 + a_u)
            Yu = T.sub(Yu, _rows_matmul(T, M[:, r0:r1, extra], GA[extra]))
        try:
            X = decode_rows(code, Yu.reshape(-1, d, T.m), A, t, k_low=k2)
        except DecodingFailure as exc:
            raise DecodingFailure(str(exc), stage=u) from None
        M[:, r0:r1, k2:k2 + a_j] = X.reshape(B, r1 - r0, a_j, T.m)
        if u >= 2:
            sr, sc, dr, dc = lay.moves[u]
            M[:, dr, dc] = M[:, sr, sc]
    for u in range(j + 1, p.h + 1):
        sr, sc, dr, dc = lay.moves[u]
        M[:, sr, sc] = M[:, dr, dc]
    s0, s1 = lay.s_cols()
    S = M[:, :, s0:s1].copy()
    return S if batched else S[0]


def decode_full(scheme: StaircaseScheme, Y, A, t):
    """Decode from all alpha rows of every response; A may be rank deficient."""
    Y = np.asarray(Y, dtype=np.int64)
    Yr, Ar, _ = reduce_observation(scheme.tower.base, Y, A)
    return _decode_level(scheme, Yr, Ar, t, scheme.plan.h)


def decode_efficient(scheme: StaircaseScheme, responses, A, t):
    """Decode from preprocessed responses (P_j x d) for a full-rank d x n matrix A.

    When d is not in D the leading d_j columns with d_j the largest level not
    above d are used.
    """
    p = scheme.plan
    A = np.asarray(A, dtype=np.int64)
    responses = np.asarray(responses, dtype=np.int64)
    d = A.shape[0]
    if d not in p.D:
        j = p.level_for_rank(d)
        keep = p.D[j - 1]
        A, responses = A[:keep], responses[..., :keep, :]
    j = p.level_of(A.shape[0])
    return _decode_level(scheme, responses, A, t, j)
