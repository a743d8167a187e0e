"""Nested coset coding with one row per packet, and exact leakage checks."""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import codes
from .codes import CodePair
from .fields import base_nullspace, base_rank, matmul_mixed

MI_BUDGET = 1 << 20


@dataclass(frozen=True, eq=False)
class NestedScheme:
    pair: CodePair
    rng_seed: int = 0

    @property
    def ell(self):
        return self.pair.ell

    def information_rate(self):
        return information_rate(self.pair)


def information_rate(pair: CodePair):
    return Fraction(pair.ell, pair.n)


def encode_with(pair: CodePair, s, r):
    """(r | s) [G2; Gc] for explicit randomness r."""
    T = pair.tower
    s = np.asarray(s, dtype=np.int64)
    r = np.asarray(r, dtype=np.int64)
    single = s.ndim == 2
    S = s[None] if single else s
    R = r[None] if single else r
    if S.shape[1] != pair.ell or R.shape[1] != pair.k2:
        raise ValueError(f"expected {pair.ell} secret and {pair.k2} random symbols per row")
    out = T.matmul(np.concatenate([R, S], axis=1), pair.G1)
    return out[0] if single else out


def nested_encode(scheme, s, rng):
    """Uniform element of the coset s Gc + C2."""
    pair = scheme.pair if isinstance(scheme, NestedScheme) else scheme
    s = np.asarray(s, dtype=np.int64)
    rows = () if s.ndim == 2 else (s.shape[0],)
    r = pair.tower.random(rng, *rows, pair.k2)
    return encode_with(pair, s, r)


def nested_decode(scheme, y, A, t):
    pair = scheme.pair if isinstance(scheme, NestedScheme) else scheme
    return codes.decode_coherent(pair, y, A, t)


@dataclass
class LeakageReport:
    dim_c1b: int
    dim_c2b: int
    rankB: int
    secure: bool
    mi_logq: Fraction | None = None

    def to_dict(self):
        mi = None if self.mi_logq is None else [self.mi_logq.numerator, self.mi_logq.denominator]
        return {"dim_c1b": self.dim_c1b, "dim_c2b": self.dim_c2b, "rankB": self.rankB,
                "secure": self.secure, "mi_logq": mi}

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)


def _intersection_dim(T, U, V):
    # dim(U cap V) = dim U + dim V - dim(U + V), all row spaces
    du, dv = T.rank(U), T.rank(V)
    if U.shape[0] == 0 or V.shape[0] == 0:
        return 0
    return du + dv - T.rank(np.concatenate([U, V], axis=0))


def check_security_linear(pair: CodePair, B, threshold=None):
    """Compare dim C1 B^T with dim C2 B^T.

    Two independent identities are checked on the way: rank-nullity through the
    kernel C cap V-perp, and the dual-side count dim(C2perp cap V) - dim(C1perp cap V).
    When ``threshold`` (the relative distance of the dual pair) is given and
    rank B is below it, equality is asserted.
    """
    T = pair.tower
    B = np.asarray(B, dtype=np.int64).reshape(-1, pair.n)
    F = T.base
    rankB = base_rank(F, B) if B.size else 0
    G1, G2 = pair.G1, pair.code2.generator
    dim1 = T.rank(matmul_mixed(T, G1, B)) if B.shape[0] else 0
    dim2 = T.rank(matmul_mixed(T, G2, B)) if B.shape[0] and pair.k2 else 0
    Vperp = T.embed(base_nullspace(F, B)) if B.shape[0] else T.identity(pair.n)
    for G, dim in ((G1, dim1), (G2, dim2)):
        k = G.shape[0]
        if k and dim + _intersection_dim(T, G, Vperp) != k:
            raise AssertionError("rank-nullity cross-check failed")
    Vrows = T.embed(B) if B.shape[0] else T.zeros(0, pair.n)
    d1 = _intersection_dim(T, codes.dual_code(pair.code1).generator, Vrows)
    d2 = _intersection_dim(T, codes.dual_code(pair.code2).generator, Vrows)
    if dim1 - dim2 != d2 - d1:
        raise AssertionError("dual-side dimension cross-check failed")
    secure = dim1 == dim2
    if threshold is not None and rankB < threshold and not secure:
        raise AssertionError(f"rank B = {rankB} < {threshold} but C1 B^T != C2 B^T")
    return LeakageReport(dim1, dim2, rankB, secure)


def _image_table(F, images):
    """All F_q-combinations of ``images`` (K, D), indexed by base-q digit strings."""
    q = F.q
    table = np.zeros((1, images.shape[1]), dtype=np.int64)
    for b in range(images.shape[0]):
        parts = [table]
        for d in range(1, q):
            parts.append(F.add(table, F.mul(np.int64(d), images[b])[None, :]))
        table = np.concatenate(parts, axis=0)
    return table


def _log_q(F, count):
    e, c = 0, int(count)
    while c % F.p == 0:
        c //= F.p
        e += 1
    if c != 1:
        raise ValueError(f"count {count} is not a power of p; no exact logarithm")
    return Fraction(e, F.s)


def mutual_information_exhaustive(scheme, B, budget=MI_BUDGET):
    """Exact I(S; W) in log_q units for uniform S and R, W = X B^T.

    S holds the ell secret symbols and R the k2 random ones; the joint space is
    enumerated by F_q-linearity from images of an F_q-basis.
    """
    pair = scheme.pair if isinstance(scheme, NestedScheme) else scheme
    T = pair.tower
    F = T.base
    B = np.asarray(B, dtype=np.int64).reshape(-1, pair.n)
    K = T.m * pair.k1
    if T.q ** K > budget:
        raise codes.BudgetExceeded(f"joint space q^{K} exceeds budget {budget}")
    mu = B.shape[0]
    if mu == 0:
        return Fraction(0)
    # F_q-basis of the message space: coordinate u of symbol i, r symbols first
    basis = T.zeros(K, pair.k1)
    for i in range(pair.k1):
        for u in range(T.m):
            basis[i * T.m + u, i, u] = 1
    words = matmul_mixed(T, T.matmul(basis, pair.G1), B)  # (K, mu, m)
    table = _image_table(F, words.reshape(K, -1))
    n_r = T.q ** (T.m * pair.k2)
    total = T.q ** K
    s_idx = np.arange(total, dtype=np.int64) // n_r
    _, w_counts = np.unique(table, axis=0, return_counts=True)
    _, sw_counts = np.unique(np.concatenate([s_idx[:, None], table], axis=1),
                             axis=0, return_counts=True)
    logQ = _log_q(F, total)
    logR = _log_q(F, n_r)
    h_w = sum(Fraction(int(c), total) * (logQ - _log_q(F, c)) for c in w_counts)
    h_w_s = sum(Fraction(int(c), total) * (logR - _log_q(F, c)) for c in sw_counts)
    return h_w - h_w_s


def leakage_report(scheme, B, threshold=None, exhaustive=True, budget=MI_BUDGET):
    pair = scheme.pair if isinstance(scheme, NestedScheme) else scheme
    rep = check_security_linear(pair, B, threshold)
    if exhaustive:
        try:
            rep.mi_logq = mutual_information_exhaustive(pair, B, budget)
        except codes.BudgetExceeded:
            pass
    return rep
