"""Channel models: the coherent linearized wiretap channel and crisscross errors.

The coherent channel maps a codeword array X (alpha x n over F_{q^m}) to
Y = X A^T + E for the receiver and W = X B^T for the eavesdropper, where A and
B have entries in F_q and E has bounded rank over F_q.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .fields import FieldTower, base_matmul, base_rank, contract_phi, matmul_mixed


@dataclass(frozen=True)
class CoherentChannelSpec:
    n: int
    N: int
    t: int
    rho: int
    mu: int

    def __post_init__(self):
        if min(self.n, self.N, self.t, self.rho, self.mu) < 0:
            raise ValueError("channel parameters must be nonnegative")
        if self.rho > self.n:
            raise ValueError(f"rho={self.rho} exceeds n={self.n}")
        if self.N < self.n - self.rho:
            raise ValueError(f"N={self.N} rows cannot reach rank n - rho = {self.n - self.rho}")


@dataclass(frozen=True, eq=False)
class ChannelRealization:
    A: np.ndarray
    E: np.ndarray
    B: np.ndarray


@dataclass(frozen=True)
class CrisscrossSpec:
    n: int
    t: int
    rho: int
    mu: int
    I: tuple

    def __post_init__(self):
        if len(self.I) != self.n - self.rho or len(set(self.I)) != len(self.I):
            raise ValueError(f"I must hold n - rho = {self.n - self.rho} distinct columns")
        if any(not 0 <= i < self.n for i in self.I):
            raise ValueError("column index out of range")


def random_full_rank(F, rows, cols, rng):
    """Uniform F_q matrix of rank min(rows, cols), by rejection."""
    while True:
        X = F.random(rng, (rows, cols))
        if base_rank(F, X) == min(rows, cols):
            return X


def sample_erasure_matrix(spec: CoherentChannelSpec, F, rng):
    """N x n matrix of rank at least n - rho, built as L R with rank n - rho'."""
    hi = min(spec.rho, spec.n)
    rho_p = int(rng.integers(0, hi + 1))
    r = spec.n - rho_p
    if r == 0:
        return np.zeros((spec.N, spec.n), dtype=np.int64)
    L = random_full_rank(F, spec.N, r, rng)
    R = random_full_rank(F, r, spec.n, rng)
    A = base_matmul(F, L, R)
    if base_rank(F, A) < spec.n - spec.rho:
        raise AssertionError("sampled erasure matrix is below the rank floor")
    return A


def sample_rank_error(T: FieldTower, rows, cols, t, rng):
    """rows x cols extension matrix of rank_q at most t: the contraction of U V."""
    if t > min(rows * T.m, cols):
        raise ValueError(f"t={t} exceeds min(rows*m, cols) = {min(rows * T.m, cols)}")
    if t == 0:
        return T.zeros(rows, cols)
    U = T.base.random(rng, (rows * T.m, t))
    V = T.base.random(rng, (t, cols))
    return contract_phi(T, base_matmul(T.base, U, V))


def sample_channel(T: FieldTower, spec: CoherentChannelSpec, rows, rng):
    A = sample_erasure_matrix(spec, T.base, rng)
    E = sample_rank_error(T, rows, spec.N, spec.t, rng)
    B = T.base.random(rng, (spec.mu, spec.n))
    return ChannelRealization(A, E, B)


def transmit(T: FieldTower, X, realization: ChannelRealization):
    """(Y, W) = (X A^T + E, X B^T)."""
    X = np.asarray(X, dtype=np.int64)
    A, E, B = realization.A, realization.E, realization.B
    if A.shape[1] != X.shape[1] or B.shape[1] != X.shape[1]:
        raise ValueError("channel matrices do not match the codeword length")
    if E.shape[:2] != (X.shape[0], A.shape[0]):
        raise ValueError(f"error shape {E.shape[:2]} != {(X.shape[0], A.shape[0])}")
    Y = T.add(matmul_mixed(T, X, A), E)
    W = matmul_mixed(T, X, B) if B.shape[0] else T.zeros(X.shape[0], 0)
    return Y, W


def column_select(n, I):
    """Rows of the n x n identity indexed by I, so X P_I^T keeps the columns in I."""
    P = np.zeros((len(I), n), dtype=np.int64)
    P[np.arange(len(I)), list(I)] = 1
    return P


# crisscross weight ------------------------------------------------------------

def _pattern(E):
    E = np.asarray(E)
    return E.any(axis=2) if E.ndim == 3 else E != 0


def _max_matching(pattern):
    """Kuhn's augmenting paths on the bipartite rows/columns graph."""
    rows, cols = pattern.shape
    adj = [np.flatnonzero(pattern[i]).tolist() for i in range(rows)]
    match_col = [-1] * cols
    match_row = [-1] * rows

    def augment(i, seen):
        for j in adj[i]:
            if seen[j]:
                continue
            seen[j] = True
            if match_col[j] < 0 or augment(match_col[j], seen):
                match_col[j] = i
                match_row[i] = j
                return True
        return False

    for i in range(rows):
        augment(i, [False] * cols)
    return match_row, match_col, adj


def min_cover(E):
    """A minimum cover (row set, column set) of the nonzero entries, by Konig."""
    pat = _pattern(E)
    rows, cols = pat.shape
    match_row, match_col, adj = _max_matching(pat)
    # alternating reachability from unmatched rows
    vis_r = [False] * rows
    vis_c = [False] * cols
    stack = [i for i in range(rows) if match_row[i] < 0]
    for i in stack:
        vis_r[i] = True
    while stack:
        i = stack.pop()
        for j in adj[i]:
            if not vis_c[j]:
                vis_c[j] = True
                k = match_col[j]
                if k >= 0 and not vis_r[k]:
                    vis_r[k] = True
                    stack.append(k)
    X = [i for i in range(rows) if not vis_r[i]]
    Y = [j for j in range(cols) if vis_c[j]]
    return X, Y


def crisscross_weight(E):
    """Minimum number of rows plus columns covering every nonzero entry."""
    X, Y = min_cover(E)
    return len(X) + len(Y)


def crisscross_weight_bruteforce(E):
    """Oracle: try every row subset and cover the rest with columns."""
    pat = _pattern(E)
    rows = pat.shape[0]
    best = pat.shape[0] + pat.shape[1]
    for size in range(rows + 1):
        for X in combinations(range(rows), size):
            keep = np.ones(rows, dtype=bool)
            keep[list(X)] = False
            best = min(best, size + int(pat[keep].any(axis=0).sum()))
    return best


def is_cover(E, X, Y):
    pat = _pattern(E).copy()
    pat[list(X), :] = False
    pat[:, list(Y)] = False
    return not pat.any()


def sample_crisscross_error(F, rows, cols, t, rng):
    """rows x cols F_q matrix supported on at most t full rows and columns."""
    if t > rows + cols:
        raise ValueError(f"t={t} exceeds rows + cols = {rows + cols}")
    E = np.zeros((rows, cols), dtype=np.int64)
    if t == 0:
        return E
    n_rows = int(rng.integers(0, min(t, rows) + 1))
    n_cols = min(t - n_rows, cols)
    X = rng.choice(rows, size=n_rows, replace=False)
    Y = rng.choice(cols, size=n_cols, replace=False)
    E[X, :] = F.random(rng, (n_rows, cols))
    E[:, Y] = F.random(rng, (rows, n_cols))
    if crisscross_weight(E) > t:
        raise AssertionError("sampled crisscross error exceeds its weight budget")
    return E


def crisscross_dominance_check(F, E):
    """True when rank(E) <= wt_c(E), with the rank taken over F_q."""
    E = np.asarray(E, dtype=np.int64)
    return base_rank(F, E) <= crisscross_weight(E)
