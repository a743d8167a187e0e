"""Reference implementations sharing no code with the package.

Everything here is plain Python on tuples and ints: schoolbook polynomial
arithmetic, textbook Gaussian elimination and exhaustive enumeration.  They are
slow and only meant for desk-scale instances.
"""

from fractions import Fraction
from itertools import combinations, product
import math


class SmallField:
    """F_{p^s} as polynomials over F_p modulo ``poly``; elements are base-p ints."""

    def __init__(self, p, poly):
        self.p, self.poly, self.s = p, list(poly), len(poly) - 1
        self.q = p ** self.s

    def digits(self, a):
        return [(a // self.p**i) % self.p for i in range(self.s)]

    def undigits(self, d):
        return sum(int(c) * self.p**i for i, c in enumerate(d))

    def add(self, a, b):
        return self.undigits([(x + y) % self.p for x, y in zip(self.digits(a), self.digits(b))])

    def neg(self, a):
        return self.undigits([(-x) % self.p for x in self.digits(a)])

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def mul(self, a, b):
        x, y, p, s = self.digits(a), self.digits(b), self.p, self.s
        prod = [0] * (2 * s - 1)
        for i, u in enumerate(x):
            for j, v in enumerate(y):
                prod[i + j] = (prod[i + j] + u * v) % p
        for k in range(len(prod) - 1, s - 1, -1):
            c = prod[k]
            if c:
                for i in range(s + 1):
                    prod[k - s + i] = (prod[k - s + i] - c * self.poly[i]) % p
        return self.undigits(prod[:s])

    def inv(self, a):
        if a == 0:
            raise ZeroDivisionError
        return next(b for b in range(1, self.q) if self.mul(a, b) == 1)


class ExtField:
    """F_{q^m} over a SmallField, elements are length-m tuples (power basis)."""

    def __init__(self, F, ext_poly):
        self.F, self.poly, self.m = F, list(ext_poly), len(ext_poly) - 1

    def zero(self):
        return (0,) * self.m

    def one(self):
        return (1,) + (0,) * (self.m - 1)

    def add(self, a, b):
        return tuple(self.F.add(x, y) for x, y in zip(a, b))

    def neg(self, a):
        return tuple(self.F.neg(x) for x in a)

    def sub(self, a, b):
        return self.add(a, self.neg(b))

    def scale(self, c, a):
        return tuple(self.F.mul(c, x) for x in a)

    def mul(self, a, b):
        F, m = self.F, self.m
        prod = [0] * (2 * m - 1)
        for i, u in enumerate(a):
            if u:
                for j, v in enumerate(b):
                    prod[i + j] = F.add(prod[i + j], F.mul(u, v))
        for k in range(len(prod) - 1, m - 1, -1):
            c = prod[k]
            if c:
                for i in range(m + 1):
                    prod[k - m + i] = F.sub(prod[k - m + i], F.mul(c, self.poly[i]))
        return tuple(prod[:m])

    def pow(self, a, e):
        out = self.one()
        for _ in range(e):
            out = self.mul(out, a)
        return out

    def elements(self):
        return [tuple(v) for v in product(range(self.F.q), repeat=self.m)]


def rank_rows(F, rows):
    """Rank over F of a list of equal-length int lists."""
    M = [list(r) for r in rows]
    if not M:
        return 0
    rank, cols = 0, len(M[0])
    for c in range(cols):
        piv = next((i for i in range(rank, len(M)) if M[i][c]), None)
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        inv = F.inv(M[rank][c])
        M[rank] = [F.mul(inv, x) for x in M[rank]]
        for i in range(len(M)):
            if i != rank and M[i][c]:
                f = M[i][c]
                M[i] = [F.sub(x, F.mul(f, y)) for x, y in zip(M[i], M[rank])]
        rank += 1
    return rank


def rank_q(E, matrix):
    """Rank over F_q of the coordinate expansion of an extension matrix."""
    rows = []
    for row in matrix:
        for u in range(E.m):
            rows.append([entry[u] for entry in row])
    return rank_rows(E.F, rows)


def vec_matmul(E, msg, G):
    """msg (list of ext elements) times G (list of rows)."""
    n = len(G[0]) if G else 0
    out = [E.zero() for _ in range(n)]
    for c, row in zip(msg, G):
        for j in range(n):
            out[j] = E.add(out[j], E.mul(c, row[j]))
    return out


def min_rank_distance(E, G):
    """Minimum rank_q over the nonzero codewords spanned by G."""
    elems = E.elements()
    best = None
    for msg in product(elems, repeat=len(G)):
        if all(not any(x) for x in msg):
            continue
        r = rank_q(E, [vec_matmul(E, list(msg), G)])
        best = r if best is None else min(best, r)
    return best


def is_irreducible(F, f):
    """No monic factor of degree 1..deg/2, by trial division over all monics."""
    deg = len(f) - 1

    def divides(g, h):
        h = list(h)
        dg = len(g) - 1
        for k in range(len(h) - 1, dg - 1, -1):
            c = h[k]
            if c:
                for i in range(dg + 1):
                    h[k - dg + i] = F.sub(h[k - dg + i], F.mul(c, g[i]))
        return not any(h[:dg])

    for d in range(1, deg // 2 + 1):
        for low in product(range(F.q), repeat=d):
            if divides(list(low) + [1], f):
                return False
    return True


def min_cover(pattern):
    """Minimum |X| + |Y| over every row set X and column set Y covering all ones."""
    rows, cols = len(pattern), len(pattern[0]) if pattern else 0
    best = rows + cols
    for X in range(1 << rows):
        for Y in range(1 << cols):
            size = bin(X).count("1") + bin(Y).count("1")
            if size >= best:
                continue
            if all(not pattern[i][j] or X >> i & 1 or Y >> j & 1
                   for i in range(rows) for j in range(cols)):
                best = size
    return best


def mutual_information(E, G1, k2, B):
    """I(S; W) in log_q units for W = ((r|s) G1) B^T, uniform r and s (floats).

    Computed from the joint histogram with math.log; exact-vs-float comparisons
    use a tolerance of 1e-9.
    """
    q = E.F.q
    elems = E.elements()
    k1 = len(G1)
    joint = {}
    for msg in product(elems, repeat=k1):
        c = vec_matmul(E, list(msg), G1)
        w = tuple(tuple(_dot_base(E, c, b)) for b in B)
        s = msg[k2:]
        joint[(s, w)] = joint.get((s, w), 0) + 1
    total = len(elems) ** k1
    ps, pw = {}, {}
    for (s, w), c in joint.items():
        ps[s] = ps.get(s, 0) + c
        pw[w] = pw.get(w, 0) + c
    mi = 0.0
    for (s, w), c in joint.items():
        mi += c / total * math.log(c * total / (ps[s] * pw[w]), q)
    return mi


def _dot_base(E, c, b):
    acc = E.zero()
    for x, a in zip(c, b):
        acc = E.add(acc, E.scale(a, x))
    return acc


def p_prefix_sums(ell, alpha, alphas):
    """Independent evaluation of the prefix row counts ell*alpha/alpha_j."""
    return [Fraction(ell * alpha, a) for a in alphas]


def all_full_rank(F, rows, cols):
    """Every rows x cols matrix over F (prime field ints) of full row rank."""
    for flat in product(range(F.q), repeat=rows * cols):
        M = [list(flat[i * cols:(i + 1) * cols]) for i in range(rows)]
        if rank_rows(F, M) == rows:
            yield M


def subsets(n, size):
    return list(combinations(range(n), size))
