"""Exact linear algebra over Q.

Matrices are lists of lists of Fraction, vectors are lists of Fraction.
Everything here is small (dim <= ~40) and exactness matters more than speed,
so plain fraction Gaussian elimination is used throughout.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Sequence

Vec = list[Fraction]
Mat = list[list[Fraction]]

ZERO = Fraction(0)
ONE = Fraction(1)


def fr(x) -> Fraction:
    """Coerce ints, strings like '3/4', floats (exact binary value) to Fraction."""
    return x if isinstance(x, Fraction) else Fraction(x)


def zeros(rows: int, cols: int) -> Mat:
    return [[ZERO] * cols for _ in range(rows)]


def identity(n: int) -> Mat:
    M = zeros(n, n)
    for i in range(n):
        M[i][i] = ONE
    return M


def copy_mat(M: Sequence[Sequence[Fraction]]) -> Mat:
    return [list(row) for row in M]


def mat_vec(M: Sequence[Sequence[Fraction]], v: Sequence[Fraction]) -> Vec:
    return [sum((row[j] * v[j] for j in range(len(v))), ZERO) for row in M]


def mat_mul(A: Sequence[Sequence[Fraction]], B: Sequence[Sequence[Fraction]]) -> Mat:
    n, k, m = len(A), len(B), len(B[0])
    out = zeros(n, m)
    for i in range(n):
        Ai = A[i]
        for l in range(k):
            a = Ai[l]
            if a:
                Bl = B[l]
                oi = out[i]
                for j in range(m):
                    if Bl[j]:
                        oi[j] += a * Bl[j]
    return out


def transpose(M: Sequence[Sequence[Fraction]]) -> Mat:
    return [list(col) for col in zip(*M)]


def max_abs(v: Iterable[Fraction]) -> Fraction:
    m = ZERO
    for x in v:
        if x < 0:
            x = -x
        if x > m:
            m = x
    return m


def rref(M: Sequence[Sequence[Fraction]]) -> tuple[Mat, list[int]]:
    """Reduced row echelon form; returns (R, pivot_columns)."""
    R = copy_mat(M)
    if not R:
        return R, []
    rows, cols = len(R), len(R[0])
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        pr = next((i for i in range(r, rows) if R[i][c] != 0), None)
        if pr is None:
            continue
        R[r], R[pr] = R[pr], R[r]
        pv = R[r][c]
        R[r] = [x / pv for x in R[r]]
        for i in range(rows):
            if i != r and R[i][c] != 0:
                f = R[i][c]
                R[i] = [a - f * b for a, b in zip(R[i], R[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return R, pivots


def rank(M: Sequence[Sequence[Fraction]]) -> int:
    return len(rref(M)[1])


def nullspace(M: Sequence[Sequence[Fraction]]) -> list[Vec]:
    """Basis of {x : M x = 0}."""
    if not M:
        return []
    cols = len(M[0])
    R, pivots = rref(M)
    free = [c for c in range(cols) if c not in pivots]
    basis = []
    for f in free:
        v = [ZERO] * cols
        v[f] = ONE
        for r, c in enumerate(pivots):
            v[c] = -R[r][f]
        basis.append(v)
    return basis


def solve_exact(A: Sequence[Sequence[Fraction]], b: Sequence[Fraction]) -> Vec | None:
    """Solve A x = b exactly; None if inconsistent. Free variables are set to 0."""
    if not A:
        return [] if all(x == 0 for x in b) else None
    cols = len(A[0])
    aug = [list(row) + [b[i]] for i, row in enumerate(A)]
    R, pivots = rref(aug)
    if cols in pivots:
        return None
    x = [ZERO] * cols
    for r, c in enumerate(pivots):
        x[c] = R[r][cols]
    return x


def invert(M: Sequence[Sequence[Fraction]]) -> Mat:
    n = len(M)
    aug = [list(row) + list(identity(n)[i]) for i, row in enumerate(M)]
    R, pivots = rref(aug)
    if pivots[:n] != list(range(n)):
        raise ValueError("matrix is singular")
    return [row[n:] for row in R[:n]]


def column_reduce(vectors: Sequence[Sequence[Fraction]]) -> list[Vec]:
    """Deterministic basis of the span of the given (row) vectors."""
    R, pivots = rref(vectors)
    return [list(R[i]) for i in range(len(pivots))]


class SpanSolver:
    """Solve 'expand w in the span of given vectors' repeatedly, exactly.

    Built once from a list of independent vectors (rows, length n); `coords`
    returns the coefficient vector, `reduce` the echelon residual of w against
    the span (zero iff w lies in it).
    """

    def __init__(self, vectors: Sequence[Sequence[Fraction]]):
        self.vectors = [list(v) for v in vectors]
        self.n = len(self.vectors[0]) if self.vectors else 0
        self.k = len(self.vectors)
        # RREF of the k x n matrix, with the transform tracked on an identity block
        aug = [list(v) + list(identity(self.k)[i]) for i, v in enumerate(self.vectors)]
        R, pivots = rref(aug)
        if len([p for p in pivots if p < self.n]) != self.k:
            raise ValueError("vectors are linearly dependent")
        self.pivots = [p for p in pivots if p < self.n]
        self.R = R
        self.T = [row[self.n:] for row in R[:self.k]]  # T @ vectors = echelon rows

    def reduce(self, w: Sequence[Fraction]) -> tuple[Vec, Vec]:
        """Return (coords, residual): w = sum coords_i * vectors_i + residual."""
        res = list(w)
        coeffs_on_rows = [ZERO] * self.k
        for r, c in enumerate(self.pivots):
            f = res[c]
            if f:
                coeffs_on_rows[r] = f
                row = self.R[r]
                for j in range(self.n):
                    if row[j]:
                        res[j] -= f * row[j]
        coords = [
            sum((coeffs_on_rows[r] * self.T[r][i] for r in range(self.k)), ZERO)
            for i in range(self.k)
        ]
        return coords, res

    def coords(self, w: Sequence[Fraction]) -> Vec:
        c, res = self.reduce(w)
        if any(x != 0 for x in res):
            raise ValueError("vector not in span")
        return c

    def contains(self, w: Sequence[Fraction]) -> bool:
        return all(x == 0 for x in self.reduce(w)[1])

    def residual_norm(self, w: Sequence[Fraction]) -> Fraction:
        return max_abs(self.reduce(w)[1])


def integer_scaled(M: Sequence[Sequence[Fraction]]) -> list[list[int]]:
    """Row-wise integer scaling of a rational matrix (rank preserved)."""
    import math

    out = []
    for row in M:
        L = 1
        for x in row:
            L = L * x.denominator // math.gcd(L, x.denominator)
        out.append([int(x * L) for x in row])
    return out


def bareiss_rank(M: Sequence[Sequence[int]]) -> int:
    """Rank of an integer matrix by fraction-free Bareiss elimination."""
    A = [list(row) for row in M]
    if not A:
        return 0
    rows, cols = len(A), len(A[0])
    prev = 1
    r = 0
    for c in range(cols):
        pr = next((i for i in range(r, rows) if A[i][c]), None)
        if pr is None:
            continue
        if pr != r:
            A[r], A[pr] = A[pr], A[r]
        pivot = A[r][c]
        for i in range(r + 1, rows):
            Ai, Ar = A[i], A[r]
            f = Ai[c]
            # Bareiss update must run on every row (the //prev division is
            # exact only with the pivot rescaling applied uniformly)
            for j in range(c + 1, cols):
                Ai[j] = (pivot * Ai[j] - f * Ar[j]) // prev
            Ai[c] = 0
        prev = pivot
        r += 1
        if r == rows:
            break
    return r


class QuotientSplitSolver:
    """Expand vectors in span(H-basis) + span(complement) with a unit-pivot
    echelon pair, keeping the H / complement split.

    The complement rows are reduced against the H pivots, so coords split as
    (coords on the echelonized H rows, coords on the echelonized complement
    rows). Spans are preserved; individual basis vectors are not.
    """

    def __init__(self, h_rows: Sequence[Sequence[Fraction]],
                 comp_rows: Sequence[Sequence[Fraction]]):
        RH, pivH = rref(h_rows)
        RH = RH[: len(pivH)]
        reduced = []
        for w in comp_rows:
            res = list(w)
            for r, c in enumerate(pivH):
                f = res[c]
                if f:
                    row = RH[r]
                    for j in range(len(res)):
                        if row[j]:
                            res[j] -= f * row[j]
            reduced.append(res)
        RW, pivW = rref(reduced)
        RW = RW[: len(pivW)]
        if len(pivH) != len(h_rows) or len(pivW) != len(comp_rows):
            raise ValueError("supplied vectors are dependent")
        self.RH, self.pivH = RH, pivH
        self.RW, self.pivW = RW, pivW
        self.n = len(RH[0]) if RH else (len(RW[0]) if RW else 0)

    def coords(self, w: Sequence[Fraction]) -> tuple[Vec, Vec]:
        res = list(w)
        a = []
        for r, c in enumerate(self.pivH):
            f = res[c]
            a.append(f)
            if f:
                row = self.RH[r]
                for j in range(self.n):
                    if row[j]:
                        res[j] -= f * row[j]
        b = []
        for r, c in enumerate(self.pivW):
            f = res[c]
            b.append(f)
            if f:
                row = self.RW[r]
                for j in range(self.n):
                    if row[j]:
                        res[j] -= f * row[j]
        if any(x != 0 for x in res):
            raise ValueError("vector not in span")
        return a, b


def leading_principal_minors_positive(M: Sequence[Sequence[Fraction]]) -> bool:
    """Sylvester test: all leading principal minors > 0 (exact)."""
    n = len(M)
    A = copy_mat(M)
    # fraction-free-ish Gaussian elimination tracking pivot products
    det = ONE
    for k in range(n):
        if A[k][k] == 0:
            return False
        det *= A[k][k]
        if det <= 0:
            return False
        for i in range(k + 1, n):
            f = A[i][k] / A[k][k]
            if f:
                A[i] = [a - f * b for a, b in zip(A[i], A[k])]
    return True


def to_float_matrix(M: Sequence[Sequence[Fraction]]):
    import numpy as np

    return np.array([[float(x) for x in row] for row in M], dtype=float)
