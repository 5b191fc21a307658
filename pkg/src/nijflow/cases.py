"""Builders for compact classical matrix Lie algebras and the two homogeneous
series SU(2n)/(S(U(2n-1)xU(1)) n Sp(n)) and SO(2n+2)/(SO(2n+1) n U(n+1)).

Matrix realizations follow the block layouts of the source construction
literally (same row/column partitions), with all entries in Z[i], so every
structure constant and every subspace is exact over Q.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np
import scipy.linalg

from . import rational as ra
from .liealg import (
    BilinearFormMatrix,
    LieAlgebra,
    QiMatrix,
    Subspace,
    is_subalgebra_residual,
    killing_gram,
    subspace_combine,
)
from .rational import ZERO, ONE, fr

SQRT2 = 2 ** 0.5


# ---------------------------------------------------------------------------
# classical algebras
# ---------------------------------------------------------------------------

def _su_matrices(m: int) -> list[QiMatrix]:
    out = []
    for j in range(m):
        for k in range(j + 1, m):
            out.append(QiMatrix.zero(m).set(j, k, 1).set(k, j, -1))
            out.append(QiMatrix.zero(m).set(j, k, 0, 1).set(k, j, 0, 1))
    for j in range(m - 1):
        out.append(QiMatrix.zero(m).set(j, j, 0, 1).set(j + 1, j + 1, 0, -1))
    return out


def _u_matrices(m: int) -> list[QiMatrix]:
    out = _su_matrices(m)
    center = QiMatrix.zero(m)
    for j in range(m):
        center.set(j, j, 0, 1)
    out.append(center)
    return out


def _so_matrices(m: int) -> list[QiMatrix]:
    return [QiMatrix.zero(m).set(j, k, 1).set(k, j, -1)
            for j in range(m) for k in range(j + 1, m)]


def _sp_compact_matrices(m: int) -> list[QiMatrix]:
    """sp(m) as {[[Z1, Z2], [-conj(Z2), conj(Z1)]]}: Z1 in u(m), Z2 symmetric."""
    out = []
    for Z1 in _u_matrices(m):
        M = QiMatrix.zero(2 * m)
        for a in range(m):
            for b in range(m):
                M.set(a, b, Z1.re[a][b], Z1.im[a][b])
                M.set(m + a, m + b, Z1.re[a][b], -Z1.im[a][b])
        out.append(M)
    for j in range(m):
        for k in range(j, m):
            for re, im in ((1, 0), (0, 1)):
                M = QiMatrix.zero(2 * m)
                M.set(j, m + k, re, im).set(k, m + j, re, im)
                M.set(m + j, k, -re, im).set(m + k, j, -re, im)
                out.append(M)
    return out


def _gl_matrices(m: int) -> list[QiMatrix]:
    return [QiMatrix.zero(m).set(j, k, 1) for j in range(m) for k in range(m)]


def _sl_matrices(m: int) -> list[QiMatrix]:
    out = [QiMatrix.zero(m).set(j, k, 1) for j in range(m) for k in range(m) if j != k]
    for j in range(m - 1):
        out.append(QiMatrix.zero(m).set(j, j, 1).set(j + 1, j + 1, -1))
    return out


_FAMILIES = {
    "su": (_su_matrices, lambda m: m * m - 1),
    "so": (_so_matrices, lambda m: m * (m - 1) // 2),
    "u": (_u_matrices, lambda m: m * m),
    "sp_compact": (_sp_compact_matrices, lambda m: m * (2 * m + 1)),
    "gl_real": (_gl_matrices, lambda m: m * m),
    "sl_real": (_sl_matrices, lambda m: m * m - 1),
}


def build_classical(family: str, m: int) -> LieAlgebra:
    if family not in _FAMILIES:
        raise ValueError(f"unsupported family {family!r}")
    if m < 1 or (family in ("su", "sl_real") and m < 2):
        raise ValueError(f"unsupported size {m} for {family}")
    builder, dim_of = _FAMILIES[family]
    mats = builder(m)
    assert len(mats) == dim_of(m)
    return LieAlgebra.from_matrices(mats, label=f"{family}({m})")


# ---------------------------------------------------------------------------
# the two homogeneous series
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HomogeneousCase:
    family: str                     # "A" or "B"
    n: int
    lambda1: Fraction
    lambda2: Fraction
    g: LieAlgebra
    g1: Subspace
    g2: Subspace
    k: Subspace
    kperp: Subspace                 # basis is k1 basis followed by k2 basis
    k1: Subspace
    k2: Subspace
    killing: BilinearFormMatrix
    inertia_matrix: tuple[tuple[Fraction, ...], ...]  # on the kperp basis
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @property
    def dim_m(self) -> int:
        return self.kperp.dim

    def gram_m(self) -> list[list[Fraction]]:
        """Restriction of -Killing to kperp in the kperp basis (exact, pos. def.)."""
        if "gram_m" not in self._cache:
            gk = self.killing.gram
            B = self.kperp.basis
            d = len(B)
            G = ra.zeros(d, d)
            for a in range(d):
                for b in range(a, d):
                    val = -self.killing.pair(list(B[a]), list(B[b]))
                    G[a][b] = val
                    G[b][a] = val
            self._cache["gram_m"] = G
        return self._cache["gram_m"]

    def projections(self) -> tuple[list[list[Fraction]], list[list[Fraction]]]:
        """pr1, pr2 onto k1, k2 along the direct decomposition (kperp coords)."""
        d, d1 = self.dim_m, self.k1.dim
        p1 = ra.zeros(d, d)
        p2 = ra.zeros(d, d)
        for i in range(d1):
            p1[i][i] = ONE
        for i in range(d1, d):
            p2[i][i] = ONE
        return p1, p2


def _case_a_generators(n: int) -> tuple[list[QiMatrix], list[QiMatrix], list[QiMatrix], list[QiMatrix]]:
    """(g, g1, g2, k) generator matrices for SU(2n)/(S(U(2n-1)xU(1)) n Sp(n))."""
    m = 2 * n
    g_mats = _su_matrices(m)
    g1_mats = _sp_compact_matrices(n)
    # g2 = s(u(2n-1) + u(1)): su(2n-1) embedded top-left, plus diag(i...i, -(2n-1)i)
    g2_mats = []
    for A in _su_matrices(m - 1):
        M = QiMatrix.zero(m)
        for a in range(m - 1):
            for b in range(m - 1):
                M.set(a, b, A.re[a][b], A.im[a][b])
        g2_mats.append(M)
    M = QiMatrix.zero(m)
    for a in range(m - 1):
        M.set(a, a, 0, 1)
    M.set(m - 1, m - 1, 0, -(m - 1))
    g2_mats.append(M)
    # k = sp(n-1) + t in the (n-1, 1, n-1, 1) partition
    q = n - 1
    k_mats = []

    def embed_k(Z1: QiMatrix | None, Z2: QiMatrix | None, t: int) -> QiMatrix:
        M = QiMatrix.zero(m)
        if Z1 is not None:
            for a in range(q):
                for b in range(q):
                    M.set(a, b, Z1.re[a][b], Z1.im[a][b])
                    M.set(n + a, n + b, Z1.re[a][b], -Z1.im[a][b])
        if Z2 is not None:
            for a in range(q):
                for b in range(q):
                    M.set(a, n + b, Z2.re[a][b], Z2.im[a][b])
                    M.set(n + a, b, -Z2.re[a][b], Z2.im[a][b])
        if t:
            M.set(q, q, 0, t).set(m - 1, m - 1, 0, -t)
        return M

    for Z1 in _u_matrices(q):
        k_mats.append(embed_k(Z1, None, 0))
    for j in range(q):
        for k_ in range(j, q):
            for re, im in ((1, 0), (0, 1)):
                Z2 = QiMatrix.zero(q).set(j, k_, re, im).set(k_, j, re, im)
                k_mats.append(embed_k(None, Z2, 0))
    k_mats.append(embed_k(None, None, 1))
    return g_mats, g1_mats, g2_mats, k_mats


def _case_b_generators(n: int) -> tuple[list[QiMatrix], list[QiMatrix], list[QiMatrix], list[QiMatrix]]:
    """(g, g1, g2, k) generators for SO(2n+2)/(SO(2n+1) n U(n+1)).

    Ambient so(2n+2) realized as {[[W, Z], [conj(Z), conj(W)]]} with W in
    u(n+1) and Z complex antisymmetric.
    """
    N1 = n + 1
    m = 2 * N1
    g_mats = []
    for W in _u_matrices(N1):
        M = QiMatrix.zero(m)
        for a in range(N1):
            for b in range(N1):
                M.set(a, b, W.re[a][b], W.im[a][b])
                M.set(N1 + a, N1 + b, W.re[a][b], -W.im[a][b])
        g_mats.append(M)
    for j in range(N1):
        for k_ in range(j + 1, N1):
            for re, im in ((1, 0), (0, 1)):
                M = QiMatrix.zero(m)
                M.set(j, N1 + k_, re, im).set(k_, N1 + j, -re, -im)
                M.set(N1 + j, k_, re, -im).set(N1 + k_, j, -re, im)
                g_mats.append(M)

    # g1 = so(2n+1) in the (1, n, 1, n) partition
    def g1_elt(u_re, u_im, W1: QiMatrix | None, Z1: QiMatrix | None) -> QiMatrix:
        M = QiMatrix.zero(m)
        for a in range(n):
            ur, ui = u_re[a], u_im[a]
            if ur or ui:
                M.set(0, 1 + a, ur, ui)          # u^T
                M.set(0, N1 + 1 + a, ur, -ui)    # conj(u)^T
                M.set(1 + a, 0, -ur, ui)         # -conj(u)
                M.set(1 + a, N1, -ur, ui)        # -conj(u)
                M.set(N1, 1 + a, ur, ui)         # u^T
                M.set(N1, N1 + 1 + a, ur, -ui)   # conj(u)^T
                M.set(N1 + 1 + a, 0, -ur, -ui)   # -u
                M.set(N1 + 1 + a, N1, -ur, -ui)  # -u
        if W1 is not None:
            for a in range(n):
                for b in range(n):
                    M.set(1 + a, 1 + b, W1.re[a][b], W1.im[a][b])
                    M.set(N1 + 1 + a, N1 + 1 + b, W1.re[a][b], -W1.im[a][b])
        if Z1 is not None:
            for a in range(n):
                for b in range(n):
                    M.set(1 + a, N1 + 1 + b, Z1.re[a][b], Z1.im[a][b])
                    M.set(N1 + 1 + a, 1 + b, Z1.re[a][b], -Z1.im[a][b])
        return M

    zero_u = [0] * n
    g1_mats = []
    for a in range(n):
        for re_part in (True, False):
            u_re = [0] * n
            u_im = [0] * n
            (u_re if re_part else u_im)[a] = 1
            g1_mats.append(g1_elt(u_re, u_im, None, None))
    for W1 in _u_matrices(n):
        g1_mats.append(g1_elt(zero_u, zero_u, W1, None))
    for j in range(n):
        for k_ in range(j + 1, n):
            for re, im in ((1, 0), (0, 1)):
                Z1 = QiMatrix.zero(n).set(j, k_, re, im).set(k_, j, -re, -im)
                g1_mats.append(g1_elt(zero_u, zero_u, None, Z1))

    # g2 = {[[A, 0], [0, -A^T]] : A in u(n+1)}
    g2_mats = []
    for A in _u_matrices(N1):
        M = QiMatrix.zero(m)
        for a in range(N1):
            for b in range(N1):
                M.set(a, b, A.re[a][b], A.im[a][b])
                M.set(N1 + a, N1 + b, -A.re[b][a], -A.im[b][a])
        g2_mats.append(M)

    # k = u(n) on the inner blocks
    k_mats = []
    for W1 in _u_matrices(n):
        M = QiMatrix.zero(m)
        for a in range(n):
            for b in range(n):
                M.set(1 + a, 1 + b, W1.re[a][b], W1.im[a][b])
                M.set(N1 + 1 + a, N1 + 1 + b, W1.re[a][b], -W1.im[a][b])
        k_mats.append(M)
    return g_mats, g1_mats, g2_mats, k_mats


def _expected_dims(family: str, n: int) -> tuple[int, int, int, int]:
    if family == "A":
        return (4 * n * n - 1, n * (2 * n + 1), (2 * n - 1) ** 2,
                2 * (n - 1) ** 2 + (n - 1) + 1)
    return ((n + 1) * (2 * n + 1), n * (2 * n + 1), (n + 1) ** 2, n * n)


def build_case(family: str, n: int, lambda1, lambda2) -> HomogeneousCase:
    family = family.upper()
    if family not in ("A", "B"):
        raise ValueError(f"family must be 'A' or 'B', got {family!r}")
    if n < 2:
        raise ValueError("n must be >= 2")
    l1, l2 = fr(lambda1), fr(lambda2)
    if l1 == l2:
        raise ValueError("eigenvalues must be distinct")
    if l1 == 0 or l2 == 0:
        raise ValueError("eigenvalues must be nonzero")

    gens = _case_a_generators(n) if family == "A" else _case_b_generators(n)
    g_mats, g1_mats, g2_mats, k_mats = gens
    g = LieAlgebra.from_matrices(g_mats, label=f"case{family}(n={n})")
    solver = ra.SpanSolver([M.flat() for M in g_mats])

    def subspace_of(mats: Sequence[QiMatrix]) -> Subspace:
        return Subspace(g, tuple(tuple(solver.coords(M.flat())) for M in mats))

    g1, g2, k = subspace_of(g1_mats), subspace_of(g2_mats), subspace_of(k_mats)
    kill = killing_gram(g)
    kperp0 = subspace_combine("ortho_complement", k, form=kill)
    k1 = subspace_combine("intersect", g1, kperp0)
    k2 = subspace_combine("intersect", g2, kperp0)

    dims = (g.dim, g1.dim, g2.dim, k.dim)
    if dims != _expected_dims(family, n):
        raise AssertionError(f"construction bug: dims {dims}")
    inter = subspace_combine("intersect", g1, g2)
    if not inter.equals(k):
        raise AssertionError("construction bug: g1 n g2 != k")
    if k1.dim + k2.dim != kperp0.dim:
        raise AssertionError("construction bug: kperp != k1 + k2")
    for sub in (g1, g2, k):
        if is_subalgebra_residual(sub) != 0:
            raise AssertionError("construction bug: not a subalgebra")

    # adapted kperp basis: k1 then k2 (projections become block-diagonal)
    kperp = Subspace(g, k1.basis + k2.basis)
    case = HomogeneousCase(
        family=family, n=n, lambda1=l1, lambda2=l2, g=g, g1=g1, g2=g2, k=k,
        kperp=kperp, k1=k1, k2=k2, killing=kill,
        inertia_matrix=(),
    )
    inertia = _inertia_matrix(case)
    object.__setattr__(case, "inertia_matrix", inertia)

    # ad k leaves k1 and k2 invariant (exact residual 0)
    for sub in (k1, k2):
        ssolver = sub.solver()
        for kb in k.basis:
            for vb in sub.basis:
                w = g.bracket(list(kb), list(vb))
                if ssolver.residual_norm(w) != 0:
                    raise AssertionError("construction bug: ad k does not preserve k_i")
    return case


def _inertia_matrix(case: HomogeneousCase) -> tuple[tuple[Fraction, ...], ...]:
    """(n + n^*)/2 on kperp, n = l1 pr1 + l2 pr2, adjoint w.r.t. -Killing|_kperp."""
    d, d1 = case.dim_m, case.k1.dim
    G = case.gram_m()
    n_op = ra.zeros(d, d)
    for i in range(d):
        n_op[i][i] = case.lambda1 if i < d1 else case.lambda2
    Ginv = ra.invert(G)
    nstar = ra.mat_mul(Ginv, ra.mat_mul(ra.transpose(n_op), G))
    half = Fraction(1, 2)
    return tuple(
        tuple(half * (n_op[i][j] + nstar[i][j]) for j in range(d))
        for i in range(d)
    )


def inertia_spectrum(case: HomogeneousCase) -> np.ndarray:
    """Eigenvalues of the inertia operator w.r.t. -Killing on kperp, sorted."""
    G = ra.to_float_matrix(case.gram_m())
    I_ = ra.to_float_matrix([list(r) for r in case.inertia_matrix])
    vals = scipy.linalg.eigh(G @ I_, G, eigvals_only=True)
    return np.sort(vals)


def positivity_window(lambda1: float) -> tuple[float, float]:
    """Open interval of lambda2 making the inertia operator positive definite."""
    if lambda1 <= 0:
        raise ValueError("lambda1 must be positive")
    return (lambda1 / (SQRT2 + 1) ** 2, lambda1 / (SQRT2 - 1) ** 2)


# ---------------------------------------------------------------------------
# the table of decompositions of compact simple Lie algebras into two
# subalgebras (static data; only the two series above carry realizations)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class OnishchikRow:
    g: str
    g1: str
    i_prime: str
    g2: str
    i_dprime: str
    k: str
    restrictions: str


_ONISHCHIK_ROWS = [
    ("A_{2n-1}", "C_n", "phi_1", "A_{2n-2}", "phi_1+N", "C_{n-1}", "n>1"),
    ("A_{2n-1}", "C_n", "phi_1", "A_{2n-2}+T", "phi_1+N", "C_{n-1}+T", "n>1"),
    ("B_3", "G_2", "phi_2", "B_2", "phi_1+2N", "A_1", ""),
    ("B_3", "G_2", "phi_2", "B_2+T", "phi_1+2N", "A_1+T", ""),
    ("B_3", "G_2", "phi_2", "D_3", "phi_1+N", "A_2", ""),
    ("D_{n+1}", "B_n", "phi_1+N", "A_n", "phi_1+phi_n", "A_{n-1}", "n>2"),
    ("D_{n+1}", "B_n", "phi_1+N", "A_n+T", "phi_1+phi_n", "A_{n-1}+T", "n>2"),
    ("D_{2n}", "B_{2n-1}", "phi_1+N", "C_n", "phi_1+phi_1", "C_{n-1}", "n>1"),
    ("D_{2n}", "B_{2n-1}", "phi_1+N", "C_n+T", "phi_1+phi_1", "C_{n-1}+T", "n>1"),
    ("D_{2n}", "B_{2n-1}", "phi_1+N", "C_n+A_1", "phi_1+phi_1", "C_{n-1}+A_1", "n>1"),
    ("D_8", "B_7", "phi_1+N", "B_4", "phi_4", "B_3", ""),
    ("D_4", "B_3", "phi_3", "B_2", "phi_1+3N", "A_1", ""),
    ("D_4", "B_3", "phi_3", "B_2+T", "phi_1+3N", "A_1+T", ""),
    ("D_4", "B_3", "phi_3", "B_2+A_1", "phi_1+3N", "A_1+A_1", ""),
    ("D_4", "B_3", "phi_3", "D_3", "phi_1+2N", "A_2", ""),
    ("D_4", "B_3", "phi_3", "D_3+T", "phi_1+2N", "A_2+T", ""),
    ("D_4", "B_3", "phi_3", "B_3", "phi_1+N", "G_2", ""),
]


def onishchik_table() -> list[OnishchikRow]:
    return [OnishchikRow(*row) for row in _ONISHCHIK_ROWS]
