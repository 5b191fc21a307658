"""Algebraic Nijenhuis operators: torsion, eigenstructure, invariance,
decomposition verification, and the standard example constructions."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import rational as ra
from .cases import HomogeneousCase, _gl_matrices, _sl_matrices
from .liealg import LieAlgebra, QiMatrix, Subspace, is_subalgebra_residual, subspace_combine
from .rational import ZERO, ONE, fr


@dataclass(frozen=True)
class NijenhuisOperator:
    """Linear operator on a LieAlgebra or on a Subspace (m = kperp), exact matrix."""

    ambient: LieAlgebra | Subspace
    matrix: tuple[tuple[Fraction, ...], ...]
    eigenvalues: tuple[Fraction, ...] | None = None
    projections: tuple[tuple[tuple[Fraction, ...], ...], ...] | None = None

    @classmethod
    def from_matrix(cls, ambient, rows, eigenvalues=None) -> "NijenhuisOperator":
        mat = tuple(tuple(fr(x) for x in row) for row in rows)
        ev = tuple(fr(x) for x in eigenvalues) if eigenvalues is not None else None
        return cls(ambient, mat, ev, None)

    @property
    def dim(self) -> int:
        return len(self.matrix)

    def apply(self, v: Sequence[Fraction]) -> list[Fraction]:
        return ra.mat_vec([list(r) for r in self.matrix], list(v))

    def to_float(self) -> np.ndarray:
        return ra.to_float_matrix([list(r) for r in self.matrix])

    def eigen_residual(self) -> Fraction:
        """Exact defect of the eigendata: sum pr = id, pr_i pr_j = d_ij pr_i,
        matrix = sum lambda_i pr_i. Requires eigenvalues and projections."""
        if self.eigenvalues is None or self.projections is None:
            raise ValueError("operator has no eigendata")
        d = self.dim
        worst = ZERO
        total = ra.zeros(d, d)
        recon = ra.zeros(d, d)
        prs = [[list(r) for r in P] for P in self.projections]
        for lam, P in zip(self.eigenvalues, prs):
            for i in range(d):
                for j in range(d):
                    total[i][j] += P[i][j]
                    recon[i][j] += lam * P[i][j]
        for i in range(d):
            for j in range(d):
                worst = max(worst, abs(total[i][j] - (ONE if i == j else ZERO)))
                worst = max(worst, abs(recon[i][j] - self.matrix[i][j]))
        for a, Pa in enumerate(prs):
            for b, Pb in enumerate(prs):
                prod = ra.mat_mul(Pa, Pb)
                target = Pa if a == b else ra.zeros(d, d)
                for i in range(d):
                    for j in range(d):
                        worst = max(worst, abs(prod[i][j] - target[i][j]))
        return worst


def torsion_residual(op: NijenhuisOperator) -> Fraction:
    """Max-abs of [nX,nY] - n([nX,Y] + [X,nY] - n[X,Y]) over basis pairs, exact."""
    A = op.ambient
    if not isinstance(A, LieAlgebra):
        raise ValueError("torsion is computed for operators on a full LieAlgebra")
    d = A.dim
    cols = [[op.matrix[i][j] for i in range(d)] for j in range(d)]  # n e_j
    worst = ZERO
    for i in range(d):
        ni = cols[i]
        ei = [ONE if t == i else ZERO for t in range(d)]
        for j in range(i + 1, d):
            nj = cols[j]
            ej = [ONE if t == j else ZERO for t in range(d)]
            lhs = A.bracket(ni, nj)
            inner = [x + y for x, y in zip(A.bracket(ni, ej), A.bracket(ei, nj))]
            nbr = op.apply(A.bracket(ei, ej))
            inner = [x - y for x, y in zip(inner, nbr)]
            res = [x - y for x, y in zip(lhs, op.apply(inner))]
            m = ra.max_abs(res)
            if m > worst:
                worst = m
    return worst


def eigen_projections(op: NijenhuisOperator, eigenvalues: Sequence) -> NijenhuisOperator:
    """Complete the operator with projections pr_i = prod_{j!=i} (op - l_j)/(l_i - l_j).

    Eigenvalues must be distinct and exhaust the spectrum (semisimple over R);
    otherwise the reconstruction residual trips and a ValueError is raised.
    """
    evs = [fr(x) for x in eigenvalues]
    if len(set(evs)) != len(evs):
        raise ValueError("eigenvalues must be distinct")
    d = op.dim
    M = [list(r) for r in op.matrix]
    prs = []
    for i, li in enumerate(evs):
        P = ra.identity(d)
        for j, lj in enumerate(evs):
            if i == j:
                continue
            shifted = [[M[a][b] - (lj if a == b else ZERO) for b in range(d)] for a in range(d)]
            scaled = [[x / (li - lj) for x in row] for row in shifted]
            P = ra.mat_mul(P, scaled)
        prs.append(tuple(tuple(row) for row in P))
    completed = NijenhuisOperator(op.ambient, op.matrix, tuple(evs), tuple(prs))
    res = completed.eigen_residual()
    if res != 0 and float(res) > 1e-10:
        raise ValueError(
            f"operator is not semisimple with the claimed spectrum (residual {float(res):.3e})")
    return completed


def _ad_action_on_subspace(sub: Subspace, k_elt: Sequence[Fraction]) -> list[list[Fraction]]:
    """Matrix of ad_{k_elt} restricted to sub (requires invariance, checked exactly)."""
    A = sub.ambient
    solver = sub.solver()
    cols = []
    for v in sub.basis:
        w = A.bracket(list(k_elt), list(v))
        coords, res = solver.reduce(w)
        if any(x != 0 for x in res):
            raise ValueError("subspace is not invariant under the given element")
        cols.append(coords)
    return [[cols[j][i] for j in range(sub.dim)] for i in range(sub.dim)]


def ad_invariance_residual(op: NijenhuisOperator, K: Subspace) -> Fraction:
    """Max-abs of n ad_k - ad_k n over the basis of K (exact).

    For operators on a Subspace m, ad_k is the bracket action restricted to m
    (m must be ad K-invariant, which holds for the homogeneous cases).
    """
    A = op.ambient
    N = [list(r) for r in op.matrix]
    worst = ZERO
    for kb in K.basis:
        if isinstance(A, LieAlgebra):
            adk = A.ad_matrix(list(kb))
        else:
            adk = _ad_action_on_subspace(A, list(kb))
        left = ra.mat_mul(N, adk)
        right = ra.mat_mul(adk, N)
        m = max(ra.max_abs(x - y for x, y in zip(lr, rr)) for lr, rr in zip(left, right))
        if m > worst:
            worst = m
    return worst


@dataclass(frozen=True)
class DecompositionReport:
    intersections_equal_k: bool
    quotient_direct: bool
    pair_sums_subalgebras: bool
    max_subalgebra_residual: Fraction
    details: dict

    @property
    def all_pass(self) -> bool:
        return (self.intersections_equal_k and self.quotient_direct
                and self.pair_sums_subalgebras)


def verify_decomposition(g: LieAlgebra, parts: Sequence[Subspace], k: Subspace) -> DecompositionReport:
    """Check the three decomposition conditions for g = g_1 + ... + g_s with
    pairwise intersections k: (1) g_i n g_j = k, (2) the induced quotient
    decomposition is direct, (3) every g_i + g_j is a subalgebra."""
    s = len(parts)
    if s < 2:
        raise ValueError("need at least two parts")
    inter_ok = True
    for i in range(s):
        for j in range(i + 1, s):
            inter = subspace_combine("intersect", parts[i], parts[j])
            if not inter.equals(k):
                inter_ok = False
    total = parts[0]
    for p in parts[1:]:
        total = subspace_combine("sum", total, p)
    dim_identity = sum(p.dim for p in parts) - (s - 1) * k.dim == g.dim
    direct_ok = dim_identity and total.dim == g.dim
    worst = ZERO
    sub_ok = True
    for i in range(s):
        for j in range(i + 1, s):
            sij = subspace_combine("sum", parts[i], parts[j])
            r = is_subalgebra_residual(sij)
            if r > worst:
                worst = r
            if r != 0:
                sub_ok = False
    return DecompositionReport(
        intersections_equal_k=inter_ok,
        quotient_direct=direct_ok,
        pair_sums_subalgebras=sub_ok,
        max_subalgebra_residual=worst,
        details={
            "part_dims": [p.dim for p in parts],
            "k_dim": k.dim,
            "sum_dim": total.dim,
            "ambient_dim": g.dim,
        },
    )


# ---------------------------------------------------------------------------
# example constructions on sl(m, R) and gl(m, R)
# ---------------------------------------------------------------------------

def _sl_root_data(m: int):
    """Basis of sl(m, R): E_jk (j != k) then diagonal D_j; positions recorded."""
    mats = _sl_matrices(m)
    pos = {}
    idx = 0
    for j in range(m):
        for k in range(m):
            if j != k:
                pos[(j, k)] = idx
                idx += 1
    return mats, pos


def _generated_positive(m: int, S: set[int]) -> set[tuple[int, int]]:
    """[S]: positive root positions (i, j), i < j, generated by simple roots in S."""
    out = set()
    for i in range(m):
        for j in range(i + 1, m):
            if all(l in S for l in range(i, j)):
                out.add((i, j))
    return out


def _span_of_positions(A: LieAlgebra, pos: dict, m: int,
                       positions: set[tuple[int, int]], with_diag: bool) -> Subspace:
    vecs = []
    for (j, k) in sorted(positions):
        v = [ZERO] * A.dim
        v[pos[(j, k)]] = ONE
        vecs.append(v)
    if with_diag:
        base = m * (m - 1)
        for t in range(m - 1):
            v = [ZERO] * A.dim
            v[base + t] = ONE
            vecs.append(v)
    return Subspace(A, tuple(tuple(v) for v in vecs))


def build_example(kind: str, **params):
    """Build one of the standard Nijenhuis examples.

    kind = 'parabolic_pair': params m, S (set of simple-root indices 0..m-2),
        lambda1, lambda2. Returns (sl(m,R), (p, p_opposite), k, operator) with
        the operator = l1 on p, l2 on the nilradical complement p_perp.
    kind = 'seaweed': params m, S, S2, lambda1, lambda2. Parts are the lower
        parabolic p_S and the upper parabolic p'_{S2}; k is their intersection
        (the seaweed subalgebra).
    kind = 'left_mult': params A (rational square matrix). Returns
        (gl(m,R), parts, Z(A), L_A).
    """
    l1 = fr(params.get("lambda1", 2))
    l2 = fr(params.get("lambda2", 3))
    if kind in ("parabolic_pair", "seaweed"):
        m = params["m"]
        S = set(params["S"])
        if not S <= set(range(m - 1)):
            raise ValueError("invalid simple-root subset")
        mats, pos = _sl_root_data(m)
        A = LieAlgebra.from_matrices(mats, label=f"sl({m},R)")
        lower = {(j, k) for k in range(m) for j in range(k + 1, m)}  # negatives
        upper = {(j, k) for j in range(m) for k in range(j + 1, m)}
        genS = _generated_positive(m, S)
        p_low = _span_of_positions(A, pos, m, lower | genS, with_diag=True)
        p_perp = _span_of_positions(A, pos, m, upper - genS, with_diag=False)
        if kind == "parabolic_pair":
            genS_op = {(k, j) for (j, k) in genS}
            p_opp = _span_of_positions(A, pos, m, upper | genS_op, with_diag=True)
            parts = (p_low, p_opp)
            k_sub = subspace_combine("intersect", p_low, p_opp)
        else:
            S2 = set(params["S2"])
            if not S2 <= set(range(m - 1)):
                raise ValueError("invalid simple-root subset")
            genS2 = {(k, j) for (j, k) in _generated_positive(m, S2)}
            p_up = _span_of_positions(A, pos, m, upper | genS2, with_diag=True)
            parts = (p_low, p_up)
            k_sub = subspace_combine("intersect", p_low, p_up)
        # operator: l1 on the parabolic, l2 on its Killing-orthocomplement
        M = ra.zeros(A.dim, A.dim)
        basis_all = [list(v) for v in parts[0].basis] + [list(v) for v in p_perp.basis]
        solver = ra.SpanSolver(basis_all)
        d1 = parts[0].dim
        for col in range(A.dim):
            e = [ZERO] * A.dim
            e[col] = ONE
            c = solver.coords(e)
            img = [ZERO] * A.dim
            for i, coef in enumerate(c):
                lam = l1 if i < d1 else l2
                if coef:
                    for r in range(A.dim):
                        img[r] += lam * coef * basis_all[i][r]
            for r in range(A.dim):
                M[r][col] = img[r]
        op = NijenhuisOperator.from_matrix(A, M, eigenvalues=(l1, l2))
        return A, parts, k_sub, op
    if kind == "left_mult":
        Amat = [[fr(x) for x in row] for row in params["A"]]
        m = len(Amat)
        mats = _gl_matrices(m)
        A = LieAlgebra.from_matrices(mats, label=f"gl({m},R)")
        # basis order: E_jk with j row, k col; index j*m + k
        M = ra.zeros(A.dim, A.dim)
        for j in range(m):
            for k in range(m):
                col = j * m + k
                # L_A E_jk = sum_l A[l][j] E_lk
                for l in range(m):
                    if Amat[l][j]:
                        M[l * m + k][col] = Amat[l][j]
        op = NijenhuisOperator.from_matrix(A, M)
        # parts g_i = diagonal + i-th row; k = diagonal (for diagonal A)
        diag_vecs = []
        for t in range(m):
            v = [ZERO] * A.dim
            v[t * m + t] = ONE
            diag_vecs.append(v)
        k_sub = Subspace(A, tuple(tuple(v) for v in diag_vecs))
        parts = []
        for i in range(m):
            vecs = list(diag_vecs)
            for k in range(m):
                if k != i:
                    v = [ZERO] * A.dim
                    v[i * m + k] = ONE
                    vecs.append(v)
            parts.append(Subspace(A, tuple(tuple(v) for v in vecs)))
        return A, tuple(parts), k_sub, op
    raise ValueError(f"unknown example kind {kind!r}")


def invariant_N_from_case(case: HomogeneousCase) -> NijenhuisOperator:
    """N = l1 pr_{k1} + l2 pr_{k2} on kperp (adapted coordinates: diagonal)."""
    d, d1 = case.dim_m, case.k1.dim
    M = ra.zeros(d, d)
    for i in range(d):
        M[i][i] = case.lambda1 if i < d1 else case.lambda2
    p1, p2 = case.projections()
    return NijenhuisOperator(
        case.kperp,
        tuple(tuple(row) for row in M),
        (case.lambda1, case.lambda2),
        (tuple(tuple(r) for r in p1), tuple(tuple(r) for r in p2)),
    )


def symmetrization_matches_inertia(case: HomogeneousCase) -> Fraction:
    """Exact residual between (N + N^*)/2 and the case inertia matrix."""
    N = invariant_N_from_case(case)
    G = case.gram_m()
    Ginv = ra.invert(G)
    nstar = ra.mat_mul(Ginv, ra.mat_mul(ra.transpose([list(r) for r in N.matrix]), G))
    half = Fraction(1, 2)
    worst = ZERO
    for i in range(case.dim_m):
        for j in range(case.dim_m):
            diff = abs(half * (N.matrix[i][j] + nstar[i][j]) - case.inertia_matrix[i][j])
            if diff > worst:
                worst = diff
    return worst
