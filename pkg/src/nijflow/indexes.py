"""Lie algebra index, semidirect contractions, and the kroneckerity /
integrability criteria: index equalities, the Rais formula spot check,
the Z2-contraction equality, and stabilizer witnesses."""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import rational as ra
from .cases import HomogeneousCase
from .liealg import (
    LieAlgebra,
    QiMatrix,
    Subspace,
    centralizer,
    centralizer_dim_complexified,
    coadjoint_pencil_matrix,
    semidirect_contraction,
)
from .rational import ZERO, ONE, fr

COVECTOR_BOUND = 10 ** 6


@dataclass(frozen=True)
class IndexReport:
    algebra_label: str
    dim: int
    index: int
    method: str
    samples: int
    per_sample_coranks: tuple[int, ...]

    @property
    def stable(self) -> bool:
        return len(set(self.per_sample_coranks)) == 1


def _random_covector(rng: random.Random, dim: int) -> list[Fraction]:
    return [Fraction(rng.randint(-COVECTOR_BOUND, COVECTOR_BOUND)) for _ in range(dim)]


def _corank_exact(A: LieAlgebra, x: Sequence[Fraction]) -> int:
    M = coadjoint_pencil_matrix(A, x)
    return A.dim - ra.bareiss_rank(ra.integer_scaled(M))


def _corank_svd(A: LieAlgebra, x: Sequence[float]) -> int:
    C = A.structure_tensor()
    M = np.einsum("jki,i->jk", C, np.asarray(x, dtype=float))
    if not np.any(M):
        return A.dim
    s = np.linalg.svd(M, compute_uv=False)
    return A.dim - int((s > 1e-8 * s[0]).sum())


def lie_index(A: LieAlgebra, samples: int = 5, method: str = "exact_rational",
              seed: int = 42) -> IndexReport:
    """Index = min corank of the coadjoint pencil matrix over random covectors."""
    if samples < 3:
        raise ValueError("need at least 3 samples")
    if A.dim == 0:
        return IndexReport(A.label, 0, 0, method, samples, tuple([0] * samples))
    rng = random.Random(seed)
    coranks = []
    for _ in range(samples):
        x = _random_covector(rng, A.dim)
        if method == "exact_rational":
            coranks.append(_corank_exact(A, x))
        elif method == "floating_svd":
            coranks.append(_corank_svd(A, [float(v) for v in x]))
        else:
            raise ValueError(f"unknown method {method!r}")
    return IndexReport(A.label, A.dim, min(coranks), method, samples, tuple(coranks))


def contraction_index(A: LieAlgebra, H: Subspace, samples: int = 5,
                      seed: int = 42, method: str = "exact_rational") -> IndexReport:
    contr = semidirect_contraction(A, H)
    return lie_index(contr, samples=samples, method=method, seed=seed)


def _subalgebra_algebra(A: LieAlgebra, basis: list[list[Fraction]], label: str) -> LieAlgebra:
    """LieAlgebra structure on the span of `basis` (must be a subalgebra)."""
    if not basis:
        return LieAlgebra.from_structure_constants(0, [], label)
    solver = ra.SpanSolver(basis)
    entries = []
    for i in range(len(basis)):
        for j in range(i + 1, len(basis)):
            w = A.bracket(basis[i], basis[j])
            coords = solver.coords(w)
            for k, c in enumerate(coords):
                if c != 0:
                    entries.append((i, j, k, c))
    return LieAlgebra.from_structure_constants(len(basis), entries, label)


@dataclass(frozen=True)
class RaisSample:
    a: tuple[Fraction, ...]
    stab_dim: int
    stab_index: int
    orbit_codim: int
    total: int
    generic: bool


@dataclass(frozen=True)
class RaisReport:
    contraction_index: int
    samples: tuple[RaisSample, ...]

    @property
    def generic_fraction(self) -> float:
        if not self.samples:
            return 0.0
        return sum(s.generic for s in self.samples) / len(self.samples)

    @property
    def all_generic_agree(self) -> bool:
        return all(s.total == self.contraction_index for s in self.samples if s.generic)


def rais_check(A: LieAlgebra, H: Subspace, trials: int = 10, seed: int = 42,
               samples: int = 5) -> RaisReport:
    """For random a in (g/h)*: ind h^a + codim_{(g/h)*} O_a vs ind(h |x g/h).

    h^a is the stabilizer of a under the coadjoint action of h on (g/h)*;
    a sample is flagged generic when the Rais sum equals the contraction index.
    """
    from .liealg import complement_basis, killing_gram

    kill = killing_gram(A)
    comp = complement_basis(A, H, kill)
    full = [list(v) for v in H.basis] + comp
    solver = ra.SpanSolver(full)
    hdim, qdim = H.dim, len(comp)
    cind = contraction_index(A, H, samples=samples, seed=seed).index
    rng = random.Random(seed)
    out = []
    for _ in range(trials):
        a = [Fraction(rng.randint(-100, 100)) for _ in range(qdim)]
        # map Y in h -> functional q |-> a([Y, q] mod h) on g/h; stabilizer = kernel
        rows = []
        for yi in range(hdim):
            row = []
            for qj in range(qdim):
                w = A.bracket(full[yi], comp[qj])
                coords = solver.coords(w)
                val = sum((a[t] * coords[hdim + t] for t in range(qdim)), ZERO)
                row.append(val)
            rows.append(row)
        # kernel over h-coefficients: rows indexed by y? build matrix (qdim x hdim)
        M = [[rows[y][q] for y in range(hdim)] for q in range(qdim)]
        kern = ra.nullspace(M)
        stab_basis = []
        for cvec in kern:
            v = [ZERO] * A.dim
            for i in range(hdim):
                if cvec[i]:
                    for r in range(A.dim):
                        v[r] += cvec[i] * full[i][r]
            stab_basis.append(v)
        stab_basis = ra.column_reduce(stab_basis)
        stab = _subalgebra_algebra(A, stab_basis, "h^a")
        sind = lie_index(stab, samples=max(3, samples), seed=seed).index if stab.dim else 0
        orbit_codim = qdim - (hdim - stab.dim)
        total = sind + orbit_codim
        out.append(RaisSample(tuple(a), stab.dim, sind, orbit_codim, total,
                              generic=(total == cind)))
    return RaisReport(cind, tuple(out))


@dataclass(frozen=True)
class KroneckerReport:
    index_g: int
    per_part: tuple[tuple[str, int, bool], ...]  # (label, contraction index, pass)

    @property
    def all_pass(self) -> bool:
        return all(p for _, _, p in self.per_part)


def kronecker_check(case: HomogeneousCase, samples: int = 5, seed: int = 42) -> KroneckerReport:
    """Index condition for the two-eigenvalue pencil: with s = 2 the complementary
    subalgebras are gcheck_1 = g2 and gcheck_2 = g1; both contractions must have
    the index of g."""
    ind_g = lie_index(case.g, samples=samples, seed=seed).index
    rows = []
    for label, sub in (("gcheck1=g2", case.g2), ("gcheck2=g1", case.g1)):
        ci = contraction_index(case.g, sub, samples=samples, seed=seed).index
        rows.append((label, ci, ci == ind_g))
    return KroneckerReport(ind_g, tuple(rows))


def brailov_check(A: LieAlgebra, G0: Subspace, samples: int = 5, seed: int = 42) -> dict:
    """Z2-contraction index equality ind g = ind(g0 |x g/g0) (g0 symmetric is
    the caller's claim; only the equality is verified)."""
    ind_g = lie_index(A, samples=samples, seed=seed).index
    ci = contraction_index(A, G0, samples=samples, seed=seed).index
    return {"index_g": ind_g, "contraction_index": ci, "pass": ci == ind_g}


# ---------------------------------------------------------------------------
# stabilizer witnesses
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class WitnessE:
    """Element E of kperp (complexified for family A) in kperp coordinates."""

    re_coords: tuple[Fraction, ...]
    im_coords: tuple[Fraction, ...]

    @property
    def is_real(self) -> bool:
        return all(x == 0 for x in self.im_coords)


def _expand_complex_in_g(case: HomogeneousCase, E: QiMatrix) -> tuple[list[Fraction], list[Fraction]]:
    """Write a (possibly non skew-hermitian) matrix E as X + iY with X, Y in g,
    returning their g-coordinate vectors. Uses X = (E - E^dag)/2, Y = -i(E + E^dag)/2."""
    mats = case.g.basis_matrices
    solver = ra.SpanSolver([M.flat() for M in mats])
    Edag = E.conj_transpose()
    X = E.sub(Edag).scale(Fraction(1, 2))
    Y = E.add(Edag).scale(0, Fraction(-1, 2))
    return solver.coords(X.flat()), solver.coords(Y.flat())


def witness_E(case: HomogeneousCase) -> WitnessE:
    """The stabilizer-triviality witness in kperp coordinates.

    Family A: E = E1 + E2 with E1 carrying the standard nilpotent block (and a
    single corner entry) and E2 the all-ones row/column pair; this element lives
    in the complexified kperp. Family B: E = [[0, J], [J, 0]] with J the
    tridiagonal antisymmetric block; this one is real.
    """
    n = case.n
    if case.family == "A":
        m = 2 * n
        q = n - 1
        E = QiMatrix.zero(m)
        # E1: A-block = standard nilpotent on rows/cols 0..q-1, transpose on n..n+q-1,
        # plus the b-slot (q, m-1) = 1
        for t in range(q - 1):
            E.set(t, t + 1, 1)
            E.set(n + t + 1, n + t, 1)
        E.set(q, m - 1, 1)
        # E2: u1 = v1^T = (1,...,1): v1 slot = column q (rows 0..q-1),
        # u1 slot = row q (cols 0..q-1)
        for t in range(q):
            E.set(t, q, 1)
            E.set(q, t, 1)
        xr, xi = _expand_complex_in_g(case, E)
        solver = case.kperp.solver()
        # both parts must lie in kperp
        cr = solver.coords(xr)
        ci = solver.coords(xi)
        return WitnessE(tuple(cr), tuple(ci))
    # family B: J tridiagonal antisymmetric (n+1)x(n+1); E = [[0, J], [J, 0]]
    N1 = n + 1
    E = QiMatrix.zero(2 * N1)
    for t in range(N1 - 1):
        E.set(t, N1 + t + 1, 1)
        E.set(t + 1, N1 + t, -1)
        E.set(N1 + t, t + 1, 1)
        E.set(N1 + t + 1, t, -1)
    mats = case.g.basis_matrices
    solver = ra.SpanSolver([M.flat() for M in mats])
    coords = solver.coords(E.flat())
    kcoords = case.kperp.solver().coords(coords)
    return WitnessE(tuple(kcoords), tuple([ZERO] * case.dim_m))


def witness_stabilizer_dim(case: HomogeneousCase, w: WitnessE | None = None) -> int:
    """dim of the centralizer of the witness inside k (complex dim for family A)."""
    if w is None:
        w = witness_E(case)
    B = case.kperp.basis
    d = case.g.dim

    def embed(coords: Sequence[Fraction]) -> list[Fraction]:
        v = [ZERO] * d
        for i, c in enumerate(coords):
            if c:
                for r in range(d):
                    v[r] += c * B[i][r]
        return v

    if w.is_real:
        return centralizer(case.k, embed(w.re_coords)).dim
    return centralizer_dim_complexified(case.k, embed(w.re_coords), embed(w.im_coords))


def random_stabilizer_dims(case: HomogeneousCase, count: int = 10, seed: int = 42) -> list[int]:
    """Stabilizer dimensions of random rational elements of kperp (real)."""
    rng = random.Random(seed)
    B = case.kperp.basis
    d = case.g.dim
    out = []
    for _ in range(count):
        coords = [Fraction(rng.randint(-20, 20)) for _ in range(case.dim_m)]
        v = [ZERO] * d
        for i, c in enumerate(coords):
            if c:
                for r in range(d):
                    v[r] += c * B[i][r]
        out.append(centralizer(case.k, v).dim)
    return out
