"""Structure-constant Lie algebra engine.

A LieAlgebra is a finite-dimensional real Lie algebra given by exact rational
structure constants, optionally backed by an exact matrix realization of the
basis (entries in Q + iQ). All core predicates (Jacobi, subalgebra, ranks)
are decided exactly over Q; float views exist for the dynamics layer.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import rational as ra
from .rational import Fraction as Fr, Mat, Vec, ZERO, ONE, fr

SparseBrackets = Mapping[tuple[int, int], tuple[tuple[int, Fraction], ...]]


class QiMatrix:
    """Exact square matrix over Q + iQ, stored as rational real/imaginary parts."""

    __slots__ = ("re", "im", "n")

    def __init__(self, re: Mat, im: Mat | None = None):
        self.re = [list(map(fr, row)) for row in re]
        n = len(self.re)
        self.im = [list(map(fr, row)) for row in im] if im is not None else ra.zeros(n, n)
        self.n = n

    @classmethod
    def zero(cls, n: int) -> "QiMatrix":
        return cls(ra.zeros(n, n), ra.zeros(n, n))

    def set(self, i: int, j: int, re, im=0) -> "QiMatrix":
        self.re[i][j] = fr(re)
        self.im[i][j] = fr(im)
        return self

    def add(self, other: "QiMatrix") -> "QiMatrix":
        return QiMatrix(
            [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.re, other.re)],
            [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.im, other.im)],
        )

    def sub(self, other: "QiMatrix") -> "QiMatrix":
        return QiMatrix(
            [[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self.re, other.re)],
            [[a - b for a, b in zip(r1, r2)] for r1, r2 in zip(self.im, other.im)],
        )

    def scale(self, re, im=0) -> "QiMatrix":
        a, b = fr(re), fr(im)
        return QiMatrix(
            [[a * x - b * y for x, y in zip(r1, r2)] for r1, r2 in zip(self.re, self.im)],
            [[a * y + b * x for x, y in zip(r1, r2)] for r1, r2 in zip(self.re, self.im)],
        )

    def matmul(self, other: "QiMatrix") -> "QiMatrix":
        n = self.n
        out = QiMatrix.zero(n)
        for i in range(n):
            for k in range(n):
                ar, ai = self.re[i][k], self.im[i][k]
                if ar == 0 and ai == 0:
                    continue
                br_row, bi_row = other.re[k], other.im[k]
                ore, oim = out.re[i], out.im[i]
                for j in range(n):
                    br, bi = br_row[j], bi_row[j]
                    if br == 0 and bi == 0:
                        continue
                    ore[j] += ar * br - ai * bi
                    oim[j] += ar * bi + ai * br
        return out

    def commutator(self, other: "QiMatrix") -> "QiMatrix":
        return self.matmul(other).sub(other.matmul(self))

    def conj_transpose(self) -> "QiMatrix":
        return QiMatrix(ra.transpose(self.re), [[-x for x in row] for row in ra.transpose(self.im)])

    def trace(self) -> tuple[Fraction, Fraction]:
        return (
            sum((self.re[i][i] for i in range(self.n)), ZERO),
            sum((self.im[i][i] for i in range(self.n)), ZERO),
        )

    def flat(self) -> Vec:
        """Real coordinates: all real entries then all imaginary entries."""
        out: Vec = []
        for row in self.re:
            out.extend(row)
        for row in self.im:
            out.extend(row)
        return out

    def is_zero(self) -> bool:
        return all(x == 0 for row in self.re for x in row) and all(
            x == 0 for row in self.im for x in row
        )

    def to_complex(self) -> np.ndarray:
        return ra.to_float_matrix(self.re) + 1j * ra.to_float_matrix(self.im)

    def max_abs(self) -> Fraction:
        return max(ra.max_abs(x for row in self.re for x in row),
                   ra.max_abs(x for row in self.im for x in row))


@dataclass(frozen=True)
class LieAlgebra:
    """Real Lie algebra by structure constants c[i][j][k], [e_i,e_j] = sum_k c_ijk e_k."""

    dim: int
    brackets: SparseBrackets  # keys (i, j) with i < j, values ((k, coeff), ...)
    label: str = ""
    basis_matrices: tuple[QiMatrix, ...] | None = None
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    @classmethod
    def from_structure_constants(
        cls,
        dim: int,
        entries: Iterable[tuple[int, int, int, Fraction]],
        label: str = "",
        basis_matrices: Sequence[QiMatrix] | None = None,
    ) -> "LieAlgebra":
        table: dict[tuple[int, int], dict[int, Fraction]] = {}
        for i, j, k, c in entries:
            c = fr(c)
            if c == 0 or i == j:
                continue
            if i > j:
                i, j, c = j, i, -c
            table.setdefault((i, j), {})
            table[(i, j)][k] = table[(i, j)].get(k, ZERO) + c
        brackets = {
            key: tuple(sorted((k, v) for k, v in d.items() if v != 0))
            for key, d in table.items()
        }
        brackets = {key: val for key, val in brackets.items() if val}
        return cls(dim, brackets, label,
                   tuple(basis_matrices) if basis_matrices is not None else None)

    @classmethod
    def from_matrices(cls, mats: Sequence[QiMatrix], label: str = "") -> "LieAlgebra":
        """Structure constants from an exact matrix basis (must be independent)."""
        flat = [M.flat() for M in mats]
        solver = ra.SpanSolver(flat)
        entries = []
        for i in range(len(mats)):
            for j in range(i + 1, len(mats)):
                comm = mats[i].commutator(mats[j])
                coords = solver.coords(comm.flat())
                for k, c in enumerate(coords):
                    if c != 0:
                        entries.append((i, j, k, c))
        return cls.from_structure_constants(len(mats), entries, label, mats)

    # -- exact bracket machinery -------------------------------------------

    def c(self, i: int, j: int, k: int) -> Fraction:
        if i == j:
            return ZERO
        sign = ONE
        if i > j:
            i, j, sign = j, i, -ONE
        for kk, v in self.brackets.get((i, j), ()):
            if kk == k:
                return sign * v
        return ZERO

    def bracket_basis(self, i: int, j: int) -> list[tuple[int, Fraction]]:
        if i == j:
            return []
        if i < j:
            return list(self.brackets.get((i, j), ()))
        return [(k, -v) for k, v in self.brackets.get((j, i), ())]

    def bracket(self, x: Sequence[Fraction], y: Sequence[Fraction]) -> Vec:
        if len(x) != self.dim or len(y) != self.dim:
            raise ValueError("vector length does not match algebra dimension")
        out = [ZERO] * self.dim
        for (i, j), terms in self.brackets.items():
            coef = x[i] * y[j] - x[j] * y[i]
            if coef:
                for k, v in terms:
                    out[k] += coef * v
        return out

    def ad_matrix(self, x: Sequence[Fraction]) -> Mat:
        """Matrix of ad_x: column j is [x, e_j]."""
        M = ra.zeros(self.dim, self.dim)
        for (i, j), terms in self.brackets.items():
            if x[i]:
                for k, v in terms:
                    M[k][j] += x[i] * v
            if x[j]:
                for k, v in terms:
                    M[k][i] -= x[j] * v
        return M

    # -- float views --------------------------------------------------------

    def structure_tensor(self) -> np.ndarray:
        """Dense float c[i, j, k]."""
        if "c_float" not in self._cache:
            C = np.zeros((self.dim, self.dim, self.dim))
            for (i, j), terms in self.brackets.items():
                for k, v in terms:
                    C[i, j, k] = float(v)
                    C[j, i, k] = -float(v)
            self._cache["c_float"] = C
        return self._cache["c_float"]


@dataclass(frozen=True)
class BilinearFormMatrix:
    """Symmetric bilinear form on a LieAlgebra, as an exact Gram matrix."""

    gram: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        n = len(self.gram)
        for i in range(n):
            for j in range(n):
                if self.gram[i][j] != self.gram[j][i]:
                    raise ValueError("form is not symmetric")

    @property
    def dim(self) -> int:
        return len(self.gram)

    def pair(self, x: Sequence[Fraction], y: Sequence[Fraction]) -> Fraction:
        return sum(
            (self.gram[i][j] * x[i] * y[j]
             for i in range(self.dim) for j in range(self.dim)
             if self.gram[i][j] and x[i] and y[j]),
            ZERO,
        )

    def rank(self) -> int:
        return ra.rank([list(row) for row in self.gram])

    def to_float(self) -> np.ndarray:
        return ra.to_float_matrix([list(row) for row in self.gram])


@dataclass(frozen=True)
class Subspace:
    """Linear subspace of a LieAlgebra spanned by exact coordinate vectors."""

    ambient: LieAlgebra
    basis: tuple[tuple[Fraction, ...], ...]
    _cache: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        if self.basis and ra.rank([list(v) for v in self.basis]) != len(self.basis):
            raise ValueError("basis vectors are linearly dependent")

    @classmethod
    def from_vectors(cls, ambient: LieAlgebra, vectors: Sequence[Sequence]) -> "Subspace":
        return cls(ambient, tuple(tuple(map(fr, v)) for v in vectors))

    @property
    def dim(self) -> int:
        return len(self.basis)

    def solver(self) -> ra.SpanSolver:
        if "solver" not in self._cache:
            self._cache["solver"] = ra.SpanSolver([list(v) for v in self.basis])
        return self._cache["solver"]

    def contains(self, v: Sequence[Fraction]) -> bool:
        if self.dim == 0:
            return all(x == 0 for x in v)
        return self.solver().contains(v)

    def coords(self, v: Sequence[Fraction]) -> Vec:
        return self.solver().coords(v)

    def equals(self, other: "Subspace") -> bool:
        if self.dim != other.dim:
            return False
        return all(other.contains(v) for v in self.basis)

    def to_float(self) -> np.ndarray:
        """Columns are the basis vectors."""
        if self.dim == 0:
            return np.zeros((self.ambient.dim, 0))
        return ra.to_float_matrix([list(v) for v in self.basis]).T


# ---------------------------------------------------------------------------
# operations
# ---------------------------------------------------------------------------

def bracket(A: LieAlgebra, x: Sequence, y: Sequence) -> Vec:
    return A.bracket([fr(v) for v in x], [fr(v) for v in y])


def jacobi_residual(A: LieAlgebra) -> Fraction:
    """Max-abs Jacobi defect over basis triples; exactly 0 iff Jacobi holds."""
    worst = ZERO
    d = A.dim

    def term(i, j, l, acc):
        for k, v in A.bracket_basis(i, j):
            for kk, vv in A.bracket_basis(k, l):
                acc[kk] += v * vv

    for i in range(d):
        for j in range(i + 1, d):
            for l in range(j + 1, d):
                acc = [ZERO] * d
                term(i, j, l, acc)
                term(j, l, i, acc)
                term(l, i, j, acc)
                m = ra.max_abs(acc)
                if m > worst:
                    worst = m
    return worst


def matrix_consistency_residual(A: LieAlgebra) -> Fraction:
    """Check commutators of basis_matrices re-expand to the structure constants."""
    if A.basis_matrices is None:
        raise ValueError("algebra has no matrix realization")
    mats = A.basis_matrices
    worst = ZERO
    for i in range(A.dim):
        for j in range(i + 1, A.dim):
            expected = QiMatrix.zero(mats[0].n)
            for k, v in A.bracket_basis(i, j):
                expected = expected.add(mats[k].scale(v))
            diff = mats[i].commutator(mats[j]).sub(expected)
            m = diff.max_abs()
            if m > worst:
                worst = m
    return worst


def killing_gram(A: LieAlgebra) -> BilinearFormMatrix:
    """K(e_i, e_j) = tr(ad e_i ad e_j), exact."""
    d = A.dim
    # sparse ad rows: ad_i as dict col -> list of (row, coeff)
    ad: list[dict[int, list[tuple[int, Fraction]]]] = [dict() for _ in range(d)]
    for (i, j), terms in A.brackets.items():
        for k, v in terms:
            ad[i].setdefault(j, []).append((k, v))
            ad[j].setdefault(i, []).append((k, -v))
    gram = ra.zeros(d, d)
    for i in range(d):
        for j in range(i, d):
            # tr(ad_i ad_j) = sum_{a,b} (ad_i)[b][a] (ad_j)[a][b]
            tot = ZERO
            for a, col in ad[j].items():
                for b, v in col:
                    for bb, w in ad[i].get(b, ()):
                        if bb == a:
                            tot += v * w
            gram[i][j] = tot
            gram[j][i] = tot
    return BilinearFormMatrix(tuple(tuple(row) for row in gram))


def coadjoint_pencil_matrix(A: LieAlgebra, x: Sequence) -> Mat:
    """M[j][k] = sum_i c[j][k][i] x_i (antisymmetric); corank at generic x = ind g."""
    xs = [fr(v) for v in x]
    if len(xs) != A.dim:
        raise ValueError("covector length does not match algebra dimension")
    M = ra.zeros(A.dim, A.dim)
    for (j, k), terms in A.brackets.items():
        val = sum((v * xs[i] for i, v in terms), ZERO)
        M[j][k] = val
        M[k][j] = -val
    return M


def subspace_combine(kind: str, U: Subspace, V: Subspace | None = None,
                     form: BilinearFormMatrix | None = None) -> Subspace:
    A = U.ambient
    if kind in ("sum", "intersect"):
        if V is None:
            raise ValueError(f"{kind} needs a second subspace")
        if V.ambient is not A and V.ambient.dim != A.dim:
            raise ValueError("subspaces live in different ambient algebras")
    if kind == "sum":
        rows = [list(v) for v in U.basis] + [list(v) for v in V.basis]
        return Subspace(A, tuple(tuple(v) for v in ra.column_reduce(rows)))
    if kind == "intersect":
        if U.dim == 0 or V.dim == 0:
            return Subspace(A, ())
        # x = U^T a = V^T b  ->  nullspace of [U^T | -V^T]
        rows = []
        for r in range(A.dim):
            rows.append([U.basis[i][r] for i in range(U.dim)]
                        + [-V.basis[i][r] for i in range(V.dim)])
        combos = ra.nullspace(rows)
        vecs = []
        for c in combos:
            v = [ZERO] * A.dim
            for i in range(U.dim):
                if c[i]:
                    for r in range(A.dim):
                        v[r] += c[i] * U.basis[i][r]
            vecs.append(v)
        return Subspace(A, tuple(tuple(v) for v in ra.column_reduce(vecs)))
    if kind == "ortho_complement":
        if form is None:
            raise ValueError("ortho_complement needs a bilinear form")
        if form.rank() != A.dim:
            raise ValueError("form is degenerate on the ambient algebra")
        rows = [ra.mat_vec([list(r) for r in form.gram], list(u)) for u in U.basis]
        return Subspace(A, tuple(tuple(v) for v in ra.nullspace(rows)))
    raise ValueError(f"unknown combine kind {kind!r}")


def is_subalgebra_residual(U: Subspace) -> Fraction:
    """Max component of [u_i, u_j] outside U (echelon residual); 0 iff subalgebra."""
    if U.dim <= 1:
        return ZERO
    A, s = U.ambient, U.solver()
    worst = ZERO
    for i in range(U.dim):
        for j in range(i + 1, U.dim):
            w = A.bracket(list(U.basis[i]), list(U.basis[j]))
            r = s.residual_norm(w)
            if r > worst:
                worst = r
    return worst


def centralizer(U: Subspace, E: Sequence) -> Subspace:
    """{Y in U : [Y, E] = 0}, exact kernel computation."""
    A = U.ambient
    Ev = [fr(v) for v in E]
    if U.dim == 0:
        return U
    # columns: images [u_i, E]; kernel of the dim x U.dim matrix
    cols = [A.bracket(list(u), Ev) for u in U.basis]
    rows = [[cols[c][r] for c in range(U.dim)] for r in range(A.dim)]
    combos = ra.nullspace(rows)
    vecs = []
    for cvec in combos:
        v = [ZERO] * A.dim
        for i in range(U.dim):
            if cvec[i]:
                for r in range(A.dim):
                    v[r] += cvec[i] * U.basis[i][r]
        vecs.append(v)
    return Subspace(A, tuple(tuple(v) for v in ra.column_reduce(vecs)))


def centralizer_dim_complexified(U: Subspace, E_re: Sequence, E_im: Sequence) -> int:
    """dim_C of {Y in U^C : [Y, E_re + i E_im] = 0} via the realified kernel."""
    A = U.ambient
    er, ei = [fr(v) for v in E_re], [fr(v) for v in E_im]
    if U.dim == 0:
        return 0
    cols_r = [A.bracket(list(u), er) for u in U.basis]
    cols_i = [A.bracket(list(u), ei) for u in U.basis]
    # unknowns (a, b) for Y = sum a_i u_i + i sum b_i u_i; equations re/im of [Y, E] = 0
    rows = []
    for r in range(A.dim):
        rows.append([cols_r[c][r] for c in range(U.dim)]
                    + [-cols_i[c][r] for c in range(U.dim)])
    for r in range(A.dim):
        rows.append([cols_i[c][r] for c in range(U.dim)]
                    + [cols_r[c][r] for c in range(U.dim)])
    kern = ra.nullspace(rows)
    assert len(kern) % 2 == 0
    return len(kern) // 2


def complement_basis(A: LieAlgebra, H: Subspace,
                     form: BilinearFormMatrix | None = None) -> list[Vec]:
    """Complement of H in A: orthogonal w.r.t. form when definite there, else echelon."""
    if form is not None and form.rank() == A.dim:
        W = subspace_combine("ortho_complement", H, form=form)
        gram_w = [[form.pair(list(u), list(v)) for v in W.basis] for u in W.basis]
        for sign in (1, -1):
            signed = [[sign * x for x in row] for row in gram_w]
            if W.dim == 0 or ra.leading_principal_minors_positive(signed):
                # definite restriction; also need H + W = A (true iff form
                # nondegenerate on H, which definiteness of the complement implies
                # for a nondegenerate ambient form)
                if len(W.basis) == A.dim - H.dim:
                    stacked = [list(v) for v in H.basis] + [list(v) for v in W.basis]
                    if ra.rank(stacked) == A.dim:
                        return [list(v) for v in W.basis]
                break
    # echelon complement: standard basis vectors missing from H's pivot set
    _, pivots = ra.rref([list(v) for v in H.basis])
    out = []
    for c in range(A.dim):
        if c not in pivots:
            v = [ZERO] * A.dim
            v[c] = ONE
            out.append(v)
    return out


def semidirect_contraction(A: LieAlgebra, H: Subspace,
                           form: BilinearFormMatrix | None = None) -> LieAlgebra:
    """h |x (g/h) with g/h abelian; basis = echelonized H basis followed by an
    echelonized complement basis (quotient classes, so the choice of complement
    section does not affect the result)."""
    res = is_subalgebra_residual(H)
    if res != 0:
        raise ValueError(f"subspace is not a subalgebra (residual {res})")
    if form is None:
        form = killing_gram(A)
    comp = complement_basis(A, H, form)
    solver = ra.QuotientSplitSolver([list(v) for v in H.basis], comp)
    h_rows, w_rows = solver.RH, solver.RW
    hdim = H.dim
    full = h_rows + w_rows
    entries = []
    for i in range(len(full)):
        for j in range(i + 1, len(full)):
            if i >= hdim and j >= hdim:
                continue  # [g/h, g/h] = 0
            w = A.bracket(full[i], full[j])
            a, b = solver.coords(w)
            if i < hdim and j < hdim:
                coords = list(a) + [ZERO] * (A.dim - hdim)  # stays in H
            else:
                coords = [ZERO] * hdim + list(b)  # class in g/h
            for k, c in enumerate(coords):
                if c != 0:
                    entries.append((i, j, k, c))
    return LieAlgebra.from_structure_constants(
        A.dim, entries, label=f"{A.label or 'g'}>sdc")


# ---------------------------------------------------------------------------
# JSON interchange
# ---------------------------------------------------------------------------

def algebra_to_json(A: LieAlgebra) -> str:
    c = []
    for (i, j), terms in sorted(A.brackets.items()):
        for k, v in terms:
            c.append([i, j, k, str(v)])
    return json.dumps({"dim": A.dim, "c": c, "label": A.label}, sort_keys=True)


def algebra_from_json(text: str) -> LieAlgebra:
    data = json.loads(text)
    entries = [(i, j, k, Fraction(s)) for i, j, k, s in data["c"]]
    return LieAlgebra.from_structure_constants(data["dim"], entries, data.get("label", ""))
