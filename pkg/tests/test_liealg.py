"""Core structure-constant engine, checked against matrix-commutator and
hand-computed oracles."""

import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import nijflow.rational as ra
from nijflow.liealg import (
    LieAlgebra,
    QiMatrix,
    Subspace,
    algebra_from_json,
    algebra_to_json,
    bracket,
    centralizer,
    coadjoint_pencil_matrix,
    is_subalgebra_residual,
    jacobi_residual,
    killing_gram,
    matrix_consistency_residual,
    semidirect_contraction,
    subspace_combine,
)

F = Fraction


def su2_paper_basis():
    """u1 = diag(i, -i), u2 = [[0,1],[-1,0]], u3 = [[0,i],[i,0]]."""
    u1 = QiMatrix.zero(2).set(0, 0, 0, 1).set(1, 1, 0, -1)
    u2 = QiMatrix.zero(2).set(0, 1, 1).set(1, 0, -1)
    u3 = QiMatrix.zero(2).set(0, 1, 0, 1).set(1, 0, 0, 1)
    return [u1, u2, u3]


@pytest.fixture(scope="module")
def su2p():
    return LieAlgebra.from_matrices(su2_paper_basis(), label="su(2)p")


def abelian(d):
    return LieAlgebra.from_structure_constants(d, [], label=f"R^{d}")


def heisenberg():
    return LieAlgebra.from_structure_constants(3, [(0, 1, 2, F(1))], label="h3")


# -- bracket --------------------------------------------------------------

def test_bracket_su2_matches_matrix_commutator_oracle(su2p):
    # oracle: numpy commutators of the defining matrices
    mats = [M.to_complex() for M in su2_paper_basis()]
    flat = np.array([M.flatten() for M in mats]).T
    flat = np.vstack([flat.real, flat.imag])
    for i in range(3):
        for j in range(3):
            comm = mats[i] @ mats[j] - mats[j] @ mats[i]
            target = np.concatenate([comm.flatten().real, comm.flatten().imag])
            coords, *_ = np.linalg.lstsq(flat, target, rcond=None)
            ei = [F(1) if t == i else F(0) for t in range(3)]
            ej = [F(1) if t == j else F(0) for t in range(3)]
            got = [float(x) for x in bracket(su2p, ei, ej)]
            assert np.allclose(got, coords, atol=1e-12)
    # [u1, u2] = 2 u3 specifically
    assert bracket(su2p, [1, 0, 0], [0, 1, 0]) == [F(0), F(0), F(2)]


def test_bracket_antisymmetry_and_abelian(su2p):
    x = [F(3), F(-2), F(5)]
    assert bracket(su2p, x, x) == [F(0)] * 3
    A = abelian(3)
    assert bracket(A, [1, 0, 0], [0, 1, 0]) == [F(0)] * 3


def test_bracket_dimension_mismatch(su2p):
    with pytest.raises(ValueError):
        bracket(su2p, [1, 0], [0, 1, 0])


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(-5, 5), min_size=3, max_size=3),
       st.lists(st.integers(-5, 5), min_size=3, max_size=3),
       st.lists(st.integers(-5, 5), min_size=3, max_size=3))
def test_bracket_bilinear_antisymmetric(x, y, z):
    A = LieAlgebra.from_matrices(su2_paper_basis())
    xf, yf, zf = ([F(v) for v in w] for w in (x, y, z))
    lhs = A.bracket([a + b for a, b in zip(xf, yf)], zf)
    rhs = [a + b for a, b in zip(A.bracket(xf, zf), A.bracket(yf, zf))]
    assert lhs == rhs
    assert A.bracket(xf, yf) == [-v for v in A.bracket(yf, xf)]


# -- jacobi ----------------------------------------------------------------

def test_jacobi_su2_and_su4(su2p, su4):
    assert jacobi_residual(su2p) == 0
    assert jacobi_residual(su4) == 0


def test_jacobi_perturbed_positive(su2p):
    # perturbing the [u1,u2] -> u3 coefficient alone keeps the cyclic sum on
    # [e_k, e_k] terms, so Jacobi survives; a mixed entry such as the
    # u1-component of [u1,u2] does break it
    entries = []
    for (i, j), terms in su2p.brackets.items():
        for k, v in terms:
            entries.append((i, j, k, v))
    entries.append((0, 1, 0, F(1)))
    bad = LieAlgebra.from_structure_constants(3, entries)
    assert jacobi_residual(bad) > 0
    # the diagonal-entry perturbation stays a Lie algebra (deformed su(2))
    entries2 = entries[:-1] + [(0, 1, 2, F(1))]
    assert jacobi_residual(LieAlgebra.from_structure_constants(3, entries2)) == 0


def test_matrix_consistency(su2p, su4):
    assert matrix_consistency_residual(su2p) == 0
    assert matrix_consistency_residual(su4) == 0


# -- killing ---------------------------------------------------------------

def test_killing_su2_diag_minus8(su2p):
    # oracle: trace of ad products, with ad built from numpy commutators
    mats = [M.to_complex() for M in su2_paper_basis()]
    flat = np.array([M.flatten() for M in mats]).T
    flat = np.vstack([flat.real, flat.imag])
    ads = []
    for i in range(3):
        cols = []
        for j in range(3):
            comm = mats[i] @ mats[j] - mats[j] @ mats[i]
            t = np.concatenate([comm.flatten().real, comm.flatten().imag])
            cols.append(np.linalg.lstsq(flat, t, rcond=None)[0])
        ads.append(np.array(cols).T)
    oracle = np.array([[np.trace(ads[i] @ ads[j]) for j in range(3)] for i in range(3)])
    gram = killing_gram(su2p)
    assert np.allclose(ra.to_float_matrix([list(r) for r in gram.gram]), oracle)
    assert [gram.gram[i][i] for i in range(3)] == [F(-8)] * 3
    for i in range(3):
        for j in range(3):
            if i != j:
                assert gram.gram[i][j] == 0


def test_killing_abelian_zero():
    gram = killing_gram(abelian(3))
    assert all(x == 0 for row in gram.gram for x in row)


def test_killing_su4_negative_definite(su4):
    vals = np.linalg.eigvalsh(killing_gram(su4).to_float())
    assert np.all(vals < 0)


def test_killing_ad_invariance_exact(su2p, su3):
    for A in (su2p, su3):
        gram = killing_gram(A)
        d = A.dim
        for z in range(d):
            ez = [F(1) if t == z else F(0) for t in range(d)]
            for x in range(d):
                ex = [F(1) if t == x else F(0) for t in range(d)]
                for y in range(d):
                    ey = [F(1) if t == y else F(0) for t in range(d)]
                    s = gram.pair(A.bracket(ez, ex), ey) + gram.pair(ex, A.bracket(ez, ey))
                    assert s == 0


# -- coadjoint pencil matrix -------------------------------------------------

def test_coadjoint_su2_corank(su2p):
    M = coadjoint_pencil_matrix(su2p, [1, 0, 0])  # u1-dual
    assert 3 - ra.rank(M) == 1
    assert 3 - ra.rank(coadjoint_pencil_matrix(su2p, [0, 0, 0])) == 3


def test_coadjoint_heisenberg_hand_oracle():
    h3 = heisenberg()
    x = [F(2), F(5), F(7)]
    M = coadjoint_pencil_matrix(h3, x)
    # by hand: M[0][1] = x_3, all other independent entries 0
    expect = [[F(0), F(7), F(0)], [F(-7), F(0), F(0)], [F(0), F(0), F(0)]]
    assert M == expect
    assert 3 - ra.rank(M) == 1


def test_coadjoint_antisymmetric_even_rank(su4):
    import random
    rng = random.Random(0)
    for _ in range(3):
        x = [F(rng.randint(-50, 50)) for _ in range(su4.dim)]
        M = coadjoint_pencil_matrix(su4, x)
        assert all(M[i][j] == -M[j][i] for i in range(su4.dim) for j in range(su4.dim))
        assert ra.rank(M) % 2 == 0


# -- subspaces ---------------------------------------------------------------

def test_subspace_combine_case_dims(case_a2):
    inter = subspace_combine("intersect", case_a2.g1, case_a2.g2)
    assert inter.dim == 4
    assert inter.equals(case_a2.k)
    assert subspace_combine("sum", case_a2.g1, case_a2.g1).equals(case_a2.g1)
    kperp = subspace_combine("ortho_complement", case_a2.k, form=case_a2.killing)
    assert kperp.dim == 11  # 15 - 4


def test_subspace_dimension_identity(case_a2):
    U, V = case_a2.g1, case_a2.g2
    s = subspace_combine("sum", U, V)
    i = subspace_combine("intersect", U, V)
    assert U.dim + V.dim == s.dim + i.dim


def test_subspace_combine_errors(su2p, case_a2):
    U = Subspace.from_vectors(su2p, [[1, 0, 0]])
    with pytest.raises(ValueError):
        subspace_combine("intersect", U, case_a2.k)
    degenerate = type(case_a2.killing)(
        tuple(tuple(F(0) for _ in range(3)) for _ in range(3)))
    with pytest.raises(ValueError):
        subspace_combine("ortho_complement", U, form=degenerate)


def test_dependent_basis_rejected(su2p):
    with pytest.raises(ValueError):
        Subspace.from_vectors(su2p, [[1, 0, 0], [2, 0, 0]])


def test_is_subalgebra(su2p, case_a2):
    assert is_subalgebra_residual(case_a2.k) == 0
    span_u2 = Subspace.from_vectors(su2p, [[0, 1, 0]])
    assert is_subalgebra_residual(span_u2) == 0  # 1-dim always
    span_u12 = Subspace.from_vectors(su2p, [[1, 0, 0], [0, 1, 0]])
    assert is_subalgebra_residual(span_u12) > 0  # [u1,u2] = 2u3 outside


def test_centralizer(su2p, case_a2):
    full = Subspace.from_vectors(su2p, [[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    assert centralizer(full, [0, 0, 0]).dim == 3  # E = 0
    c = centralizer(full, [1, 0, 0])
    assert c.dim == 1 and c.contains([F(1), F(0), F(0)])  # span(u1)


# -- semidirect contraction ---------------------------------------------------

def test_contraction_abelian():
    A = abelian(4)
    H = Subspace.from_vectors(A, [[1, 0, 0, 0], [0, 1, 0, 0]])
    out = semidirect_contraction(A, H)
    assert out.dim == 4 and not out.brackets


def test_contraction_su2_motion_algebra(su2p):
    from nijflow.indexes import lie_index
    H = Subspace.from_vectors(su2p, [[1, 0, 0]])
    out = semidirect_contraction(su2p, H)
    assert out.dim == 3
    assert jacobi_residual(out) == 0
    assert lie_index(out).index == 1


def test_contraction_rejects_non_subalgebra(su2p):
    H = Subspace.from_vectors(su2p, [[1, 0, 0], [0, 1, 0]])
    with pytest.raises(ValueError):
        semidirect_contraction(su2p, H)


def test_contraction_jacobi_and_dim(case_a2):
    out = semidirect_contraction(case_a2.g, case_a2.g1)
    assert out.dim == case_a2.g.dim
    assert jacobi_residual(out) == 0


def test_contraction_index_monotone(su2p, case_a2):
    from nijflow.indexes import contraction_index, lie_index
    base = lie_index(case_a2.g).index
    for H in (case_a2.g1, case_a2.g2, case_a2.k):
        assert contraction_index(case_a2.g, H).index >= base


# -- json --------------------------------------------------------------------

def test_json_roundtrip(su2p):
    text = algebra_to_json(su2p)
    data = json.loads(text)
    assert data["dim"] == 3
    assert all(i < j for i, j, _, _ in data["c"])
    back = algebra_from_json(text)
    assert back.brackets == su2p.brackets
