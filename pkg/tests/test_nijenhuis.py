"""Torsion, eigenstructure, invariance, decomposition checks, and the
standard example constructions."""

from fractions import Fraction

import numpy as np
import pytest

import nijflow.rational as ra
from nijflow.liealg import LieAlgebra, Subspace, subspace_combine
from nijflow.nijenhuis import (
    NijenhuisOperator,
    ad_invariance_residual,
    build_example,
    eigen_projections,
    invariant_N_from_case,
    symmetrization_matches_inertia,
    torsion_residual,
    verify_decomposition,
)

F = Fraction


def identity_op(A):
    return NijenhuisOperator.from_matrix(
        A, [[1 if i == j else 0 for j in range(A.dim)] for i in range(A.dim)])


def test_torsion_identity_zero(su4):
    assert torsion_residual(identity_op(su4)) == 0


@pytest.mark.parametrize("m", [3, 4])
def test_torsion_left_mult_zero(m):
    A = [[F(i + 1) if i == j else F(0) for j in range(m)] for i in range(m)]
    alg, parts, k, op = build_example("left_mult", A=A)
    assert torsion_residual(op) == 0
    # operator acts as left multiplication: L_A E_01 = A E_01 has 1-row = A[0][0]
    e01 = [F(0)] * alg.dim
    e01[1] = F(1)  # E_01 in row-major E_jk order
    img = op.apply(e01)
    assert img[1] == F(1)  # A[0][0] = 1


def test_torsion_left_mult_identity_matrix():
    A = [[F(1) if i == j else F(0) for j in range(3)] for i in range(3)]
    alg, parts, k, op = build_example("left_mult", A=A)
    assert [list(r) for r in op.matrix] == ra.identity(alg.dim)
    assert torsion_residual(op) == 0


def test_torsion_random_dense_positive(su2):
    import random
    rng = random.Random(3)
    M = [[F(rng.randint(-3, 3)) for _ in range(3)] for _ in range(3)]
    op = NijenhuisOperator.from_matrix(su2, M)
    assert torsion_residual(op) > 0


def test_eigen_projections_identity(su2):
    lam = F(7)
    op = NijenhuisOperator.from_matrix(
        su2, [[lam if i == j else 0 for j in range(3)] for i in range(3)])
    done = eigen_projections(op, [lam])
    assert done.projections[0] == tuple(map(tuple, ra.identity(3)))
    assert done.eigen_residual() == 0


def test_eigen_projections_case_ranks(case_a2):
    N = invariant_N_from_case(case_a2)
    op = eigen_projections(
        NijenhuisOperator(case_a2.kperp, N.matrix), [case_a2.lambda1, case_a2.lambda2])
    r1 = ra.rank([list(r) for r in op.projections[0]])
    r2 = ra.rank([list(r) for r in op.projections[1]])
    assert (r1, r2) == (6, 5)
    assert op.eigen_residual() == 0


def test_eigen_projections_rejects_nilpotent(su2):
    # 3x3 nilpotent Jordan block is not semisimple
    M = [[F(0), F(1), F(0)], [F(0), F(0), F(1)], [F(0), F(0), F(0)]]
    abelian = LieAlgebra.from_structure_constants(3, [])
    with pytest.raises(ValueError):
        eigen_projections(NijenhuisOperator.from_matrix(abelian, M), [0])
    with pytest.raises(ValueError):
        eigen_projections(NijenhuisOperator.from_matrix(abelian, M), [0, 0])


def test_ad_invariance_case_and_identity(case_a2, case_b2, su4):
    for case in (case_a2, case_b2):
        N = invariant_N_from_case(case)
        assert ad_invariance_residual(N, case.k) == 0
    full = Subspace.from_vectors(su4, ra.identity(su4.dim))
    assert ad_invariance_residual(identity_op(su4), full) == 0


def test_ad_invariance_left_mult_diagonal():
    A = [[F(i + 1) if i == j else F(0) for j in range(3)] for i in range(3)]
    alg, parts, k, op = build_example("left_mult", A=A)
    assert ad_invariance_residual(op, k) == 0


def test_symmetrization_matches_inertia(case_a2, case_b2):
    assert symmetrization_matches_inertia(case_a2) == 0
    assert symmetrization_matches_inertia(case_b2) == 0


def test_invariant_N_spectrum(case_a2):
    N = invariant_N_from_case(case_a2)
    assert N.eigenvalues == (F(1), F(1, 2))
    assert N.eigen_residual() == 0
    # multiplicities are the k_i dimensions
    diag = [N.matrix[i][i] for i in range(case_a2.dim_m)]
    assert diag.count(F(1)) == 6 and diag.count(F(1, 2)) == 5


def test_verify_decomposition_cases(case_a2, case_b2):
    for case in (case_a2, case_b2):
        rep = verify_decomposition(case.g, [case.g1, case.g2], case.k)
        assert rep.all_pass
        assert rep.max_subalgebra_residual == 0


def test_verify_decomposition_degenerate_fails(case_a2):
    # parts (g, g) against the case subalgebra k: g n g = g != k, condition (1)
    g_as_sub = Subspace.from_vectors(case_a2.g, ra.identity(case_a2.g.dim))
    rep = verify_decomposition(case_a2.g, [g_as_sub, g_as_sub], case_a2.k)
    assert not rep.intersections_equal_k
    assert not rep.all_pass


def test_parabolic_pair_sl3():
    alg, parts, k, op = build_example("parabolic_pair", m=3, S={1},
                                      lambda1=2, lambda2=3)
    # block pattern of the intersection: diag + lower-right 2x2 block
    assert k.dim == 4  # 2 diag + E_23, E_32 pattern
    rep = verify_decomposition(alg, list(parts), k)
    assert rep.all_pass
    assert torsion_residual(op) == 0


def test_seaweed_sl3():
    alg, parts, k, op = build_example("seaweed", m=3, S={1}, S2={0},
                                      lambda1=2, lambda2=3)
    assert k.dim == 4  # seaweed pattern: stars at diag(2) + (2,1) + (2,3)
    rep = verify_decomposition(alg, list(parts), k)
    assert rep.all_pass
    assert torsion_residual(op) == 0
    # the seaweed contains E_21 and E_23 but not E_12
    d = alg.dim
    e21 = [F(0)] * d
    e21[2] = F(1)  # E_jk order for sl(3): (0,1),(0,2),(1,0),(1,2),(2,0),(2,1)
    # find positions properly
    idx = {}
    c = 0
    for j in range(3):
        for kk in range(3):
            if j != kk:
                idx[(j, kk)] = c
                c += 1
    for (j, kk), inside in [((1, 0), True), ((1, 2), True), ((0, 1), False)]:
        v = [F(0)] * d
        v[idx[(j, kk)]] = F(1)
        assert k.contains(v) == inside


def test_left_mult_decomposition_s_equals_m():
    A = [[F(i + 1) if i == j else F(0) for j in range(3)] for i in range(3)]
    alg, parts, k, op = build_example("left_mult", A=A)
    rep = verify_decomposition(alg, list(parts), k)
    assert rep.all_pass


def test_build_example_invalid_roots():
    with pytest.raises(ValueError):
        build_example("parabolic_pair", m=3, S={5})
    with pytest.raises(ValueError):
        build_example("bogus")


def test_projections_commute_with_ad_k(case_a2):
    # pr_{k1}, pr_{k2} commute with ad k on m (exact)
    N = invariant_N_from_case(case_a2)
    for P in N.projections:
        op = NijenhuisOperator(case_a2.kperp, P)
        assert ad_invariance_residual(op, case_a2.k) == 0
