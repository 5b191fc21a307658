"""Index computation, contractions, Rais spot checks, and stabilizer witnesses."""

from fractions import Fraction

import pytest

from nijflow.cases import build_classical
from nijflow.indexes import (
    brailov_check,
    contraction_index,
    kronecker_check,
    lie_index,
    rais_check,
    random_stabilizer_dims,
    witness_E,
    witness_stabilizer_dim,
)
from nijflow.liealg import LieAlgebra, Subspace

F = Fraction


def test_lie_index_values(su2, su4, so6):
    assert lie_index(su2).index == 1
    assert lie_index(su4).index == 3
    assert lie_index(so6).index == 3


def test_lie_index_abelian_and_heisenberg():
    ab = LieAlgebra.from_structure_constants(4, [], label="R4")
    assert lie_index(ab).index == 4
    h3 = LieAlgebra.from_structure_constants(3, [(0, 1, 2, F(1))], label="h3")
    assert lie_index(h3).index == 1


def test_lie_index_methods_agree(su4, so6, case_a2):
    for A in (su4, so6, case_a2.g):
        e = lie_index(A, samples=5, seed=3)
        f = lie_index(A, samples=5, method="floating_svd", seed=3)
        assert e.index == f.index
        assert e.stable


def test_lie_index_guards(su2):
    with pytest.raises(ValueError):
        lie_index(su2, samples=2)
    with pytest.raises(ValueError):
        lie_index(su2, method="bogus")


def test_contraction_su2(su2):
    H = Subspace.from_vectors(su2, [[1, 0, 0]])
    assert contraction_index(su2, H).index == 1


def test_contraction_sp2_embedding(su4, case_a2):
    # (su(4), sp(2)) via the symmetric pair of the case construction
    assert contraction_index(case_a2.g, case_a2.g1).index == 3


def test_contraction_of_whole_algebra(su2):
    full = Subspace.from_vectors(
        su2, [[1, 0, 0], [0, 1, 0], [0, 0, 1]])
    assert contraction_index(su2, full).index == lie_index(su2).index


def test_kronecker_cases(case_a2, case_b2):
    for case in (case_a2, case_b2):
        rep = kronecker_check(case)
        assert rep.all_pass
        assert rep.index_g == 3
        assert all(ci == 3 for _, ci, _ in rep.per_part)


def test_kronecker_synthetic_failure(su3):
    # the Cartan subalgebra of su(3) is not symmetric: its contraction index
    # exceeds ind su(3) = 2, so the equality check must report failure
    cartan = Subspace.from_vectors(
        su3, [[0] * 6 + [1, 0], [0] * 6 + [0, 1]])
    rep = brailov_check(su3, cartan)
    assert rep["index_g"] == 2
    assert rep["contraction_index"] != 2
    assert not rep["pass"]


def test_brailov_pairs(su4, so6, case_a2, case_b2):
    assert brailov_check(case_a2.g, case_a2.g1)["pass"]   # (su(4), sp(2))
    assert brailov_check(case_a2.g, case_a2.g2)["pass"]   # (su(4), u(3)-type)
    assert brailov_check(case_b2.g, case_b2.g1)["pass"]   # (so(6), so(5))
    assert brailov_check(case_b2.g, case_b2.g2)["pass"]   # (so(6), u(3))


def test_rais_su2_rotation_oracle(su2):
    # h = span(u1) acting on the 2-dim quotient by rotation: for a != 0 the
    # stabilizer is trivial and the orbit has codim 1, so 0 + 1 = 1
    H = Subspace.from_vectors(su2, [[1, 0, 0]])
    rep = rais_check(su2, H, trials=8, seed=1)
    assert rep.contraction_index == 1
    assert rep.generic_fraction == 1.0
    for s in rep.samples:
        assert s.stab_dim == 0 and s.orbit_codim == 1 and s.total == 1


def test_rais_case_subalgebras(case_a2):
    rep = rais_check(case_a2.g, case_a2.g1, trials=10, seed=5)
    assert rep.contraction_index == 3
    assert rep.generic_fraction >= 0.9
    assert rep.all_generic_agree


def test_witness_stabilizers_n2(case_a2, case_b2):
    wa = witness_E(case_a2)
    assert not wa.is_real  # family A witness lives in the complexification
    assert witness_stabilizer_dim(case_a2, wa) == 0
    wb = witness_E(case_b2)
    assert wb.is_real
    assert witness_stabilizer_dim(case_b2, wb) == 0


def test_witness_scaling_invariant(case_b2):
    w = witness_E(case_b2)
    scaled = type(w)(tuple(2 * x for x in w.re_coords),
                     tuple(2 * x for x in w.im_coords))
    assert witness_stabilizer_dim(case_b2, scaled) == 0


def test_random_stabilizers_trivial(case_a2, case_b2):
    assert all(d == 0 for d in random_stabilizer_dims(case_a2, count=10, seed=2))
    assert all(d == 0 for d in random_stabilizer_dims(case_b2, count=10, seed=2))


def test_centralizer_of_zero_is_k(case_a2):
    from nijflow.liealg import centralizer
    c = centralizer(case_a2.k, [F(0)] * case_a2.g.dim)
    assert c.dim == case_a2.k.dim
