"""Builders for the classical algebras and the two homogeneous series."""

import math
from fractions import Fraction

import numpy as np
import pytest

from nijflow.cases import (
    build_case,
    build_classical,
    inertia_spectrum,
    onishchik_table,
    positivity_window,
)
from nijflow.liealg import jacobi_residual, killing_gram, matrix_consistency_residual

F = Fraction


@pytest.mark.parametrize("family,m,dim", [
    ("su", 4, 15), ("so", 6, 15), ("sp_compact", 2, 10),
    ("u", 3, 9), ("gl_real", 3, 9), ("sl_real", 3, 8), ("su", 2, 3),
])
def test_classical_dims(family, m, dim):
    A = build_classical(family, m)
    assert A.dim == dim
    assert matrix_consistency_residual(A) == 0


def test_classical_jacobi_small():
    for family, m in [("su", 3), ("so", 4), ("sp_compact", 2), ("gl_real", 3)]:
        assert jacobi_residual(build_classical(family, m)) == 0


def test_classical_rejects():
    with pytest.raises(ValueError):
        build_classical("e8", 8)
    with pytest.raises(ValueError):
        build_classical("su", 1)


@pytest.mark.parametrize("family,dims,k1k2", [
    ("A", (15, 10, 9, 4), (6, 5)),
    ("B", (15, 10, 9, 4), (6, 5)),
])
def test_case_dims_n2(family, dims, k1k2, case_a2, case_b2):
    case = case_a2 if family == "A" else case_b2
    assert (case.g.dim, case.g1.dim, case.g2.dim, case.k.dim) == dims
    assert (case.k1.dim, case.k2.dim) == k1k2
    assert case.kperp.dim == case.k1.dim + case.k2.dim
    assert jacobi_residual(case.g) == 0


def test_case_invariants_exact(case_a2, case_b2):
    from nijflow.liealg import subspace_combine
    for case in (case_a2, case_b2):
        assert case.g1.dim + case.g2.dim - case.k.dim == case.g.dim
        inter = subspace_combine("intersect", case.g1, case.g2)
        assert inter.equals(case.k)
        # -Killing restricted to kperp is positive definite (exact Sylvester)
        import nijflow.rational as ra
        assert ra.leading_principal_minors_positive(case.gram_m())


def test_build_case_parameter_guards():
    with pytest.raises(ValueError):
        build_case("A", 2, 1, 1)
    with pytest.raises(ValueError):
        build_case("A", 2, 1, 0)
    with pytest.raises(ValueError):
        build_case("A", 1, 1, F(1, 2))
    with pytest.raises(ValueError):
        build_case("C", 2, 1, F(1, 2))


def test_inertia_matrix_symmetric_wrt_form(case_a2, case_b2):
    import nijflow.rational as ra
    for case in (case_a2, case_b2):
        G = case.gram_m()
        I_ = [list(r) for r in case.inertia_matrix]
        GI = ra.mat_mul(G, I_)
        assert GI == ra.transpose(GI)


def test_inertia_spectrum_positive_inside_window(case_a2):
    spec = inertia_spectrum(case_a2)
    assert spec.min() > 0  # 0.5 inside (3 - 2 sqrt2, 3 + 2 sqrt2)


def test_inertia_spectrum_negative_outside_window():
    case = build_case("A", 2, 1, F(1, 10))  # 0.1 < 3 - 2 sqrt2
    assert inertia_spectrum(case).min() <= 0


def test_inertia_identity_limit():
    eps = F(1, 10 ** 6)
    case = build_case("A", 2, 1, 1 - eps)
    assert np.abs(inertia_spectrum(case) - 1.0).max() < 1e-5


def test_positivity_window_values():
    lo, hi = positivity_window(1.0)
    assert math.isclose(lo, 3 - 2 * math.sqrt(2), rel_tol=1e-12)
    assert math.isclose(hi, 3 + 2 * math.sqrt(2), rel_tol=1e-12)
    lo2, hi2 = positivity_window(2.0)
    assert math.isclose(lo2, 2 * lo) and math.isclose(hi2, 2 * hi)
    with pytest.raises(ValueError):
        positivity_window(-1.0)


@pytest.mark.parametrize("family", ["A", "B"])
def test_window_consistency_20_grid(family):
    # lambda2 in window <=> all inertia eigenvalues positive (eigen oracle)
    lo, hi = positivity_window(1.0)
    for lam2 in np.linspace(0.05, 7.0, 20):
        case = build_case(family, 2, 1, F(float(lam2)))
        spec = inertia_spectrum(case)
        assert (spec.min() > 0) == (lo < lam2 < hi), f"lambda2={lam2}"


def test_onishchik_table():
    rows = onishchik_table()
    assert len(rows) == 17
    assert any(r.g == "B_3" and r.g1 == "G_2" and r.g2 == "D_3" and r.k == "A_2"
               for r in rows)
    assert any(r.g == "D_{2n}" and r.g1 == "B_{2n-1}" and r.g2 == "C_n+A_1"
               and r.k == "C_{n-1}+A_1" and r.restrictions == "n>1"
               for r in rows)
    assert any(r.g == "A_{2n-1}" and r.g2 == "A_{2n-2}+T" and r.k == "C_{n-1}+T"
               for r in rows)
