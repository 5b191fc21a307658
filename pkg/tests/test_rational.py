from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nijflow import rational as ra


def F(x):
    return Fraction(x)


def test_rref_and_rank():
    M = [[F(1), F(2), F(3)], [F(2), F(4), F(6)], [F(0), F(1), F(1)]]
    R, piv = ra.rref(M)
    assert piv == [0, 1]
    assert ra.rank(M) == 2


def test_nullspace_solves():
    M = [[F(1), F(2), F(3)], [F(0), F(1), F(1)]]
    for v in ra.nullspace(M):
        assert all(x == 0 for x in ra.mat_vec(M, v))
    assert len(ra.nullspace(M)) == 1


def test_solve_and_invert():
    A = [[F(2), F(1)], [F(1), F(3)]]
    x = ra.solve_exact(A, [F(5), F(10)])
    assert ra.mat_vec(A, x) == [F(5), F(10)]
    Ainv = ra.invert(A)
    assert ra.mat_mul(A, Ainv) == ra.identity(2)
    with pytest.raises(ValueError):
        ra.invert([[F(1), F(2)], [F(2), F(4)]])


def test_solve_inconsistent_returns_none():
    A = [[F(1), F(1)], [F(1), F(1)]]
    assert ra.solve_exact(A, [F(1), F(2)]) is None


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(st.integers(-9, 9), min_size=4, max_size=4),
                min_size=3, max_size=5))
def test_bareiss_matches_fraction_rank(rows):
    M = [[F(x) for x in row] for row in rows]
    assert ra.bareiss_rank(rows) == ra.rank(M)


def test_span_solver_roundtrip():
    vecs = [[F(1), F(0), F(2)], [F(0), F(1), F(-1)]]
    s = ra.SpanSolver(vecs)
    w = [F(3), F(2), F(4)]  # 3*v1 + 2*v2
    assert s.coords(w) == [F(3), F(2)]
    assert s.contains(w)
    assert not s.contains([F(0), F(0), F(1)])
    with pytest.raises(ValueError):
        ra.SpanSolver([[F(1), F(2)], [F(2), F(4)]])


def test_quotient_split_solver():
    h = [[F(1), F(0), F(0), F(1)]]
    comp = [[F(0), F(1), F(0), F(0)], [F(1), F(0), F(1), F(0)]]
    s = ra.QuotientSplitSolver(h, comp)
    w = [F(3), F(3), F(1), F(2)]  # 2*h1 + 3*c1 + 1*c2
    a, b = s.coords(w)
    rec = [F(0)] * 4
    for coef, row in zip(a, s.RH):
        for i in range(4):
            rec[i] += coef * row[i]
    for coef, row in zip(b, s.RW):
        for i in range(4):
            rec[i] += coef * row[i]
    assert rec == w


def test_leading_principal_minors():
    assert ra.leading_principal_minors_positive([[F(2), F(1)], [F(1), F(2)]])
    assert not ra.leading_principal_minors_positive([[F(-1), F(0)], [F(0), F(1)]])


def test_column_reduce_spans():
    rows = [[F(1), F(1), F(0)], [F(2), F(2), F(0)], [F(0), F(0), F(1)]]
    basis = ra.column_reduce(rows)
    assert len(basis) == 2
