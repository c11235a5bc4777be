from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from noncausal.exact import (
    BIT_OPS,
    D_CONST0,
    D_CONST1,
    D_ID,
    D_NOT,
    EnumerationCapExceeded,
    Matrix,
    StochasticMatrix,
    StochasticVector,
    enumerate_deterministic_ops,
    flatten_index,
    format_rational,
    rat,
    tensor,
    trace_product,
    unflatten_index,
)


def small_fraction(nonneg=False):
    lo = 0 if nonneg else -4
    return st.fractions(min_value=lo, max_value=4, max_denominator=6)


@st.composite
def matrices(draw, max_dim=3, nonneg=False):
    r = draw(st.integers(1, max_dim))
    c = draw(st.integers(1, max_dim))
    rows = draw(
        st.lists(
            st.lists(small_fraction(nonneg), min_size=c, max_size=c),
            min_size=r,
            max_size=r,
        )
    )
    return Matrix(tuple(tuple(x for x in row) for row in rows))


@st.composite
def stochastic_matrices(draw, max_dim=3):
    r = draw(st.integers(1, max_dim))
    c = draw(st.integers(1, max_dim))
    cols = []
    for _ in range(c):
        weights = draw(
            st.lists(st.integers(0, 6), min_size=r, max_size=r).filter(
                lambda w: sum(w) > 0
            )
        )
        total = sum(weights)
        cols.append([Fraction(w, total) for w in weights])
    rows = tuple(tuple(col[i] for col in cols) for i in range(r))
    return StochasticMatrix(rows)


def test_rational_parsing_and_formatting():
    assert rat("3/4") == Fraction(3, 4)
    assert rat("-1/2") == Fraction(-1, 2)
    assert rat("7") == Fraction(7)
    assert rat(Fraction(2, 6)) == Fraction(1, 3)
    assert format_rational(Fraction(3, 4)) == "3/4"
    assert format_rational(Fraction(6, 3)) == "2"
    assert format_rational(Fraction(0)) == "0"


@given(st.lists(st.integers(2, 4), min_size=1, max_size=4), st.data())
def test_flatten_roundtrip(sizes, data):
    tup = tuple(data.draw(st.integers(0, s - 1)) for s in sizes)
    k = flatten_index(tup, sizes)
    assert unflatten_index(k, sizes) == tup
    # leftmost factor most significant
    if len(sizes) > 1:
        import math

        assert k == tup[0] * math.prod(sizes[1:]) + flatten_index(tup[1:], sizes[1:])


@given(matrices(), matrices())
def test_tensor_entry_formula(a, b):
    t = tensor(a, b)
    assert t.rows == a.rows * b.rows and t.cols == a.cols * b.cols
    for ia in range(a.rows):
        for ib in range(b.rows):
            for ja in range(a.cols):
                for jb in range(b.cols):
                    r = flatten_index((ia, ib), (a.rows, b.rows))
                    c = flatten_index((ja, jb), (a.cols, b.cols))
                    assert t[r, c] == a[ia, ja] * b[ib, jb]


@given(matrices(max_dim=2), matrices(max_dim=2), matrices(max_dim=2))
def test_tensor_associative(a, b, c):
    assert tensor(tensor(a, b), c).entries == tensor(a, tensor(b, c)).entries


@given(stochastic_matrices(), stochastic_matrices())
def test_tensor_preserves_stochasticity(a, b):
    t = tensor(a, b)
    assert isinstance(t, StochasticMatrix)
    assert t.is_column_stochastic()


def test_stochastic_matrix_rejects_bad_columns():
    with pytest.raises(ValueError):
        StochasticMatrix(((Fraction(1, 2),), (Fraction(1, 3),)))
    with pytest.raises(ValueError):
        StochasticMatrix(((Fraction(3, 2),), (Fraction(-1, 2),)))


def test_stochastic_vector_validation():
    StochasticVector.of(["1/3", "2/3"])
    with pytest.raises(ValueError):
        StochasticVector.of(["1/2", "1/3"])
    with pytest.raises(ValueError):
        StochasticVector.of(["-1/2", "3/2"])
    assert StochasticVector.basis(3, 1).entries == (0, 1, 0)
    assert sum(StochasticVector.uniform(7).entries) == 1


def test_bit_ops_tables():
    assert D_ID(0) == 0 and D_ID(1) == 1
    assert D_NOT(0) == 1 and D_NOT(1) == 0
    assert D_CONST0(1) == 0 and D_CONST1(0) == 1
    assert D_NOT.matrix().entries == ((0, 1), (1, 0))
    assert set(BIT_OPS) == {"id", "not", "const0", "const1"}


def test_enumerate_deterministic_ops_small():
    ops = enumerate_deterministic_ops(2, 2)
    assert len(ops) == 4
    assert set(ops) == {D_ID, D_NOT, D_CONST0, D_CONST1}
    # lexicographic by table
    assert [op.table for op in ops] == [(0, 0), (0, 1), (1, 0), (1, 1)]

    constants = enumerate_deterministic_ops(1, 5)
    assert [op.table for op in constants] == [(k,) for k in range(5)]

    assert len(enumerate_deterministic_ops(3, 2)) == 8
    assert len(enumerate_deterministic_ops(2, 3)) == 9


def test_enumeration_cap_guard():
    with pytest.raises(EnumerationCapExceeded):
        enumerate_deterministic_ops(30, 30, cap=1000)
    assert len(enumerate_deterministic_ops(2, 2, cap=4)) == 4


@given(matrices(max_dim=3), matrices(max_dim=3))
def test_trace_product_matches_materialized(a, b):
    if a.cols == b.rows and a.rows == b.cols:
        assert trace_product(a, b) == a.mul(b).trace()


def test_matrix_ops_basics():
    m = Matrix.from_rows([["1/2", "1/3"], ["1/2", "2/3"]])
    assert m.trace() == Fraction(7, 6)
    assert m.mul(Matrix.identity(2)).entries == m.entries
    assert m.transpose()[0, 1] == Fraction(1, 2)
    assert m.is_column_stochastic()
    assert not Matrix.from_rows([["-1/4"]]).is_nonnegative()
