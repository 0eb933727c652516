"""Validation, CSV round-trips and the FactorPair container."""

import io

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from tessfact.core import (
    FactorPair,
    ParameterError,
    SchemeParams,
    ceil_div,
    frobenius_sq,
    read_matrix,
    read_matrix_file,
    read_vector_file,
    validate,
    write_matrix,
    write_matrix_file,
)

EX1 = SchemeParams(K=6, L=10, N=12, T=1, Delta=3, Gamma=5)


def test_validate_accepts_reference_config():
    assert validate(EX1) is EX1


@pytest.mark.parametrize("field,value,fragment", [
    ("K", 0, "K"),
    ("L", -2, "L"),
    ("T", 0, "T"),
    ("N", 0, "N"),
    ("Delta", 7, "Delta"),
    ("Gamma", 11, "Gamma"),
])
def test_validate_rejects_bad_fields(field, value, fragment):
    from dataclasses import replace

    bad = replace(EX1, **{field: value})
    with pytest.raises(ParameterError, match=fragment):
        validate(bad)


def test_validate_rejects_bool():
    # bool is an int subclass; a stray True must not slip through as 1
    bad = SchemeParams(K=6, L=10, N=12, T=True, Delta=3, Gamma=5)
    with pytest.raises(ParameterError):
        validate(bad)


def test_validate_shot_budget_floor():
    scarce = SchemeParams(K=6, L=10, N=4, T=1, Delta=3, Gamma=5)
    with pytest.raises(ParameterError, match="N"):
        validate(scarce)
    assert validate(scarce, allow_reduced_budget=True) is scarce


def test_ceil_div():
    assert ceil_div(0, 3) == 0
    assert ceil_div(7, 3) == 3
    assert ceil_div(9, 3) == 3


def test_frobenius_sq_matches_manual():
    A = np.array([[1.0, -2.0], [3.0, 0.5]])
    assert frobenius_sq(A) == pytest.approx(1 + 4 + 9 + 0.25)


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, st.tuples(st.integers(1, 8), st.integers(1, 8)),
              elements=st.floats(-1e12, 1e12, allow_nan=False)))
def test_csv_round_trip_exact(A):
    buf = io.StringIO()
    write_matrix(buf, A)
    back = read_matrix(io.StringIO(buf.getvalue()))
    assert back.shape == A.shape
    assert np.array_equal(back, A)


def test_csv_header_is_optional():
    text = "1.5,2\n3,4\n"
    A = read_matrix(io.StringIO(text))
    assert A.shape == (2, 2)
    assert A[0, 0] == 1.5


def test_csv_bad_field_names_line():
    text = "# 2 2\n1,2\n3,frog\n"
    with pytest.raises(ParameterError, match="line 3"):
        read_matrix(io.StringIO(text))


def test_csv_header_shape_mismatch():
    text = "# 3 2\n1,2\n3,4\n"
    with pytest.raises(ParameterError):
        read_matrix(io.StringIO(text))


def test_csv_ragged_rows_rejected():
    text = "1,2\n3\n"
    with pytest.raises(ParameterError, match="line 2"):
        read_matrix(io.StringIO(text))


def test_matrix_file_round_trip(tmp_path):
    A = np.arange(12, dtype=float).reshape(3, 4) / 7
    path = tmp_path / "a.csv"
    write_matrix_file(path, A)
    assert np.array_equal(read_matrix_file(path), A)


def test_read_vector_accepts_row_or_column(tmp_path):
    v = np.array([1.0, 2.0, 3.0])
    row, col = tmp_path / "r.csv", tmp_path / "c.csv"
    write_matrix_file(row, v.reshape(1, 3))
    write_matrix_file(col, v.reshape(3, 1))
    assert np.array_equal(read_vector_file(row), v)
    assert np.array_equal(read_vector_file(col), v)


def test_read_vector_rejects_matrix(tmp_path):
    path = tmp_path / "m.csv"
    write_matrix_file(path, np.ones((2, 3)))
    with pytest.raises(ParameterError):
        read_vector_file(path)


def _pair(K=4, NT=4, L=5):
    D = np.zeros((K, NT))
    E = np.zeros((NT, L))
    return D, E


def test_factor_pair_validates_shapes():
    D, E = _pair()
    with pytest.raises(ParameterError):
        FactorPair(D=D, E=E, suppD=np.zeros((3, 4), bool), suppE=E != 0)


def test_factor_pair_rejects_values_outside_mask():
    D, E = _pair()
    D[0, 0] = 1.0
    with pytest.raises(ParameterError):
        FactorPair(D=D, E=E, suppD=np.zeros_like(D, bool), suppE=np.zeros_like(E, bool))


def test_factor_pair_accepts_consistent_masks():
    D, E = _pair()
    D[1, 2] = 0.5
    suppD = np.zeros_like(D, bool)
    suppD[1, 2] = True
    suppD[0, 0] = True  # mask may be wider than the nonzeros
    pair = FactorPair(D=D, E=E, suppD=suppD, suppE=np.zeros_like(E, bool))
    assert pair.D[1, 2] == 0.5
