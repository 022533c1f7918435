import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import gauss_integral
from hillspec.opmatrix import (
    BC,
    ConfigurationError,
    adjoint_check,
    basis_values,
    build_derivative,
    build_operator,
    cross_gram,
    dump_csv,
    evaluate_vector,
    index_set,
)
from hillspec.potential import PotentialSpec

COS = PotentialSpec(((-1, 1), (1, 1)))
coeff = st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False)
potentials = st.dictionaries(st.integers(-3, 3), coeff, max_size=4).map(PotentialSpec.from_coefficients)


def test_index_set_examples():
    assert index_set(BC.PER_PLUS, 2).tolist() == [-4, -2, 0, 2, 4]
    assert index_set(BC.DIR, 3).tolist() == [1, 2, 3]
    assert index_set(BC.NEU, 3).tolist() == [0, 1, 2, 3]
    assert all(k % 2 for k in index_set(BC.PER_MINUS, 5))


@pytest.mark.parametrize("bc", list(BC))
def test_free_operator_is_diagonal(bc):
    op = build_operator(PotentialSpec(()), bc, 16)
    assert np.array_equal(op.matrix, np.diag(op.indices.astype(float) ** 2))


def test_per_entry_example():
    op = build_operator(COS, BC.PER_PLUS, 8)
    assert op.matrix[op.position(0), op.position(2)] == 1
    assert op.matrix[op.position(2), op.position(0)] == 1


def test_neumann_entry_example():
    # (1/pi) int 2cos2x * 2cos^2 x dx = 1
    op = build_operator(COS, BC.NEU, 8)
    assert op.matrix[op.position(1), op.position(1)] == pytest.approx(1 + 1, abs=1e-14)
    assert op.potential_block[op.position(1), op.position(1)] == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("bc", list(BC))
def test_matrix_entries_match_quadrature(bc):
    spec = PotentialSpec(((-1, 1), (1, 0.5), (2, 1j)))
    op = build_operator(spec, bc, 8)
    idx = op.indices[:6]

    def b(k, x):
        return basis_values(bc, np.array([k]), x)[:, 0]

    for p, k in enumerate(idx):
        for q, j in enumerate(idx):
            want = gauss_integral(lambda x: np.conj(b(k, x)) * spec(x) * b(j, x)) / math.pi
            assert abs(op.potential_block[p, q] - want) < 1e-11


@pytest.mark.parametrize("bc", list(BC))
def test_basis_orthonormal(bc):
    idx = index_set(bc, 6)
    G = np.array(
        [[gauss_integral(lambda x: np.conj(basis_values(bc, [k], x)[:, 0]) * basis_values(bc, [j], x)[:, 0]) / math.pi for j in idx] for k in idx]
    )
    assert np.allclose(G, np.eye(len(idx)), atol=1e-12)


def test_adjoint_examples():
    assert adjoint_check(COS, BC.NEU, 16) < 1e-12
    assert adjoint_check(PotentialSpec(((1, 1j),)), BC.PER_PLUS, 16) < 1e-12
    assert adjoint_check(PotentialSpec(()), BC.DIR, 16) == 0


@settings(max_examples=25, deadline=None)
@given(potentials, st.sampled_from(list(BC)))
def test_adjoint_relation(spec, bc):
    assert adjoint_check(spec, bc, 12) < 1e-12


@settings(max_examples=25, deadline=None)
@given(potentials, st.sampled_from(list(BC)), coeff)
def test_constant_shift_moves_diagonal(spec, bc, c):
    A = build_operator(spec, bc, 10).matrix
    B = build_operator(spec.add_constant(c), bc, 10).matrix
    assert np.allclose(B - A, c * np.eye(len(A)), atol=1e-12)


def test_derivative_examples():
    D = build_derivative(BC.PER_PLUS, 4)
    e = np.zeros(len(D.source_indices), complex)
    e[list(D.source_indices).index(2)] = 1
    out = D.apply(e)
    assert out[list(D.target_indices).index(2)] == 2j and np.count_nonzero(out) == 1
    D = build_derivative(BC.NEU, 4)
    e = np.zeros(len(D.source_indices), complex)
    e[1] = 1
    out = D.apply(e)
    assert out[list(D.target_indices).index(1)] == -1 and np.count_nonzero(out) == 1
    D = build_derivative(BC.DIR, 4)
    e = np.zeros(len(D.source_indices), complex)
    e[list(D.source_indices).index(3)] = 1
    out = D.apply(e)
    assert out[list(D.target_indices).index(3)] == 3 and np.count_nonzero(out) == 1


@pytest.mark.parametrize("bc", list(BC))
def test_derivative_matches_finite_difference(bc):
    D = build_derivative(bc, 6)
    rng = np.random.default_rng(1)
    c = rng.standard_normal(len(D.source_indices)) + 1j * rng.standard_normal(len(D.source_indices))
    x, h = np.array([0.3, 1.1, 2.5]), 1e-6
    f = lambda t: basis_values(bc, D.source_indices, t) @ c
    fd = (f(x + h) - f(x - h)) / (2 * h)
    exact = basis_values(D.target, D.target_indices, x) @ D.apply(c)
    assert np.allclose(exact, fd, atol=1e-6)


def test_evaluate_vector_examples():
    assert evaluate_vector([1, 0, 0], BC.NEU, 0.7) == 1
    assert evaluate_vector([0, 0, 1], BC.DIR, 0.0) == 0
    assert evaluate_vector([0, 0, 1], BC.NEU, 0.0) == pytest.approx(math.sqrt(2))


def test_cross_gram_matches_quadrature():
    per, neu = index_set(BC.PER_MINUS, 5), index_set(BC.NEU, 6)
    X = cross_gram(per, neu)
    for a, k in enumerate(per):
        for b, m in enumerate(neu):
            want = gauss_integral(lambda x: np.exp(1j * k * x) * basis_values(BC.NEU, [m], x)[:, 0]) / math.pi
            assert abs(X[a, b] - want) < 1e-12


def test_small_cutoff_is_config_error():
    with pytest.raises(ConfigurationError):
        build_operator(COS, BC.NEU, 4)


def test_matrix_is_read_only():
    op = build_operator(COS, BC.DIR, 8)
    with pytest.raises(ValueError):
        op.matrix[0, 0] = 5


def test_dump_csv(tmp_path):
    op = build_operator(COS, BC.PER_PLUS, 8)
    path = tmp_path / "a.csv"
    dump_csv(op, path)
    lines = path.read_text().splitlines()
    assert lines[0] == "row_index,col_index,re,im"
    assert len(lines) - 1 == np.count_nonzero(op.matrix)
