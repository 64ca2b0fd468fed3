import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from localqcrb.linalg import (
    I2, X, Y, Z,
    axis_basis,
    bloch_decompose,
    embed_operators,
    local_basis_change,
    partial_trace_to_qubit,
    pauli_axis_op,
    pauli_string_op,
    permute_qubits,
    product_basis,
    walsh_hadamard,
)

angles = st.tuples(st.floats(0, np.pi), st.floats(-np.pi, np.pi))


def sphere(th, ph):
    return np.array([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)])


def test_pauli_axis_op_examples():
    assert np.allclose(pauli_axis_op([0, 0, 1]), Z)
    assert np.allclose(pauli_axis_op([1, 0, 0]), X)
    op = pauli_axis_op([1 / np.sqrt(2), 1 / np.sqrt(2), 0])
    assert np.allclose(op, (X + Y) / np.sqrt(2))
    assert np.allclose(np.linalg.eigvalsh(op), [-1, 1])


def test_pauli_axis_op_rejects_non_unit():
    with pytest.raises(ValueError):
        pauli_axis_op([1, 1, 0])


@settings(max_examples=60, deadline=None)
@given(angles)
def test_axis_op_squares_to_identity_and_round_trips(a):
    n = sphere(*a)
    op = pauli_axis_op(n)
    assert np.max(np.abs(op @ op - I2)) < 1e-12
    kind, v = bloch_decompose(op)
    assert kind == "hermitian"
    assert np.max(np.abs(v - n)) < 1e-12


@settings(max_examples=60, deadline=None)
@given(angles)
def test_axis_basis_columns_are_eigenvectors(a):
    n = sphere(*a)
    b = axis_basis(n)
    op = pauli_axis_op(n)
    assert np.allclose(b.conj().T @ b, I2, atol=1e-12)
    assert np.allclose(op @ b[:, 0], b[:, 0], atol=1e-12)
    assert np.allclose(op @ b[:, 1], -b[:, 1], atol=1e-12)


def test_embed_examples():
    assert np.allclose(embed_operators([(1, Z)], 2), np.kron(Z, I2))
    assert np.allclose(embed_operators([(2, X)], 2), np.kron(I2, X))
    op = embed_operators([(1, X), (3, Y)], 3)
    assert np.allclose(op, np.kron(np.kron(X, I2), Y))
    assert abs(np.trace(op)) == 0


def test_embed_rejects_bad_indices():
    with pytest.raises(ValueError):
        embed_operators([(0, X)], 2)
    with pytest.raises(ValueError):
        embed_operators([(1, X), (1, Y)], 2)


def test_embed_trace_rule(rng):
    n = 4
    facs = [(1, rng.normal(size=(2, 2))), (3, rng.normal(size=(2, 2)))]
    expected = 2 ** (n - 2) * np.prod([np.trace(f) for _, f in facs])
    assert np.isclose(np.trace(embed_operators(facs, n)), expected)


def test_partial_trace_examples():
    assert np.allclose(partial_trace_to_qubit(np.kron(Z, I2), 1), 2 * Z)
    assert np.allclose(partial_trace_to_qubit(np.kron(Z, I2), 2), 0)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_partial_trace_of_product(rng, n):
    a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    b = rng.normal(size=(2 ** (n - 1),) * 2) + 1j * rng.normal(size=(2 ** (n - 1),) * 2)
    assert np.allclose(partial_trace_to_qubit(np.kron(a, b), 1), np.trace(b) * a)
    # middle qubit by brute force
    full = embed_operators([(2, a)], n)
    assert np.allclose(partial_trace_to_qubit(full, 2), 2 ** (n - 1) * a)


def test_bloch_decompose_examples():
    assert bloch_decompose(Z)[0] == "hermitian"
    assert np.allclose(bloch_decompose(Z)[1], [0, 0, 1])
    kind, a = bloch_decompose(1j * Y)
    assert kind == "anti-hermitian" and np.allclose(a, [0, 1, 0])
    assert np.allclose(bloch_decompose(X + 2 * Z)[1], [1, 0, 2])
    with pytest.raises(ValueError):
        bloch_decompose(I2)
    with pytest.raises(ValueError):
        bloch_decompose(X + 1j * Z)


def test_pauli_string_and_permutation():
    op = pauli_string_op("XYZ")
    assert np.allclose(op, np.kron(np.kron(X, Y), Z))
    assert np.allclose(permute_qubits(op, [3, 1, 2]), pauli_string_op("ZXY"))
    with pytest.raises(ValueError):
        pauli_string_op("XQ")


def test_local_basis_change_matches_dense(rng):
    n = 3
    op = rng.normal(size=(8, 8)) + 1j * rng.normal(size=(8, 8))
    axes = rng.normal(size=(n, 3))
    axes /= np.linalg.norm(axes, axis=1, keepdims=True)
    b = product_basis(axes)
    dense = b.conj().T @ op @ b
    assert np.allclose(local_basis_change(op, [axis_basis(a) for a in axes]), dense)


def test_walsh_hadamard_matches_definition(rng):
    v = rng.normal(size=8)
    out = walsh_hadamard(v)
    ref = [sum((-1) ** bin(a & x).count("1") * v[x] for x in range(8)) for a in range(8)]
    assert np.allclose(out, ref)
