"""Small dense kernel for N-qubit operators.

Bit convention: qubit 1 is the most significant bit of a basis index, so
``|x1 x2 ... xN>`` sits at index ``sum_j x_j 2**(N - j)``. Qubit indices in
the public API are 1-based.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

# structural predicates (hermiticity, tracelessness, zero tests)
ATOL_STRUCT = 1e-10
# arithmetic identities (unit norms, involutions)
ATOL_IDENT = 1e-12

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (X, Y, Z)
PAULI_BY_LABEL = {"I": I2, "X": X, "Y": Y, "Z": Z}


def nqubits_of(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if n < 0 or 2**n != dim:
        raise ValueError(f"dimension {dim} is not a power of two")
    return n


def is_hermitian(a: np.ndarray, atol: float = ATOL_STRUCT) -> bool:
    return bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= atol)


def is_antihermitian(a: np.ndarray, atol: float = ATOL_STRUCT) -> bool:
    return bool(np.max(np.abs(a + a.conj().T), initial=0.0) <= atol)


def is_unitary(a: np.ndarray, atol: float = ATOL_STRUCT) -> bool:
    eye = np.eye(a.shape[0])
    return bool(np.max(np.abs(a.conj().T @ a - eye), initial=0.0) <= atol)


def unit_axis(axis: Sequence[float], atol: float = ATOL_IDENT) -> np.ndarray:
    """Return ``axis`` as a float array, raising if it is not a unit vector."""
    n = np.asarray(axis, dtype=float).reshape(3)
    if abs(np.linalg.norm(n) - 1.0) > atol:
        raise ValueError(f"axis {n} is not a unit vector (norm {np.linalg.norm(n)!r})")
    return n


def pauli_axis_op(axis: Sequence[float]) -> np.ndarray:
    """The single-qubit observable ``n . sigma`` for a unit Bloch axis."""
    n = unit_axis(axis)
    return n[0] * X + n[1] * Y + n[2] * Z


def axis_basis(axis: Sequence[float]) -> np.ndarray:
    """2x2 unitary whose columns are the +1 and -1 eigenvectors of ``n . sigma``.

    Column 0 is outcome 0, i.e. the projector ``(I + n.sigma)/2``.
    """
    n = np.asarray(axis, dtype=float).reshape(3)
    n = n / np.linalg.norm(n)
    theta = np.arctan2(np.hypot(n[0], n[1]), n[2])
    phi = np.arctan2(n[1], n[0])
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array(
        [[c, -np.exp(-1j * phi) * s], [np.exp(1j * phi) * s, c]],
        dtype=complex,
    )


def pauli_string_op(label: str) -> np.ndarray:
    """Dense operator for a Pauli string such as ``"XZI"`` (first letter = qubit 1)."""
    out = np.ones((1, 1), dtype=complex)
    for ch in label.upper():
        try:
            out = np.kron(out, PAULI_BY_LABEL[ch])
        except KeyError:
            raise ValueError(f"invalid Pauli letter {ch!r} in {label!r}") from None
    return out


def embed_operators(factors: Iterable[tuple[int, np.ndarray]], nqubits: int) -> np.ndarray:
    """Tensor product of 2x2 ``factors`` placed on 1-based qubits, identity elsewhere."""
    placed: dict[int, np.ndarray] = {}
    for idx, op in factors:
        idx = int(idx)
        if not 1 <= idx <= nqubits:
            raise ValueError(f"qubit index {idx} out of range 1..{nqubits}")
        if idx in placed:
            raise ValueError(f"qubit index {idx} listed twice")
        op = np.asarray(op, dtype=complex)
        if op.shape != (2, 2):
            raise ValueError("factors must be 2x2")
        placed[idx] = op
    out = np.ones((1, 1), dtype=complex)
    for q in range(1, nqubits + 1):
        out = np.kron(out, placed.get(q, I2))
    return out


def partial_trace_to_qubit(op: np.ndarray, qubit: int) -> np.ndarray:
    """Trace out every qubit except ``qubit`` (1-based); returns a 2x2 matrix."""
    op = np.asarray(op)
    n = nqubits_of(op.shape[0])
    if op.shape != (2**n, 2**n):
        raise ValueError("operator must be square")
    if not 1 <= qubit <= n:
        raise ValueError(f"qubit index {qubit} out of range 1..{n}")
    left, right = 2 ** (qubit - 1), 2 ** (n - qubit)
    t = op.reshape(left, 2, right, left, 2, right)
    return np.einsum("aibajb->ij", t)


def bloch_decompose(op: np.ndarray, kind: str | None = None) -> tuple[str, np.ndarray]:
    """Split a traceless 2x2 (anti-)Hermitian matrix into its Bloch vector.

    Hermitian ``O = a.sigma`` gives ``a_k = Tr(O sigma_k)/2``; anti-Hermitian
    ``O = i a.sigma`` gives ``a_k = -i Tr(O sigma_k)/2``. ``kind`` forces one
    reading, which matters only for the zero matrix (both at once).

    Returns
    -------
    kind : {"hermitian", "anti-hermitian"}
    a : ndarray of shape (3,), possibly unnormalized
    """
    op = np.asarray(op, dtype=complex)
    if op.shape != (2, 2):
        raise ValueError("expected a 2x2 matrix")
    if abs(np.trace(op)) >= ATOL_STRUCT:
        raise ValueError(f"matrix is not traceless (trace {np.trace(op)!r})")
    herm, anti = is_hermitian(op), is_antihermitian(op)
    if kind is None:
        if herm:
            kind = "hermitian"
        elif anti:
            kind = "anti-hermitian"
        else:
            raise ValueError("matrix is neither Hermitian nor anti-Hermitian")
    elif kind == "hermitian" and not herm or kind == "anti-hermitian" and not anti:
        raise ValueError(f"matrix is not {kind}")
    elif kind not in ("hermitian", "anti-hermitian"):
        raise ValueError(f"unknown kind {kind!r}")
    traces = np.array([np.trace(op @ s) for s in PAULIS])
    a = 0.5 * traces.real if kind == "hermitian" else (-0.5j * traces).real
    return kind, a


def permute_qubits(op: np.ndarray, order: Sequence[int]) -> np.ndarray:
    """Reorder the tensor factors of an operator so that ``order[0]`` becomes qubit 1, etc."""
    n = nqubits_of(op.shape[0])
    perm = [int(q) - 1 for q in order]
    if sorted(perm) != list(range(n)):
        raise ValueError(f"{list(order)} is not a permutation of 1..{n}")
    t = op.reshape((2,) * (2 * n)).transpose(perm + [n + p for p in perm])
    return t.reshape(2**n, 2**n)


def local_basis_change(op: np.ndarray, unitaries: Sequence[np.ndarray]) -> np.ndarray:
    """``B^dagger op B`` for ``B = U_1 (x) ... (x) U_N`` without forming ``B``."""
    n = len(unitaries)
    d = 2**n
    t = np.asarray(op, dtype=complex).reshape((2,) * (2 * n))
    for j, u in enumerate(unitaries):
        t = np.moveaxis(np.tensordot(u.conj().T, t, axes=([1], [j])), 0, j)
        t = np.moveaxis(np.tensordot(t, u, axes=([n + j], [0])), -1, n + j)
    return t.reshape(d, d)


def product_basis(axes: np.ndarray) -> np.ndarray:
    """Columns are the product eigenvectors ``|pi_x>`` of a local axis assignment."""
    out = np.ones((1, 1), dtype=complex)
    for n in np.asarray(axes, dtype=float):
        out = np.kron(out, axis_basis(n))
    return out


def walsh_hadamard(values: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform over the qubit bits of the index.

    ``out[a] = sum_x (-1)**popcount(a & x) * values[x]``.
    """
    values = np.asarray(values)
    n = nqubits_of(values.shape[0])
    t = values.reshape((2,) * n)
    for ax in range(n):
        a0 = np.take(t, 0, axis=ax)
        a1 = np.take(t, 1, axis=ax)
        t = np.stack([a0 + a1, a0 - a1], axis=ax)
    return t.reshape(-1)


def expm_hermitian(h: np.ndarray, scale: complex) -> np.ndarray:
    """``exp(scale * h)`` for Hermitian ``h`` via its eigendecomposition."""
    w, v = np.linalg.eigh(h)
    return (v * np.exp(scale * w)) @ v.conj().T


def bits_of(index: int, nqubits: int) -> tuple[int, ...]:
    return tuple((index >> (nqubits - 1 - j)) & 1 for j in range(nqubits))
