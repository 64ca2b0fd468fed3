"""Iterative matrix partition (IMP).

A rank-1 product measurement saturates the bound iff ``M`` has zero diagonal
in the product basis. Peeling one qubit at a time, the 2x2 matrix of block
traces must be hollowed by that qubit's basis change, which is always possible
for a single matrix (LMCC) and possible for several at once only when their
Bloch vectors are coplanar (LM).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    ATOL_STRUCT,
    axis_basis,
    bits_of,
    bloch_decompose,
    is_antihermitian,
    nqubits_of,
    partial_trace_to_qubit,
    permute_qubits,
)

_Z_HAT = np.array([0.0, 0.0, 1.0])
_X_HAT = np.array([1.0, 0.0, 0.0])


def block_trace(w: np.ndarray, qubit: int = 1) -> np.ndarray:
    """2x2 matrix of block traces of ``w`` with respect to ``qubit`` (1-based, local to ``w``)."""
    w = np.asarray(w, dtype=complex)
    if not is_antihermitian(w):
        raise ValueError("block is not anti-Hermitian")
    if abs(np.trace(w)) > ATOL_STRUCT:
        raise ValueError("block is not traceless")
    return partial_trace_to_qubit(w, qubit)


def orthogonal_axis(a) -> np.ndarray:
    """Deterministic unit vector orthogonal to ``a``.

    ``z`` for ``a = 0``; otherwise ``normalize(z x a)`` when that cross
    product is non-degenerate, else ``x``.
    """
    a = np.asarray(a, dtype=float).reshape(3)
    if np.linalg.norm(a) <= 1e-12:
        return _Z_HAT.copy()
    c = np.cross(_Z_HAT, a)
    nrm = np.linalg.norm(c)
    if nrm > 1e-12:
        return c / nrm
    return _X_HAT.copy()


def coplanar_normal(vectors) -> np.ndarray | None:
    """Unit normal of a plane containing every vector, or ``None`` if they span R^3.

    Sign convention: non-negative z component, ties broken by x then y.
    """
    v = np.asarray(vectors, dtype=float).reshape(-1, 3)
    if v.size == 0 or np.max(np.abs(v)) == 0.0:
        return _Z_HAT.copy()
    u, s, _ = np.linalg.svd(v.T)
    if s.size == 3 and s[2] >= 1e-9 * s[0]:
        return None
    n = u[:, 2]
    for comp in (n[2], n[0], n[1]):
        if abs(comp) > 1e-12:
            if comp < 0:
                n = -n
            break
    return n / np.linalg.norm(n)


def simultaneous_hollowing_axis(blocks) -> np.ndarray | None:
    """Axis whose eigenbasis makes every traceless 2x2 block zero-diagonal, if one exists."""
    vecs = [bloch_decompose(b)[1] for b in blocks]
    return coplanar_normal(vecs)


@dataclass
class LmccTree:
    """Adaptive local measurement: depth ``d`` holds ``2**d`` axes indexed by earlier outcomes.

    ``levels[d][p]`` is the axis measured on qubit ``order[d]`` after the
    qubits ``order[:d]`` returned the bits of ``p`` (first outcome most
    significant). Outcome 0 is the ``+1`` eigenvector of ``n . sigma``.
    """

    nqubits: int
    order: tuple[int, ...]
    levels: list[np.ndarray]
    leaf_residual: float = 0.0

    def __post_init__(self):
        if len(self.levels) != self.nqubits:
            raise ValueError("need one level per qubit")
        for d, lv in enumerate(self.levels):
            if lv.shape != (2**d, 3):
                raise ValueError(f"level {d} must hold {2**d} axes")
            if np.max(np.abs(np.linalg.norm(lv, axis=1) - 1.0)) > 1e-12:
                raise ValueError("tree axes must be unit vectors")

    @property
    def num_axes(self) -> int:
        return sum(len(lv) for lv in self.levels)

    def axis(self, prefix: tuple[int, ...]) -> np.ndarray:
        d = len(prefix)
        idx = 0
        for b in prefix:
            idx = 2 * idx + int(b)
        return self.levels[d][idx]

    def vectors(self) -> np.ndarray:
        """Columns are the product states ``|pi_x>``; column ``x`` uses the natural bit order."""
        n = self.nqubits
        d = 2**n
        out = np.empty((d, d), dtype=complex)
        # position of qubit q in the measurement order
        rank = {q: i for i, q in enumerate(self.order)}
        for x in range(d):
            bits = bits_of(x, n)
            seq = [bits[q - 1] for q in self.order]
            factors = [axis_basis(self.axis(tuple(seq[:i])))[:, seq[i]] for i in range(n)]
            vec = np.ones(1, dtype=complex)
            for q in range(1, n + 1):
                vec = np.kron(vec, factors[rank[q]])
            out[:, x] = vec
        return out

    def to_dict(self) -> dict:
        return {
            "nqubits": self.nqubits,
            "order": list(self.order),
            "levels": [lv.tolist() for lv in self.levels],
            "leaf_residual": self.leaf_residual,
        }


def lmcc_build(m: np.ndarray, order=None) -> LmccTree:
    """Adaptive measurement that saturates the bound for any pure-state ``M``.

    Qubits are peeled in ``order`` (default ``1..N``). At every node the block
    trace ``i a . sigma`` of the current block is hollowed by measuring along
    an axis orthogonal to ``a``; the two diagonal sub-blocks become the
    children.
    """
    m = np.asarray(m, dtype=complex)
    n = nqubits_of(m.shape[0])
    order = tuple(range(1, n + 1)) if order is None else tuple(int(q) for q in order)
    if not is_antihermitian(m) or abs(np.trace(m)) > ATOL_STRUCT:
        raise ValueError("M must be traceless and anti-Hermitian")
    work = permute_qubits(m, order)
    blocks = [work]
    levels = []
    for _ in range(n):
        axes, children = [], []
        for w in blocks:
            _, a = bloch_decompose(partial_trace_to_qubit(w, 1), "anti-hermitian")
            nvec = orthogonal_axis(a)
            v = np.kron(axis_basis(nvec), np.eye(w.shape[0] // 2))
            w2 = v.conj().T @ w @ v
            h = w.shape[0] // 2
            axes.append(nvec)
            children.extend([w2[:h, :h], w2[h:, h:]])
        levels.append(np.array(axes))
        blocks = children
    leaf = max(abs(b[0, 0]) for b in blocks)
    return LmccTree(n, order, levels, float(leaf))


@dataclass
class GhzExtraction:
    indices: tuple[int, int]
    weight: float
    consistent: bool
    note: str = ""


@dataclass
class MStructure:
    kind: str  # "zero" | "diagonal" | "zero-diagonal" | "general"
    ghz: GhzExtraction | None = None


def classify_m(m: np.ndarray, psi: np.ndarray | None = None, atol: float = ATOL_STRUCT) -> MStructure:
    """Sort ``M`` into the structure classes that fix a measurement without search.

    A diagonal ``M`` with ``psi`` supplied also gets a GHZ-type extraction.
    """
    m = np.asarray(m)
    diag = np.abs(np.diagonal(m))
    off = np.abs(m - np.diag(np.diagonal(m)))
    if np.max(np.abs(m)) < atol:
        return MStructure("zero")
    if np.max(off) < atol:
        ghz = ghz_extract(m, psi) if psi is not None else None
        return MStructure("diagonal", ghz)
    if np.max(diag) < atol:
        return MStructure("zero-diagonal")
    return MStructure("general")


def structure_measurement(s: MStructure, nqubits: int) -> np.ndarray | None:
    """Axes fixed by the structure class: Hadamard basis for diagonal, computational otherwise."""
    if s.kind in ("zero", "zero-diagonal"):
        return np.tile(_Z_HAT, (nqubits, 1))
    if s.kind == "diagonal":
        return np.tile(_X_HAT, (nqubits, 1))
    return None


def ghz_extract(m: np.ndarray, psi: np.ndarray, atol: float = 1e-8) -> GhzExtraction:
    """Locate the two basis states carrying a diagonal ``M = 2ic(|a><a| - |b><b|)``.

    Checks that ``|<a|psi>| = |<b|psi>| = 1/sqrt(2)`` and that ``a`` and ``b``
    differ on every qubit; a failure is reported through ``consistent``.
    """
    d = np.diagonal(np.asarray(m))
    n = nqubits_of(d.shape[0])
    order = np.argsort(-np.abs(d), kind="stable")
    i1, i2 = sorted(int(i) for i in order[:2])
    weight = float(np.abs(d[order[0]]))
    notes = []
    if weight < ATOL_STRUCT:
        return GhzExtraction((i1, i2), 0.0, False, "M vanishes")
    if d.shape[0] > 2 and np.abs(d[order[2]]) > ATOL_STRUCT:
        notes.append("more than two non-zero diagonal entries")
    if abs(abs(d[i1]) - abs(d[i2])) > atol * max(1.0, weight):
        notes.append("diagonal entries differ in magnitude")
    amps = np.abs(np.asarray(psi)[[i1, i2]])
    if np.max(np.abs(amps - 1 / np.sqrt(2))) > atol:
        notes.append(f"amplitudes {amps.tolist()} are not 1/sqrt(2)")
    if i1 ^ i2 != 2**n - 1:
        notes.append("bitstrings agree on some qubit (state is not GHZ-type entangled)")
    return GhzExtraction((i1, i2), weight, not notes, "; ".join(notes))
