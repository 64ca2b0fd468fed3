"""Measurements, outcome statistics and classical Fisher information."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .imp import LmccTree
from .linalg import ATOL_STRUCT, axis_basis, nqubits_of, product_basis
from .model import Model, evolve_state, state_derivative

PROB_EPS = 1e-12
SATURATION_TOL = 1e-9


@dataclass(eq=False)
class LocalMeasurement:
    """Product of single-qubit projective measurements along ``axes`` (shape ``(N, 3)``)."""

    axes: np.ndarray

    def __post_init__(self):
        axes = np.asarray(self.axes, dtype=float)
        if axes.ndim != 2 or axes.shape[1] != 3:
            raise ValueError("axes must have shape (N, 3)")
        if np.max(np.abs(np.linalg.norm(axes, axis=1) - 1.0)) > 1e-12:
            raise ValueError("measurement axes must be unit vectors")
        self.axes = axes

    @property
    def nqubits(self) -> int:
        return self.axes.shape[0]


@dataclass(eq=False)
class LocalPovm:
    """Rank-1 local POVM: qubit ``i`` has effects ``a_x (I + n_x . sigma) / 2``.

    Completeness requires ``sum a_x = 2`` and ``sum a_x n_x = 0`` on every qubit.
    """

    weights: list
    axes: list

    def __post_init__(self):
        if len(self.weights) != len(self.axes):
            raise ValueError("weights and axes must list the same qubits")
        ws, ns = [], []
        for w, n in zip(self.weights, self.axes):
            w = np.asarray(w, dtype=float).reshape(-1)
            n = np.asarray(n, dtype=float).reshape(-1, 3)
            if w.shape[0] != n.shape[0]:
                raise ValueError("one weight per outcome axis")
            if np.any(w <= 0):
                raise ValueError("POVM weights must be positive")
            if np.max(np.abs(np.linalg.norm(n, axis=1) - 1.0)) > 1e-12:
                raise ValueError("POVM axes must be unit vectors")
            if abs(w.sum() - 2.0) > ATOL_STRUCT:
                raise ValueError("POVM weights must sum to 2")
            if np.max(np.abs(w @ n)) > ATOL_STRUCT:
                raise ValueError("weighted POVM axes must sum to zero")
            ws.append(w)
            ns.append(n)
        self.weights, self.axes = ws, ns

    @property
    def nqubits(self) -> int:
        return len(self.weights)


@dataclass(eq=False)
class ExplicitMeasurement:
    """Arbitrary POVM given as a list of PSD operators summing to the identity."""

    operators: list

    def __post_init__(self):
        ops = [np.asarray(e, dtype=complex) for e in self.operators]
        if not ops:
            raise ValueError("empty POVM")
        d = ops[0].shape[0]
        for e in ops:
            if e.shape != (d, d) or np.max(np.abs(e - e.conj().T)) > ATOL_STRUCT:
                raise ValueError("POVM elements must be Hermitian and equally sized")
            if np.linalg.eigvalsh(e)[0] < -ATOL_STRUCT:
                raise ValueError("POVM element is not positive semidefinite")
        if np.max(np.abs(sum(ops) - np.eye(d))) > ATOL_STRUCT:
            raise ValueError("POVM elements do not sum to the identity")
        self.operators = ops

    @property
    def nqubits(self) -> int:
        return nqubits_of(self.operators[0].shape[0])


Measurement = LocalMeasurement | LmccTree | LocalPovm | ExplicitMeasurement


def effect_vectors(m) -> np.ndarray | None:
    """Columns ``v_x`` with ``E_x = v_x v_x^dagger`` for rank-1 measurements, else ``None``."""
    if isinstance(m, LocalMeasurement):
        return product_basis(m.axes)
    if isinstance(m, LmccTree):
        return m.vectors()
    if isinstance(m, LocalPovm):
        out = np.ones((1, 1), dtype=complex)
        for w, ns in zip(m.weights, m.axes):
            cols = np.stack([np.sqrt(wi) * axis_basis(n)[:, 0] for wi, n in zip(w, ns)], axis=1)
            out = np.kron(out, cols)
        return out
    return None


def measurement_projectors(m, nqubits: int | None = None) -> list[np.ndarray]:
    """Explicit POVM elements; raises if they do not sum to the identity."""
    vecs = effect_vectors(m)
    if vecs is not None:
        ops = [np.outer(v, v.conj()) for v in vecs.T]
    elif isinstance(m, ExplicitMeasurement):
        ops = list(m.operators)
    else:
        raise TypeError(f"unsupported measurement {type(m).__name__}")
    d = ops[0].shape[0]
    if nqubits is not None and d != 2**nqubits:
        raise ValueError("measurement acts on a different number of qubits")
    if np.max(np.abs(sum(ops) - np.eye(d))) > ATOL_STRUCT:
        raise ValueError("measurement is not complete")
    return ops


def outcome_probabilities(psi: np.ndarray, m) -> np.ndarray:
    """``p(x) = <psi|E_x|psi>`` clamped to ``[0, 1]``."""
    psi = np.asarray(psi, dtype=complex)
    vecs = effect_vectors(m)
    if vecs is not None:
        p = np.abs(vecs.conj().T @ psi) ** 2
    else:
        p = np.array([np.vdot(psi, e @ psi).real for e in m.operators])
    return np.clip(p, 0.0, 1.0)


def cfi(model: Model, m, lam: float) -> float:
    """Classical Fisher information of measuring ``m`` on ``|psi(lam)>``.

    Outcomes with ``p <= 1e-12`` contribute their limiting value
    ``<psi|L E_x L|psi>`` instead of ``(dp)^2 / p``; ``dp`` comes from the
    analytic state derivative.
    """
    psi = evolve_state(model, lam)
    dpsi = state_derivative(model, lam)
    lpsi = 2.0 * (dpsi + psi * np.vdot(dpsi, psi))
    vecs = effect_vectors(m)
    if vecs is not None:
        amp = vecs.conj().T @ psi
        damp = vecs.conj().T @ dpsi
        lamp = vecs.conj().T @ lpsi
        p = np.abs(amp) ** 2
        dp = 2.0 * (damp.conj() * amp).real
        limit = np.abs(lamp) ** 2
    else:
        ops = m.operators
        p = np.array([np.vdot(psi, e @ psi).real for e in ops])
        dp = np.array([2.0 * np.vdot(dpsi, e @ psi).real for e in ops])
        limit = np.array([np.vdot(lpsi, e @ lpsi).real for e in ops])
    big = p > PROB_EPS
    return float(np.sum(dp[big] ** 2 / p[big]) + np.sum(limit[~big]))


def saturation_check(m_mat: np.ndarray, m, tol: float = SATURATION_TOL) -> tuple[bool, float]:
    """Whether ``E_x M E_x = 0`` for all outcomes; returns ``(ok, max entry of any E_x M E_x)``."""
    vecs = effect_vectors(m)
    if vecs is not None:
        if vecs.shape[0] != m_mat.shape[0]:
            raise ValueError("dimension mismatch")
        quad = np.einsum("ix,ij,jx->x", vecs.conj(), m_mat, vecs)
        res = float(np.max(np.abs(quad) * np.max(np.abs(vecs) ** 2, axis=0)))
    else:
        res = max(float(np.max(np.abs(e @ m_mat @ e))) for e in m.operators)
    return res < tol, res


def reduce_to_projective(p: LocalPovm) -> LocalMeasurement:
    """Keep each qubit's first outcome axis as a two-outcome projective measurement.

    If the POVM saturates the bound, so does the result.
    """
    return LocalMeasurement(np.array([ns[0] for ns in p.axes]))
