"""Pure-state parameter-estimation models and their metrological quantities."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np
from scipy.linalg import expm, expm_frechet

from .linalg import ATOL_STRUCT, expm_hermitian, is_hermitian, nqubits_of


@dataclass(frozen=True, eq=False)
class HamiltonianEncoding:
    """``|psi(lam)> = exp(-i lam t H) |psi0>``."""

    hamiltonian: np.ndarray
    time: float = 1.0

    def __post_init__(self):
        h = np.asarray(self.hamiltonian, dtype=complex)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ValueError("Hamiltonian must be a square matrix")
        if not is_hermitian(h):
            raise ValueError("Hamiltonian is not Hermitian")
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "time", float(self.time))

    @cached_property
    def _eig(self):
        return np.linalg.eigh(self.hamiltonian)

    def unitary(self, lam: float) -> np.ndarray:
        w, v = self._eig
        return (v * np.exp(-1j * lam * self.time * w)) @ v.conj().T


@dataclass(frozen=True, eq=False)
class Segment:
    """One piece of a piecewise-constant schedule: ``H(lam) = h0 + lam * h1`` for ``duration``."""

    duration: float
    h0: np.ndarray
    h1: np.ndarray

    def __post_init__(self):
        h0 = np.asarray(self.h0, dtype=complex)
        h1 = np.asarray(self.h1, dtype=complex)
        if h0.shape != h1.shape:
            raise ValueError("segment operators must share a shape")
        if not (is_hermitian(h0) and is_hermitian(h1)):
            raise ValueError("schedule segment is not Hermitian")
        if self.duration < 0:
            raise ValueError("segment duration must be non-negative")
        object.__setattr__(self, "h0", h0)
        object.__setattr__(self, "h1", h1)
        object.__setattr__(self, "duration", float(self.duration))

    def hamiltonian(self, lam: float) -> np.ndarray:
        return self.h0 + lam * self.h1


@dataclass(frozen=True, eq=False)
class ScheduleEncoding:
    """Time-dependent unitary encoding with a piecewise-constant Hamiltonian."""

    segments: tuple[Segment, ...]

    def __post_init__(self):
        segs = tuple(self.segments)
        if not segs:
            raise ValueError("schedule needs at least one segment")
        if len({s.h0.shape for s in segs}) != 1:
            raise ValueError("schedule segments disagree on dimension")
        object.__setattr__(self, "segments", segs)

    @property
    def dim(self) -> int:
        return self.segments[0].h0.shape[0]

    def unitary(self, lam: float) -> np.ndarray:
        u = np.eye(self.dim, dtype=complex)
        for seg in self.segments:
            u = expm(-1j * seg.duration * seg.hamiltonian(lam)) @ u
        return u

    def unitary_derivative(self, lam: float) -> np.ndarray:
        """Exact ``d U / d lam`` by the product rule and Frechet derivatives of ``expm``."""
        u = np.eye(self.dim, dtype=complex)
        du = np.zeros_like(u)
        for seg in self.segments:
            a = -1j * seg.duration * seg.hamiltonian(lam)
            e, de = expm_frechet(a, -1j * seg.duration * seg.h1)
            du = de @ u + e @ du
            u = e @ u
        return du


@dataclass(frozen=True, eq=False)
class GenericFamily:
    """Arbitrary ``lam -> |psi(lam)>`` provider, optionally with its analytic derivative.

    Without ``derivative`` the state derivative is a central finite difference
    with step ``1e-6 * max(1, |lam|)``; ``richardson=True`` uses the 4th-order
    five-point stencil instead.
    """

    state: Callable[[float], np.ndarray]
    derivative: Callable[[float], np.ndarray] | None = None
    richardson: bool = False


Encoding = HamiltonianEncoding | ScheduleEncoding | GenericFamily


@dataclass(frozen=True, eq=False)
class Model:
    probe: np.ndarray
    encoding: Encoding
    name: str = field(default="", compare=False)

    def __post_init__(self):
        psi = np.asarray(self.probe, dtype=complex).reshape(-1)
        nqubits_of(psi.shape[0])
        if abs(np.linalg.norm(psi) - 1.0) > ATOL_STRUCT:
            raise ValueError(f"probe state is not normalized (norm {np.linalg.norm(psi)!r})")
        object.__setattr__(self, "probe", psi)
        enc = self.encoding
        if isinstance(enc, HamiltonianEncoding) and enc.hamiltonian.shape[0] != psi.shape[0]:
            raise ValueError("Hamiltonian and probe dimensions differ")
        if isinstance(enc, ScheduleEncoding) and enc.dim != psi.shape[0]:
            raise ValueError("schedule and probe dimensions differ")

    @property
    def nqubits(self) -> int:
        return nqubits_of(self.probe.shape[0])

    @property
    def dim(self) -> int:
        return self.probe.shape[0]

    @property
    def is_unitary(self) -> bool:
        return isinstance(self.encoding, (HamiltonianEncoding, ScheduleEncoding))


def hamiltonian_model(probe, hamiltonian, time: float = 1.0, name: str = "") -> Model:
    return Model(probe, HamiltonianEncoding(hamiltonian, time), name=name)


def _checked_state(model: Model, lam: float) -> np.ndarray:
    psi = np.asarray(model.encoding.state(lam), dtype=complex).reshape(-1)
    if psi.shape != model.probe.shape:
        raise ValueError("generic family returned a state of the wrong dimension")
    if abs(np.linalg.norm(psi) - 1.0) > ATOL_STRUCT:
        raise ValueError(f"generic family state at lam={lam!r} is not normalized")
    return psi


def evolve_state(model: Model, lam: float) -> np.ndarray:
    """Encoded state ``|psi(lam)>``."""
    enc = model.encoding
    if isinstance(enc, GenericFamily):
        return _checked_state(model, lam)
    return enc.unitary(lam) @ model.probe


def finite_difference_derivative(
    state: Callable[[float], np.ndarray], lam: float, richardson: bool = False
) -> np.ndarray:
    h = 1e-6 * max(1.0, abs(lam))
    try:
        fp, fm = np.asarray(state(lam + h)), np.asarray(state(lam - h))
        if not richardson:
            return (fp - fm) / (2 * h)
        fp2, fm2 = np.asarray(state(lam + 2 * h)), np.asarray(state(lam - 2 * h))
    except Exception as exc:
        raise ValueError(f"state provider failed near lam={lam!r}") from exc
    return (8 * (fp - fm) - (fp2 - fm2)) / (12 * h)


def state_derivative(model: Model, lam: float) -> np.ndarray:
    """``d|psi>/d lam`` (unnormalized)."""
    enc = model.encoding
    if isinstance(enc, HamiltonianEncoding):
        return -1j * enc.time * (enc.hamiltonian @ enc.unitary(lam) @ model.probe)
    if isinstance(enc, ScheduleEncoding):
        return enc.unitary_derivative(lam) @ model.probe
    if enc.derivative is not None:
        return np.asarray(enc.derivative(lam), dtype=complex).reshape(-1)
    return finite_difference_derivative(
        lambda x: _checked_state(model, x), lam, richardson=enc.richardson
    )


def qfi(model: Model, lam: float) -> float:
    """Quantum Fisher information ``4(<dpsi|dpsi> - |<psi|dpsi>|^2)``."""
    psi = evolve_state(model, lam)
    dpsi = state_derivative(model, lam)
    value = 4.0 * (np.vdot(dpsi, dpsi).real - abs(np.vdot(psi, dpsi)) ** 2)
    return max(float(value), 0.0)


def sld(model: Model, lam: float) -> np.ndarray:
    """Symmetric logarithmic derivative ``L = 2 d rho`` of the pure encoded state."""
    psi = evolve_state(model, lam)
    dpsi = state_derivative(model, lam)
    a = np.outer(dpsi, psi.conj())
    return 2.0 * (a + a.conj().T)


def m_matrix(model: Model, lam: float) -> np.ndarray:
    """``M = [rho, L] = 2 [rho, d rho]``: anti-Hermitian, traceless, rank <= 2.

    A measurement with rank-1 effects ``E_x`` saturates the quantum
    Cramer-Rao bound iff ``E_x M E_x = 0`` for every outcome.
    """
    psi = evolve_state(model, lam)
    dpsi = state_derivative(model, lam)
    rho = np.outer(psi, psi.conj())
    a = np.outer(dpsi, psi.conj())
    drho = a + a.conj().T
    return 2.0 * (rho @ drho - drho @ rho)


def check_m_matrix(m: np.ndarray, qfi_value: float | None = None, rtol: float = 1e-8) -> None:
    """Raise ``ValueError`` if ``m`` breaks the structural invariants of an M matrix."""
    if np.max(np.abs(m + m.conj().T), initial=0.0) > ATOL_STRUCT:
        raise ValueError("M is not anti-Hermitian")
    if abs(np.trace(m)) > ATOL_STRUCT:
        raise ValueError("M is not traceless")
    sv = np.linalg.svd(m, compute_uv=False)
    if sv.size > 2 and sv[2] > rtol * max(sv[0], 1.0):
        raise ValueError("M has rank above 2")
    if qfi_value is not None:
        if abs(sv[0] - np.sqrt(qfi_value)) > rtol * max(1.0, np.sqrt(qfi_value)):
            raise ValueError("M spectrum does not match +-i sqrt(QFI)")


def metrological_generator(model: Model, lam: float = 0.0, steps: int = 64) -> np.ndarray:
    """Hermitian generator ``G = i U^dagger dU/dlam``.

    For a constant Hamiltonian this is ``t H``. For a piecewise-constant
    schedule ``G = int_0^t U(s)^dagger dH/dlam(s) U(s) ds`` is evaluated by the
    composite midpoint rule with ``steps`` nodes per segment.
    """
    enc = model.encoding
    if isinstance(enc, HamiltonianEncoding):
        return enc.time * enc.hamiltonian
    if not isinstance(enc, ScheduleEncoding):
        raise ValueError("metrological generator needs a unitary encoding")
    return schedule_generator(enc, lam, steps)


def schedule_generator(enc: ScheduleEncoding, lam: float, steps: int = 64) -> np.ndarray:
    if steps < 1:
        raise ValueError("steps must be positive")
    d = enc.dim
    g = np.zeros((d, d), dtype=complex)
    u_start = np.eye(d, dtype=complex)
    for seg in enc.segments:
        h = seg.hamiltonian(lam)
        ds = seg.duration / steps
        for k in range(steps):
            u = expm_hermitian(h, -1j * (k + 0.5) * ds) @ u_start
            g += ds * (u.conj().T @ seg.h1 @ u)
        u_start = expm_hermitian(h, -1j * seg.duration) @ u_start
    return 0.5 * (g + g.conj().T)


def encoding_unitary(model: Model, lam: float) -> np.ndarray:
    if not model.is_unitary:
        raise ValueError("model has no unitary encoding")
    return model.encoding.unitary(lam)


def random_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return v / np.linalg.norm(v)


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (a + a.conj().T)


def random_model(nqubits: int, rng: np.random.Generator, time: float = 1.0) -> Model:
    """Random probe and GUE-like Hamiltonian; used by property suites."""
    d = 2**nqubits
    return hamiltonian_model(random_state(d, rng), random_hermitian(d, rng), time, name="random")
