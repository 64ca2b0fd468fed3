"""Built-in worked models and their known optimal local measurements."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .linalg import X, Y, Z, embed_operators
from .model import GenericFamily, Model, hamiltonian_model
from .povm import LocalMeasurement


def basis_index(bits) -> int:
    out = 0
    for b in bits:
        out = 2 * out + int(b)
    return out


def ghz_state(n: int, phase: float = 0.0) -> np.ndarray:
    psi = np.zeros(2**n, dtype=complex)
    psi[0] = 1 / np.sqrt(2)
    psi[-1] = np.exp(-1j * phase) / np.sqrt(2)
    return psi


def w_state(n: int, signs=None) -> np.ndarray:
    """``sum_i s_i |0..1_i..0> / sqrt(n)`` with qubit ``i`` excited (qubit 1 most significant)."""
    signs = np.ones(n) if signs is None else np.asarray(signs, dtype=float)
    psi = np.zeros(2**n, dtype=complex)
    for i in range(1, n + 1):
        psi[2 ** (n - i)] = signs[i - 1]
    return psi / np.sqrt(n)


def wtilde_signs(n: int) -> np.ndarray:
    """Binary vector ``S`` with ``S(1)=1, S(2)=0`` and ``S(i) + S(i+2) = 1``."""
    if n < 3 or n % 2 == 0:
        raise ValueError("the generalized W construction needs odd N >= 3")
    s = np.zeros(n, dtype=int)
    s[0], s[1] = 1, 0
    for i in range(2, n):
        s[i] = 1 - s[i - 2]
    return s


def wtilde_identities(s) -> tuple[int, int]:
    """The two sign sums that must vanish for the generalized W reference measurement."""
    s = list(s)
    first = (-1) ** (s[0] + s[1]) + (-1) ** (s[-2] + s[-1])
    second = (-1) ** (s[1] + s[-1]) + (-1) ** (s[0] + s[-2])
    return first, second


def nearest_neighbour(n: int, paulis) -> np.ndarray:
    h = np.zeros((2**n, 2**n), dtype=complex)
    for j in range(1, n):
        for p in paulis:
            h += embed_operators([(j, p), (j + 1, p)], n)
    return h


def _ghz(n, lam=None, params=None) -> Model:
    if n < 1:
        raise ValueError("GHZ needs at least one qubit")
    family = GenericFamily(
        state=lambda x: ghz_state(n, n * x),
        derivative=lambda x: np.concatenate(
            [np.zeros(2**n - 1), [-1j * n * np.exp(-1j * n * x) / np.sqrt(2)]]
        ),
    )
    return Model(ghz_state(n), family, name="ghz")


def _ghz_hamiltonian(n, lam=None, params=None) -> Model:
    # exp(-i lam H) with H = -sum Z_j / 2 gives the relative phase exp(-i N lam)
    h = -0.5 * sum(embed_operators([(j, Z)], n) for j in range(1, n + 1))
    return hamiltonian_model(ghz_state(n), h, name="ghz_hamiltonian")


def _w3_xx(n=3, lam=None, params=None) -> Model:
    if n != 3:
        raise ValueError("w3_xx is a three-qubit model")
    return hamiltonian_model(w_state(3), nearest_neighbour(3, [X]), name="w3_xx")


def _w3_counter(n=3, lam=None, params=None) -> Model:
    if n != 3:
        raise ValueError("w3_xxyy_counter is a three-qubit model")
    return hamiltonian_model(w_state(3), nearest_neighbour(3, [X, Y]), name="w3_xxyy_counter")


def _wtilde(n, lam=None, params=None) -> Model:
    s = wtilde_signs(n)
    psi = w_state(n, (-1.0) ** s)
    h = nearest_neighbour(n, [X, Y])
    mean = np.vdot(psi, h @ psi).real
    if abs(mean) > 1e-12:
        raise ValueError(f"<H> = {mean!r} on the generalized W probe; expected 0")
    return hamiltonian_model(psi, h, name="wtilde_xy")


def closed_form_angles(lam: float) -> np.ndarray:
    """Closed-form in-plane angles ``(a1, a2, a3)`` for the ``w3_xx`` model.

    ``a2`` comes from the cotangent formula, ``a1 = a3`` from the cos/sin
    pair. Angles are defined modulo pi (opposite axes give the same
    projectors).
    """
    c2, s2 = np.cos(2 * lam), np.sin(2 * lam)
    c4, s4 = np.cos(4 * lam), np.sin(4 * lam)
    num = -(
        np.sqrt(2) * np.sqrt((41 + 23 * c4) * (29 * c2 + 6 * np.cos(6 * lam)) ** 2)
        - 107 * s4
        + 282 * np.sin(8 * lam)
    )
    den = 8 * (5 + 93 * c4)
    a2 = np.arctan2(den, num)
    ca, sa = np.cos(a2), np.sin(a2)
    a1 = np.arctan2(-7 * ca - 6 * sa * s4, -5 * sa * c2 - 2 * ca * s2)
    return np.array([a1, a2, a1])


def planar_axes(angles) -> np.ndarray:
    return np.array([[np.cos(a), np.sin(a), 0.0] for a in angles])


def _ref_ghz(n, lam):
    return LocalMeasurement(np.tile([1.0, 0.0, 0.0], (n, 1)))


def _ref_w3(n, lam):
    return LocalMeasurement(planar_axes(closed_form_angles(lam)))


def _ref_wtilde(n, lam):
    if lam != 0:
        raise ValueError("the generalized W reference measurement is only known at lambda = 0")
    axes = np.tile([0.0, 0.0, 1.0], (n, 1))
    axes[0] = axes[-1] = [1.0, 0.0, 0.0]
    return LocalMeasurement(axes)


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    builder: Callable
    reference: Callable | None
    expected_feasible: bool
    default_n: int
    description: str
    # lambda values where the reference is known to saturate; None means any
    reference_lambdas: tuple | None = None


CATALOG = {
    e.name: e
    for e in (
        CatalogEntry("ghz", _ghz, _ref_ghz, True, 3, "(|0..0> + exp(-i N lam)|1..1>)/sqrt(2)"),
        CatalogEntry(
            "ghz_hamiltonian", _ghz_hamiltonian, _ref_ghz, True, 3, "GHZ probe, H = -sum_j Z_j / 2"
        ),
        CatalogEntry("w3_xx", _w3_xx, _ref_w3, True, 3, "W3 probe, H = X1X2 + X2X3"),
        CatalogEntry(
            "wtilde_xy", _wtilde, _ref_wtilde, True, 3,
            "signed W probe (odd N), H = sum_j XjXj+1 + YjYj+1", reference_lambdas=(0.0,),
        ),
        CatalogEntry(
            "w3_xxyy_counter", _w3_counter, None, False, 3,
            "W3 probe, H = X1X2 + X2X3 + Y1Y2 + Y2Y3 (no saturating local measurement at lam = 0)",
            reference_lambdas=(0.0,),
        ),
    )
}


def _entry(name: str) -> CatalogEntry:
    try:
        return CATALOG[name]
    except KeyError:
        raise ValueError(f"unknown catalog model {name!r}; known: {sorted(CATALOG)}") from None


def build_catalog_model(name: str, n: int | None = None, params: dict | None = None) -> Model:
    e = _entry(name)
    return e.builder(e.default_n if n is None else int(n), None, params or {})


def catalog_reference_measurement(name: str, n: int | None = None, lam: float = 0.0):
    """``(measurement, expected_feasible)``; the measurement is ``None`` for infeasible entries."""
    e = _entry(name)
    n = e.default_n if n is None else int(n)
    if e.reference is None:
        return None, e.expected_feasible
    return e.reference(n, lam), e.expected_feasible
