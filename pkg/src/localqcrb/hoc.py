"""Hierarchy of orthogonality conditions (HOC).

A local projective measurement with Bloch axes ``n_1..n_N`` saturates the
QCRB iff ``Tr[M A_alpha] = 0`` for every non-empty qubit subset ``alpha``,
where ``A_alpha`` is the tensor product of ``n_j . sigma`` over ``j`` in
``alpha``. All ``2**N - 1`` traces are obtained at once as a Walsh-Hadamard
transform of the diagonal of ``M`` in the product measurement basis.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.optimize import least_squares

from .linalg import (
    ATOL_STRUCT,
    PAULIS,
    X,
    Y,
    axis_basis,
    bloch_decompose,
    embed_operators,
    is_unitary,
    local_basis_change,
    nqubits_of,
    partial_trace_to_qubit,
    walsh_hadamard,
)
from .imp import orthogonal_axis
from .model import (
    HamiltonianEncoding,
    Model,
    encoding_unitary,
    evolve_state,
    m_matrix,
    metrological_generator,
)

FEASIBLE_TOL = 1e-9
INFEASIBLE_TOL = 1e-6
PLANAR_TOL = 1e-8

# iY: rotates a planar 2-vector by -90 degrees, so <v| iY |v> = 0
_J = np.array([[0.0, 1.0], [-1.0, 0.0]])


@dataclass
class HocReport:
    """Outcome of a search for HOC-satisfying axes.

    ``status`` is ``"feasible"`` (residual below the threshold),
    ``"infeasible"`` (a proof from ``certificate``, or a numeric best residual
    above ``INFEASIBLE_TOL``) or ``"inconclusive"``. A numeric verdict is never
    a proof of infeasibility; only ``certificate`` is.
    """

    feasible: bool
    axes: np.ndarray | None
    residual: float
    status: str
    method: str
    certificate: str | None = None
    angles: np.ndarray | None = None
    restarts_used: int = 0
    notes: list[str] = field(default_factory=list)


@dataclass
class PairCoupling:
    j: int
    k: int
    matrix: np.ndarray


@dataclass
class InfeasibilityCertificate:
    """Analytic proof that no local measurement saturates the bound.

    The level-1 conditions pin each of ``qubits`` to a plane; in those planes
    the level-2 conditions read ``<b_j| T_jk |b_k> = 0``. With all three
    ``T_jk`` invertible they are solvable iff the symmetric part of
    ``T_21 Y T_13 Y T_32`` is indefinite; ``determinant > 0`` rules that out.
    """

    qubits: tuple[int, int, int]
    pair_matrices: dict[tuple[int, int], np.ndarray]
    determinant: float
    cosine_form: bool
    note: str


def hoc_terms(m: np.ndarray, axes: np.ndarray) -> np.ndarray:
    """``Tr[M A_alpha]`` for every subset mask ``alpha`` (bit order as basis indices).

    Entry 0 is ``Tr M`` itself.
    """
    axes = np.asarray(axes, dtype=float)
    diag = np.diagonal(local_basis_change(m, [axis_basis(n) for n in axes]))
    return walsh_hadamard(diag)


def hoc_residual(m: np.ndarray, axes: np.ndarray) -> float:
    """Largest ``|Tr[M A_alpha]|`` over the non-empty subsets."""
    axes = np.asarray(axes, dtype=float)
    if axes.shape != (nqubits_of(m.shape[0]), 3):
        raise ValueError("need one axis per qubit")
    return float(np.max(np.abs(hoc_terms(m, axes)[1:]), initial=0.0))


def single_qubit_plane_vectors(m: np.ndarray) -> np.ndarray:
    """Vectors ``m_j`` with ``i m_j . sigma = Tr_{not j} M``; row ``j-1`` is qubit ``j``.

    An axis passes the single-qubit conditions iff it is orthogonal to ``m_j``.
    """
    n = nqubits_of(m.shape[0])
    return np.array(
        [bloch_decompose(partial_trace_to_qubit(m, j), "anti-hermitian")[1] for j in range(1, n + 1)]
    )


def _plane_basis(normal: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    e1 = orthogonal_axis(normal)
    e2 = np.cross(normal / np.linalg.norm(normal), e1)
    return e1, e2


def pair_coupling(model: Model, lam: float, j: int, k: int) -> PairCoupling:
    """``T_jk[P, Q] = <{h, P_j Q_k}>_lam / 2`` for ``P, Q`` in ``{X, Y}``.

    ``h = H - <psi0|H|psi0>``. Valid when ``m_j`` and ``m_k`` lie along z, so
    admissible axes are ``(cos a, sin a, 0)``; then
    ``Tr[{h, rho} A_jk] = 2 <a_j| T_jk |a_k>``.
    """
    enc = model.encoding
    if not isinstance(enc, HamiltonianEncoding):
        raise ValueError("pair coupling needs a Hamiltonian encoding")
    mv = single_qubit_plane_vectors(m_matrix(model, lam))
    for q in (j, k):
        if np.max(np.abs(mv[q - 1, :2])) > ATOL_STRUCT * max(1.0, np.linalg.norm(mv[q - 1])):
            raise ValueError(f"m vector of qubit {q} is not along z")
    n = model.nqubits
    h = enc.hamiltonian - np.vdot(model.probe, enc.hamiltonian @ model.probe).real * np.eye(model.dim)
    psi = evolve_state(model, lam)
    t = np.empty((2, 2))
    for a, p in enumerate((X, Y)):
        for b, q in enumerate((X, Y)):
            op = embed_operators([(j, p), (k, q)], n)
            t[a, b] = 0.5 * np.vdot(psi, (h @ op + op @ h) @ psi).real
    return PairCoupling(j, k, t)


def coupling_from_m(m: np.ndarray, j: int, k: int, basis_j, basis_k) -> np.ndarray:
    """Pair matrix in the given in-plane bases, scaled so that ``Tr[M A_jk] = 4i <b_j|T|b_k>``."""
    n = nqubits_of(m.shape[0])
    t = np.empty((2, 2))
    for a, u in enumerate(basis_j):
        for b, v in enumerate(basis_k):
            op = embed_operators([(j, _sigma(u)), (k, _sigma(v))], n)
            t[a, b] = (np.trace(m @ op) / 4j).real
    return t


def _sigma(v: np.ndarray) -> np.ndarray:
    return v[0] * PAULIS[0] + v[1] * PAULIS[1] + v[2] * PAULIS[2]


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def _triangle_product(t12: np.ndarray, t13: np.ndarray, t32: np.ndarray) -> np.ndarray:
    return (t12.T @ Y @ t13 @ Y @ t32).real


def _isotropic_root(tt: np.ndarray) -> np.ndarray | None:
    """Unit ``v`` with ``v^T tt v = 0``, or ``None`` when the form is definite.

    Among the two roots of ``T_xx s^2 + 2 T_xy s + T_yy = 0`` (``s = cot a``)
    this takes ``s = (-T_xy + sqrt(T_xy^2 - T_xx T_yy)) / T_xx``, written in
    the division-free forms ``(-T_xy + r, T_xx)`` and ``(-T_yy, T_xy + r)``.
    """
    txx, tyy = tt[0, 0], tt[1, 1]
    txy = 0.5 * (tt[0, 1] + tt[1, 0])
    disc = txy * txy - txx * tyy
    scale = max(np.max(np.abs(tt)) ** 2, 1e-300)
    if disc < -1e-12 * scale:
        return None
    r = np.sqrt(max(disc, 0.0))
    v1 = np.array([-txy + r, txx])
    v2 = np.array([-tyy, txy + r])
    v = v1 if np.linalg.norm(v1) >= np.linalg.norm(v2) else v2
    if np.linalg.norm(v) <= 1e-300:
        return np.array([1.0, 0.0])
    return _unit(v)


def _perp(t: np.ndarray, v: np.ndarray, tol: float) -> np.ndarray | None:
    w = _J @ (t @ v)
    nrm = np.linalg.norm(w)
    return None if nrm <= tol else w / nrm


def _solve_triangle(t12, t13, t32, tol=1e-10):
    """Planar vectors with ``<a1|T12|a2> = <a2|T23|a3> = <a1|T13|a3> = 0``, or ``None``."""
    scale = max(np.max(np.abs(t12)), np.max(np.abs(t13)), np.max(np.abs(t32)), 1e-300)
    tol = tol * scale
    v2 = _isotropic_root(_triangle_product(t12, t13, t32))
    if v2 is not None:
        v1, v3 = _perp(t12, v2, tol), _perp(t32, v2, tol)
        if v1 is not None and v3 is not None:
            return v1, v2, v3
    # some T_k2 |a2> vanishes, or no isotropic a2: look for a kernel direction
    for cand in _kernel_candidates(t12, t32, t13, tol):
        sol = _close_triangle(cand, t12, t13, t32, tol)
        if sol is not None:
            return sol
    return None


def _kernel_candidates(t12, t32, t13, tol):
    out = []
    for t in (t12, t32, t12.T, t32.T, t13, t13.T):
        w, vecs = np.linalg.eig(t)
        for i in np.argsort(np.abs(w)):
            if abs(w[i]) <= tol:
                v = vecs[:, i].real
                if np.linalg.norm(v) > 0:
                    out.append(_unit(v))
    return out


def _close_triangle(seed, t12, t13, t32, tol):
    """Try every placement of ``seed`` on one vertex and complete greedily."""
    def complete(a1=None, a2=None, a3=None):
        # sweep edges until all three vectors are fixed
        for _ in range(3):
            if a2 is not None and a1 is None:
                a1 = _perp(t12, a2, tol) if np.linalg.norm(t12 @ a2) > tol else None
            if a2 is not None and a3 is None:
                a3 = _perp(t32, a2, tol) if np.linalg.norm(t32 @ a2) > tol else None
            if a3 is not None and a1 is None:
                a1 = _perp(t13, a3, tol) if np.linalg.norm(t13 @ a3) > tol else None
            if a1 is not None and a3 is None:
                a3 = _perp(t13.T, a1, tol) if np.linalg.norm(t13.T @ a1) > tol else None
            if a1 is not None and a2 is None:
                a2 = _perp(t12.T, a1, tol) if np.linalg.norm(t12.T @ a1) > tol else None
            if a3 is not None and a2 is None:
                a2 = _perp(t32.T, a3, tol) if np.linalg.norm(t32.T @ a3) > tol else None
        a1 = np.array([1.0, 0.0]) if a1 is None else a1
        a2 = np.array([1.0, 0.0]) if a2 is None else a2
        a3 = np.array([1.0, 0.0]) if a3 is None else a3
        return a1, a2, a3

    for slot in range(3):
        args = [None, None, None]
        args[slot] = seed
        a1, a2, a3 = complete(*args)
        worst = max(abs(a1 @ t12 @ a2), abs(a3 @ t32 @ a2), abs(a1 @ t13 @ a3))
        if worst <= 10 * tol:
            return a1, a2, a3
    return None


def _common_axis(mv: np.ndarray, tol: float) -> np.ndarray | None:
    """Shared direction of the non-negligible ``m_j``, ``ẑ`` if all vanish, else ``None``."""
    big = [v for v in mv if np.linalg.norm(v) > tol]
    if not big:
        return np.array([0.0, 0.0, 1.0])
    ref = _unit(big[0])
    for v in big[1:]:
        if np.linalg.norm(np.cross(ref, _unit(v))) > 1e-8:
            return None
    # fixed orientation, so a common z axis gives the in-plane basis (x, y)
    for comp in (ref[2], ref[0], ref[1]):
        if abs(comp) > 1e-12:
            return ref if comp > 0 else -ref
    return ref


def solve_planar_three_qubit(model: Model, lam: float, **numeric_opts) -> HocReport:
    """Closed-form HOC solution for three qubits whose ``m_j`` share one axis.

    With all admissible axes in the common plane, the pair conditions are
    bilinear forms ``<a_j|T_jk|a_k> = 0``. ``a_2`` is an isotropic vector of
    ``T_21 Y T_13 Y T_32``; then ``a_1 ~ iY T_12 a_2`` and ``a_3 ~ iY T_32 a_2``.
    The triple condition is checked numerically afterwards. When a
    precondition fails the problem is handed to :func:`hoc_solve_numeric`.
    """
    m = m_matrix(model, lam)
    return planar_three_qubit_from_m(m, **numeric_opts)


def planar_three_qubit_from_m(m: np.ndarray, **numeric_opts) -> HocReport:
    if nqubits_of(m.shape[0]) != 3:
        raise ValueError("planar pipeline is for three qubits")
    scale = max(np.max(np.abs(m)), 1.0)
    if np.max(np.abs(m)) < ATOL_STRUCT:
        axes = np.tile([0.0, 0.0, 1.0], (3, 1))
        return HocReport(True, axes, 0.0, "feasible", "planar", angles=np.zeros(3))
    mv = single_qubit_plane_vectors(m)
    axis = _common_axis(mv, ATOL_STRUCT * scale)
    if axis is None:
        return _defer(m, "m vectors are not parallel", numeric_opts)
    e1, e2 = _plane_basis(axis)
    basis = (e1, e2)
    triple = [
        abs(np.trace(m @ embed_operators([(1, _sigma(a)), (2, _sigma(b)), (3, _sigma(c))], 3)))
        for a in basis for b in basis for c in basis
    ]
    if max(triple) > PLANAR_TOL * scale:
        return _defer(m, "triple-qubit condition does not vanish on the plane", numeric_opts)
    t12 = coupling_from_m(m, 1, 2, basis, basis)
    t13 = coupling_from_m(m, 1, 3, basis, basis)
    t32 = coupling_from_m(m, 3, 2, basis, basis)
    sol = _solve_triangle(t12, t13, t32)
    if sol is None:
        cert = planar_certificate(m)
        if cert is not None:
            return HocReport(False, None, np.inf, "infeasible", "planar", certificate=cert.note)
        return _defer(m, "no planar solution of the pair conditions", numeric_opts)
    angles = np.array([np.arctan2(v[1], v[0]) for v in sol])
    axes = np.array([np.cos(a) * e1 + np.sin(a) * e2 for a in angles])
    res = hoc_residual(m, axes)
    if res >= PLANAR_TOL * scale:
        return _defer(m, f"planar candidate left residual {res:.3e}", numeric_opts)
    return HocReport(True, axes, res, "feasible", "planar", angles=angles)


def _defer(m, why, opts) -> HocReport:
    rep = hoc_solve_numeric(m, **opts)
    rep.notes.insert(0, f"planar pipeline skipped: {why}")
    return rep


def _axis_parametrization(m: np.ndarray):
    """Per qubit either a plane basis (one angle) or ``None`` (two sphere angles)."""
    mv = single_qubit_plane_vectors(m)
    tol = ATOL_STRUCT * max(1.0, np.max(np.abs(m)))
    return [(_plane_basis(v) if np.linalg.norm(v) > tol else None) for v in mv]


def _axes_from_params(params: np.ndarray, layout) -> np.ndarray:
    axes, i = [], 0
    for plane in layout:
        if plane is None:
            th, ph = params[i], params[i + 1]
            axes.append([np.sin(th) * np.cos(ph), np.sin(th) * np.sin(ph), np.cos(th)])
            i += 2
        else:
            a = params[i]
            axes.append(np.cos(a) * plane[0] + np.sin(a) * plane[1])
            i += 1
    return np.array(axes, dtype=float)


def hoc_solve_numeric(
    m: np.ndarray,
    restarts: int = 20,
    seed: int = 0,
    max_iter: int = 200,
    tol: float = FEASIBLE_TOL,
) -> HocReport:
    """Multistart least-squares search for HOC axes.

    Minimizes ``sum_alpha |Tr M A_alpha|^2``, which equals ``2**N`` times the
    squared diagonal of ``M`` in the product basis. Qubits with ``m_j != 0``
    are restricted to the plane orthogonal to ``m_j``.
    """
    n = nqubits_of(m.shape[0])
    if np.max(np.abs(m)) < ATOL_STRUCT:
        axes = np.tile([0.0, 0.0, 1.0], (n, 1))
        return HocReport(True, axes, 0.0, "feasible", "numeric", restarts_used=0)
    layout = _axis_parametrization(m)
    nparams = sum(2 if p is None else 1 for p in layout)
    rng = np.random.default_rng(seed)

    def resid(params):
        axes = _axes_from_params(params, layout)
        return np.diagonal(local_basis_change(m, [axis_basis(a) for a in axes])).imag

    best_axes, best_res, used = None, np.inf, 0
    for _ in range(max(1, restarts)):
        used += 1
        x0 = rng.uniform(0.0, 2 * np.pi, size=nparams)
        sol = least_squares(
            resid, x0, jac="2-point", method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15,
            max_nfev=max_iter * (nparams + 1),
        )
        axes = _axes_from_params(sol.x, layout)
        res = hoc_residual(m, axes)
        if res < best_res:
            best_axes, best_res = axes, res
        if best_res < tol:
            break
    if best_res < tol:
        status = "feasible"
    elif best_res > INFEASIBLE_TOL:
        status = "infeasible"
    else:
        status = "inconclusive"
    rep = HocReport(best_res < tol, best_axes, float(best_res), status, "numeric", restarts_used=used)
    if status == "infeasible":
        rep.notes.append("numeric search only; not a proof of infeasibility")
    return rep


def covariance_value(psi0: np.ndarray, g: np.ndarray, u: np.ndarray, op: np.ndarray) -> float:
    """``Cov(U^dagger A U, G)`` on ``|psi0>``: symmetrized correlation minus product of means."""
    a_h = u.conj().T @ op @ u
    gpsi = g @ psi0
    apsi = a_h @ psi0
    sym = np.vdot(apsi, gpsi).real
    return float(sym - np.vdot(psi0, apsi).real * np.vdot(psi0, gpsi).real)


def covariance_terms(psi0: np.ndarray, g: np.ndarray, axes: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Covariance for every subset mask at once (entry 0 is the empty subset, always 0)."""
    axes = np.asarray(axes, dtype=float)
    basis = [axis_basis(n) for n in axes]
    phi = u @ psi0
    chi = u @ (g @ psi0)

    def to_local(v):
        t = v.reshape((2,) * len(basis))
        for j, b in enumerate(basis):
            t = np.moveaxis(np.tensordot(b.conj().T, t, axes=([1], [j])), 0, j)
        return t.reshape(-1)

    p, c = to_local(phi), to_local(chi)
    corr = walsh_hadamard(p.conj() * c).real
    means = walsh_hadamard(np.abs(p) ** 2).real
    return corr - means * np.vdot(psi0, g @ psi0).real


def covariance_check(psi0: np.ndarray, g: np.ndarray, axes: np.ndarray, u: np.ndarray) -> float:
    """Largest ``|Cov(A_alpha^(H), G)|`` over non-empty subsets.

    Vanishes exactly when the axes satisfy the HOC for the unitary model
    ``U |psi0>``; for such models ``|Tr[M A_alpha]| = 4 |Cov|``.
    """
    psi0 = np.asarray(psi0, dtype=complex)
    u = np.asarray(u, dtype=complex)
    if not is_unitary(u):
        raise ValueError("U is not unitary")
    if u.shape[0] != psi0.shape[0] or g.shape != u.shape:
        raise ValueError("dimension mismatch")
    return float(np.max(np.abs(covariance_terms(psi0, g, axes, u)[1:]), initial=0.0))


def _certificate_from_pairs(qubits, pairs) -> InfeasibilityCertificate | None:
    j, k, l = qubits
    t12, t13, t32 = pairs[(j, k)], pairs[(j, l)], pairs[(l, k)]
    scale = max(np.max(np.abs(t)) for t in (t12, t13, t32))
    if scale == 0:
        return None
    if min(abs(np.linalg.det(t)) for t in (t12, t13, t32)) <= 1e-10 * scale**2:
        return None
    tt = _triangle_product(t12, t13, t32)
    sym = 0.5 * (tt + tt.T)
    det = float(np.linalg.det(sym))
    if det <= 1e-10 * max(np.max(np.abs(sym)), 1e-300) ** 2:
        return None
    cosine = all(_is_rotation_multiple(t, scale) for t in (t12, t13, t32))
    if cosine:
        note = (
            f"qubits {qubits}: single-qubit conditions force every axis into a plane "
            "(angles b_j); each pair condition reduces to cos(b_j - b_k + phase_jk) = 0, "
            "and the three pair conditions cannot hold together"
        )
    else:
        note = (
            f"qubits {qubits}: single-qubit conditions force planar axes; the pair "
            f"conditions need an isotropic vector of a definite 2x2 form (det {det:.6g} > 0)"
        )
    return InfeasibilityCertificate(tuple(qubits), {key: t.copy() for key, t in pairs.items()}, det, cosine, note)


def _is_rotation_multiple(t: np.ndarray, scale: float) -> bool:
    # c * (rotation or reflection): then <b_j|T|b_k> = c cos(b_j -+ b_k + phase)
    g = t.T @ t
    return abs(g[0, 0] - g[1, 1]) <= 1e-10 * scale**2 and abs(g[0, 1]) <= 1e-10 * scale**2


def planar_certificate(m: np.ndarray) -> InfeasibilityCertificate | None:
    """Search qubit triples for a proof that the HOC cannot be met, using ``M`` directly."""
    n = nqubits_of(m.shape[0])
    mv = single_qubit_plane_vectors(m)
    tol = ATOL_STRUCT * max(1.0, np.max(np.abs(m)))
    return _scan_triples(
        n,
        lambda q: np.linalg.norm(mv[q - 1]) > tol,
        lambda q: _plane_basis(mv[q - 1]),
        lambda a, b, ba, bb: coupling_from_m(m, a, b, ba, bb),
    )


def covariance_certificate(model: Model, lam: float, steps: int = 64) -> InfeasibilityCertificate | None:
    """Same search as :func:`planar_certificate`, phrased through covariances with the generator.

    Level 1: ``c_j[k] = Cov(sigma_k^(j),H, G)`` plays the role of ``m_j``.
    Level 2: pair matrices are ``Cov((u.sigma)_j (v.sigma)_k ^(H), G)`` over in-plane bases.
    """
    psi0 = model.probe
    g = metrological_generator(model, lam, steps)
    u = encoding_unitary(model, lam)
    n = model.nqubits
    cov1 = np.array(
        [[covariance_value(psi0, g, u, embed_operators([(q, s)], n)) for s in PAULIS] for q in range(1, n + 1)]
    )
    tol = ATOL_STRUCT * max(1.0, np.max(np.abs(cov1)))

    def pair(a, b, ba, bb):
        return np.array(
            [[covariance_value(psi0, g, u, embed_operators([(a, _sigma(x)), (b, _sigma(y))], n)) for y in bb] for x in ba]
        )

    return _scan_triples(
        n,
        lambda q: np.linalg.norm(cov1[q - 1]) > tol,
        lambda q: _plane_basis(cov1[q - 1]),
        pair,
    )


def _scan_triples(n, forced, plane, pair_fn):
    if n < 3:
        return None
    for trip in combinations(range(1, n + 1), 3):
        if not all(forced(q) for q in trip):
            continue
        bases = {q: plane(q) for q in trip}
        j, k, l = trip
        pairs = {
            (j, k): pair_fn(j, k, bases[j], bases[k]),
            (j, l): pair_fn(j, l, bases[j], bases[l]),
            (l, k): pair_fn(l, k, bases[l], bases[k]),
        }
        cert = _certificate_from_pairs(trip, pairs)
        if cert is not None:
            return cert
    return None
