import numpy as np
import pytest

from localqcrb.catalog import closed_form_angles, build_catalog_model, catalog_reference_measurement, planar_axes
from localqcrb.hoc import (
    _isotropic_root,
    _solve_triangle,
    _triangle_product,
    covariance_certificate,
    covariance_check,
    covariance_terms,
    hoc_residual,
    hoc_solve_numeric,
    hoc_terms,
    pair_coupling,
    planar_certificate,
    single_qubit_plane_vectors,
    solve_planar_three_qubit,
)
from localqcrb.linalg import Z, embed_operators, pauli_axis_op
from localqcrb.model import encoding_unitary, hamiltonian_model, m_matrix, random_model


def ghz_m(n, lam=0.3):
    return m_matrix(build_catalog_model("ghz", n), lam)


def random_axes(rng, n):
    a = rng.normal(size=(n, 3))
    return a / np.linalg.norm(a, axis=1, keepdims=True)


def test_hoc_terms_match_dense_traces(rng):
    model = random_model(3, rng)
    m = m_matrix(model, 0.4)
    axes = random_axes(rng, 3)
    terms = hoc_terms(m, axes)
    for mask in range(1, 8):
        ops = [(j + 1, pauli_axis_op(axes[j])) for j in range(3) if mask >> (2 - j) & 1]
        assert terms[mask] == pytest.approx(np.trace(m @ embed_operators(ops, 3)), abs=1e-12)
    assert np.max(np.abs(terms.real)) < 1e-12


def test_hoc_residual_examples():
    assert hoc_residual(np.zeros((4, 4)), random_axes(np.random.default_rng(0), 2)) == 0
    for n in (2, 3, 5):
        m = ghz_m(n)
        assert hoc_residual(m, np.tile([1.0, 0, 0], (n, 1))) < 1e-12
        z1 = embed_operators([(1, Z)], n)
        assert abs(np.trace(m @ z1)) == pytest.approx(2 * n, rel=1e-12)
        assert hoc_residual(m, np.tile([0, 0, 1.0], (n, 1))) >= 2 * n - 1e-9


def test_plane_vectors(w3):
    for v in single_qubit_plane_vectors(ghz_m(3)):
        assert np.linalg.norm(v[:2]) < 1e-12 and abs(v[2]) > 0
    for v in single_qubit_plane_vectors(m_matrix(w3, 0.7)):
        assert np.linalg.norm(v[:2]) < 1e-12 and abs(v[2]) > 0
    assert np.allclose(single_qubit_plane_vectors(np.zeros((8, 8))), 0)


@pytest.mark.parametrize("lam", [0.0, 0.3, 0.9, 1.4])
def test_pair_couplings_match_printed_matrices(w3, lam):
    s2, c2 = np.sin(2 * lam), np.cos(2 * lam)
    t13 = pair_coupling(w3, lam, 1, 3).matrix
    ref13 = np.array([[4, 5 * s2], [5 * s2, 4 * s2**2 - 8 * c2**2]]) / 9
    assert np.max(np.abs(t13 - ref13)) < 1e-12
    assert np.linalg.det(t13) == pytest.approx(-(32 * c2**2 + 9 * s2**2) / 81, abs=1e-12)
    t12 = pair_coupling(w3, lam, 1, 2).matrix
    assert np.max(np.abs(t12 - pair_coupling(w3, lam, 3, 2).matrix)) < 1e-12
    ref12 = np.array([[7, 12 * s2 * c2], [-2 * s2, -5 * c2]]) / 9
    assert np.max(np.abs(t12 - ref12)) < 1e-12


@pytest.mark.parametrize("lam", [0.1, 0.6, 1.3])
def test_triangle_product_closed_forms(w3, lam):
    t12 = pair_coupling(w3, lam, 1, 2).matrix
    t13 = pair_coupling(w3, lam, 1, 3).matrix
    t32 = pair_coupling(w3, lam, 3, 2).matrix
    tt = _triangle_product(t12, t13, t32)
    c4, c8, s4 = np.cos(4 * lam), np.cos(8 * lam), np.sin(4 * lam)
    assert tt[0, 0] == pytest.approx(-4 / 729 * (5 + 93 * c4), abs=1e-12)
    assert tt[0, 1] == pytest.approx(-(-107 + 564 * c4) * s4 / 1458, abs=1e-12)
    assert tt[1, 0] == pytest.approx(tt[0, 1], abs=1e-12)
    assert tt[1, 1] == pytest.approx(4 / 729 * (118 - 147 * c4 + 54 * c8) * np.cos(2 * lam) ** 2, abs=1e-12)
    det = np.linalg.det(tt)
    assert det == pytest.approx(np.linalg.det(t12) ** 2 * np.linalg.det(t13), abs=1e-14)
    assert det <= 0


def test_bilinear_identity(w3, rng):
    # with the Hermitian form {h, rho} = M / 2i: Tr[{h,rho} A_jk] = 2 <a_j|T_jk|a_k>
    lam = 0.55
    mh = m_matrix(w3, lam) / 2j
    for j, k in [(1, 2), (1, 3), (3, 2)]:
        t = pair_coupling(w3, lam, j, k).matrix
        for _ in range(5):
            aj, ak = rng.uniform(0, 2 * np.pi, 2)
            op = embed_operators(
                [(j, pauli_axis_op([np.cos(aj), np.sin(aj), 0])), (k, pauli_axis_op([np.cos(ak), np.sin(ak), 0]))], 3
            )
            bil = np.array([np.cos(aj), np.sin(aj)]) @ t @ np.array([np.cos(ak), np.sin(ak)])
            assert abs(np.trace(mh @ op) - 2 * bil) < 1e-10


def test_pair_coupling_precondition(rng):
    with pytest.raises(ValueError):
        pair_coupling(random_model(3, rng), 0.2, 1, 2)


def test_planar_solver_at_04(w3):
    rep = solve_planar_three_qubit(w3, 0.4)
    assert rep.feasible and rep.method == "planar"
    assert rep.residual < 1e-8
    diff = (rep.angles - closed_form_angles(0.4) + np.pi / 2) % np.pi - np.pi / 2
    assert np.max(np.abs(diff)) < 1e-6


def test_planar_solver_alpha1_equals_alpha3(w3):
    for lam in np.arange(0.1, 1.51, 0.1):
        rep = solve_planar_three_qubit(w3, lam)
        assert rep.feasible
        assert abs((rep.angles[0] - rep.angles[2] + np.pi / 2) % np.pi - np.pi / 2) < 1e-9


def test_planar_solver_zero_m():
    probe = np.zeros(8)
    probe[0] = 1
    model = hamiltonian_model(probe, embed_operators([(1, Z)], 3))
    rep = solve_planar_three_qubit(model, 0.5)
    assert rep.feasible and rep.residual == 0
    assert np.allclose(rep.axes, np.tile([0, 0, 1.0], (3, 1)))


def test_planar_solver_defers_for_generic_models(rng):
    rep = solve_planar_three_qubit(random_model(3, rng), 0.2, restarts=5)
    assert rep.method == "numeric"
    assert rep.notes and "planar pipeline skipped" in rep.notes[0]


def test_isotropic_root_degenerate_branches():
    # T_xx = 0: one root is the x axis (s -> infinity)
    v = _isotropic_root(np.array([[0.0, 1.0], [1.0, 3.0]]))
    assert abs(v @ np.array([[0.0, 1.0], [1.0, 3.0]]) @ v) < 1e-14
    v = _isotropic_root(np.array([[0.0, 0.0], [0.0, 2.0]]))
    assert np.allclose(np.abs(v), [1, 0])
    assert _isotropic_root(np.eye(2)) is None
    assert _isotropic_root(np.zeros((2, 2))) is not None


def test_triangle_with_vanishing_images():
    # T12 a2 = T32 a2 = 0 for a2 = y: fall back to the eigenvectors of T13
    t12 = np.array([[1.0, 0.0], [0.0, 0.0]])
    t32 = np.array([[0.0, 0.0], [2.0, 0.0]]).T
    t13 = np.array([[2.0, 1.0], [1.0, -1.0]])
    a1, a2, a3 = _solve_triangle(t12, t13, t32)
    for val in (a1 @ t12 @ a2, a3 @ t32 @ a2, a1 @ t13 @ a3):
        assert abs(val) < 1e-10


@pytest.mark.parametrize("n", [3, 4])
def test_numeric_ghz(n):
    rep = hoc_solve_numeric(ghz_m(n), seed=1)
    assert rep.feasible and rep.residual < 1e-9
    assert np.max(np.abs(rep.axes[:, 2])) < 1e-9
    assert hoc_residual(ghz_m(n), rep.axes) < 1e-9


def test_numeric_is_seeded(rng):
    m = m_matrix(random_model(3, rng), 0.1)
    a = hoc_solve_numeric(m, seed=5, restarts=3)
    b = hoc_solve_numeric(m, seed=5, restarts=3)
    assert np.array_equal(a.axes, b.axes) and a.residual == b.residual


def test_counterexample_numeric_and_certificate():
    model = build_catalog_model("w3_xxyy_counter")
    m = m_matrix(model, 0.0)
    rep = hoc_solve_numeric(m, restarts=30)
    assert rep.status == "infeasible" and rep.residual > 1e-3
    assert "not a proof" in rep.notes[0]
    for cert in (planar_certificate(m), covariance_certificate(model, 0.0)):
        assert cert is not None and cert.cosine_form and cert.determinant > 0
        assert cert.qubits == (1, 2, 3)


def test_counterexample_cosine_pattern():
    # in-plane angles b_j: |Cov| on each pair is a multiple of |cos(b_j - b_k)|
    model = build_catalog_model("w3_xxyy_counter")
    g, u = model.encoding.hamiltonian, encoding_unitary(model, 0.0)
    rng = np.random.default_rng(7)
    for _ in range(20):
        b = rng.uniform(0, 2 * np.pi, 3)
        axes = np.array([[np.cos(x), np.sin(x), 0] for x in b])
        cov = covariance_terms(model.probe, g, axes, u)
        # masks 0b110, 0b011, 0b101 are the pairs (1,2), (2,3), (1,3)
        assert abs(cov[0b110]) == pytest.approx(2 / 9 * abs(np.cos(b[0] - b[1])), abs=1e-12)
        assert abs(cov[0b011]) == pytest.approx(2 / 9 * abs(np.cos(b[1] - b[2])), abs=1e-12)
        assert abs(cov[0b101]) == pytest.approx(4 / 9 * abs(np.cos(b[0] - b[2])), abs=1e-12)


def test_no_certificate_for_feasible_models(w3):
    assert planar_certificate(m_matrix(w3, 0.4)) is None
    assert covariance_certificate(w3, 0.4) is None


def test_covariance_zero_generator(rng):
    model = random_model(3, rng)
    u = encoding_unitary(model, 0.3)
    assert covariance_check(model.probe, np.zeros((8, 8)), random_axes(rng, 3), u) == 0


def test_covariance_wtilde():
    model = build_catalog_model("wtilde_xy", 5)
    meas, _ = catalog_reference_measurement("wtilde_xy", 5, 0.0)
    u = encoding_unitary(model, 0.0)
    assert covariance_check(model.probe, model.encoding.hamiltonian, meas.axes, u) < 1e-10


def test_covariance_rejects_non_unitary(rng):
    model = random_model(2, rng)
    with pytest.raises(ValueError):
        covariance_check(model.probe, np.eye(4), random_axes(rng, 2), 2 * np.eye(4))


def test_covariance_and_hoc_agree_up_to_factor(rng):
    for n in (2, 3, 4):
        model = random_model(n, rng)
        lam = rng.uniform(-1, 1)
        m = m_matrix(model, lam)
        axes = random_axes(rng, n)
        terms = np.abs(hoc_terms(m, axes)[1:])
        cov = np.abs(covariance_terms(model.probe, model.encoding.hamiltonian, axes, encoding_unitary(model, lam))[1:])
        assert np.max(np.abs(terms - 4 * cov)) < 1e-8 * max(1.0, terms.max())


def test_covariance_vanishes_on_w3_solution(w3):
    lam = 0.9
    axes = planar_axes(closed_form_angles(lam))
    assert covariance_check(w3.probe, w3.encoding.hamiltonian, axes, encoding_unitary(w3, lam)) < 1e-12
