import numpy as np
import pytest

from localqcrb.catalog import build_catalog_model, ghz_state
from localqcrb.imp import LmccTree
from localqcrb.model import m_matrix, qfi, random_model, random_state
from localqcrb.povm import (
    ExplicitMeasurement,
    LocalMeasurement,
    LocalPovm,
    cfi,
    measurement_projectors,
    outcome_probabilities,
    reduce_to_projective,
    saturation_check,
)

XS = np.array([1.0, 0, 0])
ZS = np.array([0, 0, 1.0])


def trine(phi):
    """Three equally weighted axes in the X-Y plane, one of them at angle ``phi``."""
    angles = phi + np.array([0, 2 * np.pi / 3, 4 * np.pi / 3])
    return np.full(3, 2 / 3), np.array([[np.cos(a), np.sin(a), 0] for a in angles])


def test_projectors_computational_and_tree():
    comp = measurement_projectors(LocalMeasurement(np.tile(ZS, (2, 1))), 2)
    for k, e in enumerate(comp):
        ref = np.zeros((4, 4))
        ref[k, k] = 1
        assert np.allclose(e, ref)
    tree = LmccTree(2, (1, 2), [np.array([ZS]), np.array([ZS, ZS])])
    for a, b in zip(comp, measurement_projectors(tree, 2)):
        assert np.allclose(a, b)


def test_projectors_hadamard_orthogonal():
    ops = measurement_projectors(LocalMeasurement(np.tile(XS, (2, 1))), 2)
    gram = np.array([[np.trace(a @ b).real for b in ops] for a in ops])
    assert np.allclose(gram, np.eye(4))


def test_measurement_validation():
    with pytest.raises(ValueError):
        LocalMeasurement(np.array([[1.0, 1.0, 0]]))
    with pytest.raises(ValueError):
        LocalPovm([[1.0, 1.0]], [[XS, XS]])
    with pytest.raises(ValueError):
        LocalPovm([[0.5, 0.5, 1.0]], [[XS, -XS, ZS]])
    with pytest.raises(ValueError):
        ExplicitMeasurement([np.diag([1.0, 0]), np.diag([0.0, 0.5])])
    with pytest.raises(ValueError):
        ExplicitMeasurement([np.diag([1.5, 1.0]), np.diag([-0.5, 0.0])])
    with pytest.raises(ValueError):
        measurement_projectors(LocalMeasurement(np.tile(ZS, (2, 1))), 3)


def test_povm_completeness(rng):
    w, a = trine(0.3)
    ops = measurement_projectors(LocalPovm([w, w], [a, a]), 2)
    assert len(ops) == 9
    assert np.max(np.abs(sum(ops) - np.eye(4))) < 1e-10


def test_probabilities():
    p = outcome_probabilities(ghz_state(2), LocalMeasurement(np.tile(ZS, (2, 1))))
    assert np.allclose(p, [0.5, 0, 0, 0.5])
    lam = 0.4
    p = outcome_probabilities(ghz_state(2, 2 * lam), LocalMeasurement(np.tile(XS, (2, 1))))
    c2, s2 = np.cos(lam) ** 2 / 2, np.sin(lam) ** 2 / 2
    assert np.allclose(p, [c2, s2, s2, c2])
    assert p.sum() == pytest.approx(1, abs=1e-12)


def test_probabilities_sum_to_one(rng):
    psi = random_state(8, rng)
    axes = rng.normal(size=(3, 3))
    axes /= np.linalg.norm(axes, axis=1, keepdims=True)
    assert outcome_probabilities(psi, LocalMeasurement(axes)).sum() == pytest.approx(1, abs=1e-10)


def test_cfi_ghz():
    model = build_catalog_model("ghz", 2)
    lam = 0.4
    # p = cos^2(lam)/2 twice and sin^2(lam)/2 twice: F = sum (dp)^2 / p = 4
    assert cfi(model, LocalMeasurement(np.tile(XS, (2, 1))), lam) == pytest.approx(4, rel=1e-12)
    for n in (2, 3, 5):
        model = build_catalog_model("ghz", n)
        assert cfi(model, LocalMeasurement(np.tile(ZS, (n, 1))), 0.2) == pytest.approx(0, abs=1e-12)


def test_cfi_zero_probability_limit():
    # at lam = 0 two Hadamard outcomes have p = 0 and carry all the information
    model = build_catalog_model("ghz", 2)
    meas = LocalMeasurement(np.tile(XS, (2, 1)))
    assert cfi(model, meas, 0.0) == pytest.approx(4, rel=1e-12)
    assert cfi(model, meas, 1e-9) == pytest.approx(4, rel=1e-6)


def test_cfi_explicit_matches_local(rng):
    model = random_model(2, rng)
    axes = rng.normal(size=(2, 3))
    axes /= np.linalg.norm(axes, axis=1, keepdims=True)
    local = LocalMeasurement(axes)
    explicit = ExplicitMeasurement(measurement_projectors(local))
    assert cfi(model, explicit, 0.3) == pytest.approx(cfi(model, local, 0.3), rel=1e-12)


def test_data_processing(rng):
    for n in (1, 2, 3, 4):
        for _ in range(5):
            model = random_model(n, rng)
            axes = rng.normal(size=(n, 3))
            axes /= np.linalg.norm(axes, axis=1, keepdims=True)
            q = qfi(model, 0.5)
            assert cfi(model, LocalMeasurement(axes), 0.5) <= q + 1e-8 * max(1, q)


def test_saturation_check_examples():
    m = m_matrix(build_catalog_model("ghz", 3), 0.1)
    ok, res = saturation_check(m, LocalMeasurement(np.tile(XS, (3, 1))))
    assert ok and res < 1e-14
    ok, res = saturation_check(m, LocalMeasurement(np.tile(ZS, (3, 1))))
    assert not ok and res == pytest.approx(3, rel=1e-12)
    ok, _ = saturation_check(np.zeros((8, 8)), LocalMeasurement(np.tile(ZS, (3, 1))))
    assert ok


def test_saturation_rank1_path_matches_dense(rng):
    m = m_matrix(random_model(2, rng), 0.2)
    axes = rng.normal(size=(2, 3))
    axes /= np.linalg.norm(axes, axis=1, keepdims=True)
    local = LocalMeasurement(axes)
    dense = max(np.max(np.abs(e @ m @ e)) for e in measurement_projectors(local))
    assert saturation_check(m, local)[1] == pytest.approx(dense, rel=1e-10)
    assert saturation_check(m, ExplicitMeasurement(measurement_projectors(local)))[1] == pytest.approx(dense, rel=1e-10)


def test_reduce_to_projective():
    n = 3
    m = m_matrix(build_catalog_model("ghz", n), 0.25)
    w, a = trine(0.7)
    povm = LocalPovm([w] * n, [a] * n)
    assert saturation_check(m, povm)[0]
    proj = reduce_to_projective(povm)
    assert np.allclose(proj.axes, np.tile(a[0], (n, 1)))
    assert saturation_check(m, proj)[0]
    # a two-outcome POVM is already projective
    p2 = LocalPovm([[1.0, 1.0]] * 2, [[ZS, -ZS]] * 2)
    assert np.allclose(reduce_to_projective(p2).axes, np.tile(ZS, (2, 1)))
