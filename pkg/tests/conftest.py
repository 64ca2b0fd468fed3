import numpy as np
import pytest

from localqcrb.catalog import build_catalog_model


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def w3():
    return build_catalog_model("w3_xx")


def constant_family(psi):
    from localqcrb.model import GenericFamily, Model

    return Model(psi, GenericFamily(lambda lam: psi, lambda lam: np.zeros_like(psi)))


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
