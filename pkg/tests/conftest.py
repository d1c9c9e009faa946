import numpy as np
import pytest

from pvsubspace import DIODE_SI_2CM2, DiodePmaxModel, build_sample_set, estimate_c_matrix
from pvsubspace.bootstrap import bootstrap_subspace
from pvsubspace.models import CountingModel
from pvsubspace.sobol import project_grid, tensor_grid

STUDY_SEED = 0


@pytest.fixture(scope="session")
def diode_model():
    return DiodePmaxModel()


@pytest.fixture(scope="session")
def diode_samples(diode_model):
    """The M=1000, step 1e-6 gradient set used throughout the diode checks."""
    return build_sample_set(diode_model, DIODE_SI_2CM2, 1000, 1e-6, STUDY_SEED)


@pytest.fixture(scope="session")
def diode_estimate(diode_samples):
    return estimate_c_matrix(diode_samples)


@pytest.fixture(scope="session")
def diode_bootstrap(diode_samples):
    return bootstrap_subspace(diode_samples, n=1, replicates=1000, level=0.99, seed=STUDY_SEED)


@pytest.fixture(scope="session")
def diode_grid_values(diode_model):
    """P_max on the 8^5 Gauss-Legendre grid, evaluated once per session."""
    grid, _ = tensor_grid(5, 8)
    counter = CountingModel(diode_model)
    values = np.array([counter(x) for x in grid])
    assert counter.count == 32768
    return values


@pytest.fixture(scope="session")
def diode_pce(diode_grid_values):
    return project_grid(diode_grid_values, 5, 5, 8)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# -- acceptance report ---------------------------------------------------------------

ACCEPTANCE_KEY = pytest.StashKey[dict]()


@pytest.fixture
def acceptance(request):
    """Record a one-line verdict per acceptance criterion, then assert it."""
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, {})

    def report(number, ok, detail):
        lines[number] = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        print(lines[number])
        assert ok, detail
    return report


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE_KEY, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for number in sorted(lines):
            terminalreporter.write_line(lines[number])
