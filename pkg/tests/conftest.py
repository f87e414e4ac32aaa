import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from volgrowth.system import CAT_MAP, T3_CENTER, T3_COMPLEX, make_linear_toral, make_perturbed_toral

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

LINEAR = {"cat": CAT_MAP, "t3-center": T3_CENTER, "t3-complex": T3_COMPLEX}
UNSTABLE_DIM = {"cat": 1, "t3-center": 1, "t3-complex": 2}


@pytest.fixture(scope="session")
def cat():
    return make_linear_toral(CAT_MAP)


@pytest.fixture(scope="session")
def t3_center():
    return make_linear_toral(T3_CENTER)


@pytest.fixture(scope="session")
def t3_complex():
    return make_linear_toral(T3_COMPLEX)


@pytest.fixture(scope="session")
def perturbed_cat():
    return make_perturbed_toral(CAT_MAP, [{"amplitude": 0.05, "target": 0, "k": [1, 0]}])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_criteria: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or report.outcome != "passed":
        _criteria.setdefault(report.nodeid.split("::")[-1], report.outcome)
        if report.outcome != "passed":
            _criteria[report.nodeid.split("::")[-1]] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for name, outcome in sorted(_criteria.items(), key=lambda kv: int(kv[0].split("_")[1])):
        terminalreporter.write_line(f"{'PASS' if outcome == 'passed' else 'FAIL'}  {name}")
