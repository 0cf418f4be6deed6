import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


def pytest_terminal_summary(terminalreporter):
    import criteria

    if not criteria.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(criteria.RESULTS):
        terminalreporter.write_line(criteria.line(number, passed, detail))
