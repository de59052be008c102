import numpy as np
import pytest

from thermomag.spin_algebra import SpinLength

SPIN_SET = (1, 2, 3, 4, 10, 20)  # twoS


@pytest.fixture(params=SPIN_SET, ids=lambda t: f"twoS={t}")
def spin(request):
    return SpinLength(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
