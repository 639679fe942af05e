import numpy as np
import pytest

from nmems._backend import get_kernels


def _available_backends():
    names = ["python"]
    try:
        get_kernels("cython")
        names.insert(0, "cython")
    except ImportError:
        pass
    return names


@pytest.fixture(params=_available_backends())
def kernels(request):
    return get_kernels(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
