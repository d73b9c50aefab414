import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from muspan import kernels  # noqa: E402

DATA = os.path.join(os.path.dirname(__file__), "data")

KERNEL_NAMES = ("kmp_find", "levenshtein", "lcs_length", "best_pair")


@pytest.fixture(params=sorted(kernels.BACKENDS))
def backend(request, monkeypatch):
    """Run the test once per available kernel backend."""
    impl = kernels.BACKENDS[request.param]
    for name in KERNEL_NAMES:
        monkeypatch.setattr(kernels, name, getattr(impl, name))
    return impl


@pytest.fixture
def data_dir():
    return DATA


ACCEPTANCE_RESULTS = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(ACCEPTANCE_RESULTS):
        status = "PASS" if passed is True else "FAIL" if passed is False else "SKIP"
        terminalreporter.write_line(f"{status} criterion {number:>2}: {detail}")
