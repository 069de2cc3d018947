import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from abcpiq import _kernels  # noqa: E402

ACCEPTANCE_LINES = []

BACKENDS = ["numpy"] + (["numba"] if _kernels.HAVE_NUMBA else [])


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
