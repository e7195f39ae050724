import warnings

import pytest

from hillspec import construct, cos_potential


@pytest.fixture(scope="session")
def cos():
    return cos_potential()


@pytest.fixture(scope="session")
def construction(cos):
    # the reference construction: lambda0 = 0.5 in the gap of mode 1
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        return construct(0.5, 1, cos, beta=1.0, Z=20.0, h=2e-3)


ACCEPTANCE = {}


@pytest.fixture
def acceptance():
    """Record the outcome of one acceptance criterion for the session summary."""
    return ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[number]
        terminalreporter.write_line(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
