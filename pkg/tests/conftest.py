import pytest

from fpolab.enumeration import bell, bottleneck, full_frame, oneway_l, oneway_r, zz22

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(criterion: int, ok: bool, detail: str) -> None:
    ACCEPTANCE[criterion] = (ok, detail)
    print(f"acceptance {criterion}: {'PASS' if ok else 'FAIL'} {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.fixture
def BELL():
    return bell()


@pytest.fixture
def ONEWAY_L():
    return oneway_l()


@pytest.fixture
def ONEWAY_R():
    return oneway_r()


@pytest.fixture
def TWOWAY():
    return full_frame(2, 2)


@pytest.fixture
def BOTTLENECK():
    return bottleneck(2, 2)


@pytest.fixture
def ZZ1():
    return zz22(1)
