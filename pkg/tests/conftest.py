import pytest

from polyrank import develop_ball, preset

# lines collected by the acceptance suite, printed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def v01():
    return preset("V0_1")


@pytest.fixture(scope="session")
def ball_v01_3(v01):
    return develop_ball(v01, 3)


@pytest.fixture(scope="session")
def lazy_v01():
    return develop_ball(preset("V0_1"), 60, lazy=True)


@pytest.fixture(scope="session")
def lazy_v02():
    return develop_ball(preset("V0_2"), 40, lazy=True)
