import numpy as np
import pytest
from hypothesis import settings

from spvqe.fcidump import read_fcidump
from spvqe.fermion import map_problem, sector_for
from spvqe.scan import fixture_path

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

H2_FILES = ["h2_0.500", "h2_0.735", "h2_1.500", "h2_2.500"]
H3P_FILES = ["h3p_0.900", "h3p_2.000"]
ALL_FILES = H2_FILES + H3P_FILES


def load_ints(name):
    return read_fcidump(fixture_path(f"{name}.fcidump"))


def load_problem(name, mapping="parity_reduced", n_electrons=None):
    ints = load_ints(name)
    sector = sector_for(ints, n_electrons) if mapping == "parity_reduced" else None
    return map_problem(ints, mapping, sector)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def h2():
    return load_problem("h2_0.735")


@pytest.fixture(scope="session")
def h3p():
    return load_problem("h3p_2.000")


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
