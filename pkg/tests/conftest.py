import pytest

from trapwave import shooting as sh


@pytest.fixture(scope="session")
def gp3_ground():
    """GP ground state in d=3 at b=0.5 (reused by several modules)."""
    return sh.find_state(sh.ProblemSpec("gp", 3.0, b=0.5))


@pytest.fixture(scope="session")
def snh7_state():
    return sh.find_state(sh.ProblemSpec("snh", 7.0, b=1.0))
