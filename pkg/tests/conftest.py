import numpy as np
import pytest

from pseudoherm.hequiv import extract_coeffs
from pseudoherm.params import PhysicalParams


@pytest.fixture(scope="session")
def coeff_table():
    return extract_coeffs()


@pytest.fixture(scope="session")
def caption_params():
    # m = 1/2, hbar = 1, L = 2, zeta = 1/3
    return PhysicalParams()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    """Repeat the acceptance PASS/FAIL lines at the end of the run."""
    lines = []
    for reports in terminalreporter.stats.values():
        for rep in reports:
            if getattr(rep, "when", None) != "call":
                continue
            lines += [v for k, v in getattr(rep, "user_properties", []) if k == "acceptance"]
    if lines:
        terminalreporter.section("acceptance criteria")
        key = lambda s: int(s.split("criterion")[1].split("(")[0])
        for line in sorted(lines, key=key):
            terminalreporter.write_line(line)
