import math

import pytest

# high-precision reference values (mpmath, 30 digits)
PHI_1 = 0.841344746068542949
R_GAP = 0.682689492137085897  # Phi(1) - Phi(-1)
R_GAP_SQ = 0.466064942674392267
PHI_1_SQ = 0.707860981737141015
RGT_1 = 0.216890415241513594
RGT_RGT_1 = 0.0116692993375207279
DECIMATION_1 = 0.662501373678932215
LIMIT_S_21 = 0.254848555193096209  # 3 ln 2 - (9/4) ln(9/4)
LOG_LAMBDA_PLUS_1 = 1.12692801104297250
THREE_LN2 = 3.0 * math.log(2.0)


@pytest.fixture(params=["numba", "numpy"])
def backend(request, monkeypatch):
    from ising_rg import kernels

    if request.param == "numba" and not kernels.HAVE_NUMBA:
        pytest.skip("numba not installed")
    monkeypatch.setenv("ISING_RG_BACKEND", request.param)
    return request.param


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
