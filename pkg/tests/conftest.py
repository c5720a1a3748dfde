import os

import pytest
from hypothesis import HealthCheck, settings, strategies as st

from qdcascade import SystemParams

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=20, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))



@pytest.fixture
def symmetric():
    return SystemParams.from_detunings(0.25, 0.25, 0.0)


@pytest.fixture
def asymmetric():
    return SystemParams.from_detunings(0.25, 0.25, -0.2, Omega_V=0.05)


def params_strategy(max_coupling=0.3):
    """Random but physically sensible systems (all energies in meV)."""
    det = st.floats(-0.5, 0.5, allow_nan=False)
    return st.builds(
        lambda dx, dc, dcx, oh, ov, tau, gxx, mean: SystemParams.from_detunings(
            dx, dc, dcx, Omega_H=oh, Omega_V=ov, exciton_mean=mean, tau_C=tau, Gamma_XX=gxx),
        det, det, det,
        st.floats(0.01, max_coupling), st.floats(0.01, max_coupling),
        st.floats(1.0, 20.0), st.floats(3e-4, 3e-2), st.floats(-1.0, 1.0),
    )


_ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one PASS/FAIL line for the acceptance summary, then assert."""
    def _report(criterion: str, ok: bool, detail: str):
        line = f"{'PASS' if ok else 'FAIL'} criterion {criterion}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line
    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda l: l.split()[2]):
            terminalreporter.write_line(line)
