import numpy as np
import pytest

from phasescope.grid import AxisSpec, GridSpec
from phasescope.signals import StandardGaussian

# acceptance results collected by tests/test_acceptance.py; printed as a
# one-line-per-criterion table at the end of the run
ACCEPTANCE_LINES: list[str] = []


def record_acceptance(name: str, ok: bool, detail: str) -> None:
    line = f"{name}: {'PASS' if ok else 'FAIL'} ({detail})"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def spec1() -> GridSpec:
    return GridSpec.regular(1, 256, 12.0)


@pytest.fixture(scope="session")
def spec2() -> GridSpec:
    return GridSpec.regular(2, 32, 8.0)


@pytest.fixture(scope="session")
def kspec32() -> GridSpec:
    ax = AxisSpec(32, 6.0)
    return GridSpec((ax, ax.dual()))


@pytest.fixture(scope="session")
def psi0() -> StandardGaussian:
    return StandardGaussian(1)


@pytest.fixture(autouse=True)
def _pinned_epoch(monkeypatch):
    # sidecars and manifests timestamp from this; pin it so byte-level
    # comparisons in tests are stable
    monkeypatch.setenv("SOURCE_DATE_EPOCH", "0")


def angle_set(report, digits: int = 1) -> list[float]:
    w = report.in_directions
    return sorted(
        round(float(np.degrees(np.arctan2(v[1], v[0])) % 360.0), digits) for v in w
    )
