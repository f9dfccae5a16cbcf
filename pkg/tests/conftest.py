import os

import pytest
from hypothesis import HealthCheck, settings

from haarproj import integrate

settings.register_profile(
    "default", deadline=None, max_examples=50, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# criterion number -> (title, passed); filled by the acceptance suite
ACCEPTANCE: dict[int, tuple[str, bool]] = {}


@pytest.fixture(autouse=True)
def _single_worker():
    integrate.set_jobs(1)
    yield
    integrate.set_jobs(1)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        title, ok = ACCEPTANCE[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {n:2d}. {title}")
