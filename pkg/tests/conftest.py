import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20261014)


# acceptance criterion -> [(check, passed, detail)]
ACCEPTANCE: dict = {}


@pytest.fixture
def record():
    def _record(criterion: int, check: str, passed: bool, detail: str = ""):
        ACCEPTANCE.setdefault(criterion, []).append((check, bool(passed), detail))
        print(f"criterion {criterion:2d} [{check}]: {'PASS' if passed else 'FAIL'} {detail}")
        return bool(passed)
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        checks = ACCEPTANCE[n]
        ok = all(p for _, p, _ in checks)
        failed = [c for c, p, _ in checks if not p]
        tail = "" if ok else "  (failed: " + ", ".join(failed) + ")"
        tr.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}{tail}")
