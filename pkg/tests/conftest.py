import math

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def pi3():
    return math.pi / 3


class _Criterion:
    def __init__(self, number, title):
        self.number, self.title = number, title
        self.ok, self.details = True, []

    def check(self, condition, detail):
        self.ok = self.ok and bool(condition)
        self.details.append(detail)

    def line(self):
        status = "PASS" if self.ok else "FAIL"
        return f"criterion {self.number} [{status}] {self.title}: " + "; ".join(self.details)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Context manager recording one acceptance criterion's pass/fail line."""
    from contextlib import contextmanager

    @contextmanager
    def _run(number, title):
        c = _Criterion(number, title)
        try:
            yield c
        except Exception as exc:
            c.check(False, f"raised {type(exc).__name__}: {exc}")
            raise
        finally:
            ACCEPTANCE_LINES.append(c.line())
            print(c.line())
        assert c.ok, c.line()

    return _run


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
