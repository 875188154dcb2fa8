import numpy as np
import pytest

from dfbg.core import ModelHistory

# (criterion, status, detail) rows printed at the end of the session
ACCEPTANCE_RESULTS = []


def record(name, ok, detail):
    """Log one criterion outcome; ``ok`` is True, False or None (skipped)."""
    status = "SKIP" if ok is None else ("PASS" if ok else "FAIL")
    ACCEPTANCE_RESULTS.append((name, status, detail))
    print(f"[{status}] {name}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, status, detail in sorted(ACCEPTANCE_RESULTS, key=lambda r: int(r[0].split()[0])):
        terminalreporter.write_line(f"[{status}] {name}: {detail}")


def random_history(rng, size, T, capacity=None):
    h, w = (size, size) if np.isscalar(size) else size
    hist = ModelHistory(capacity or T)
    for _ in range(T):
        hist.append(rng.integers(0, 256, (h, w, 3)).astype(float), rng.random((h, w)))
    return hist


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
