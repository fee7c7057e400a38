import numpy as np
import pytest

ACCEPTANCE: dict[str, str] = {}


def record(key: str, ok: bool, detail: str) -> bool:
    line = f"criterion {key}: {'PASS' if ok else 'FAIL'} - {detail}"
    ACCEPTANCE[key] = line
    print(line)
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: (int("".join(c for c in k if c.isdigit())), k)):
        terminalreporter.write_line(ACCEPTANCE[key])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
