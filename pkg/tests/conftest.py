import json

import pytest

from rilsim.scenario import load_reference, reference_scenario_path

ACCEPTANCE: dict[int, tuple[str, bool, str]] = {}


def record(n: int, name: str, passed: bool, detail: str = "") -> bool:
    ACCEPTANCE[n] = (name, bool(passed), detail)
    return bool(passed)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        name, ok, detail = ACCEPTANCE[n]
        line = f"[{'PASS' if ok else 'FAIL'}] AC{n:<2} {name}"
        terminalreporter.write_line(f"{line}: {detail}" if detail else line)


@pytest.fixture(scope="session")
def reference():
    return load_reference()


@pytest.fixture()
def reference_raw():
    return json.loads(reference_scenario_path().read_text())
