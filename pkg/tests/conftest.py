import pytest

from sixtorsion.cubic.fields import field_table

# criterion id -> list of (label, ok, detail), filled by the acceptance suite
ACCEPTANCE: dict[str, list[tuple[str, bool, str]]] = {}


def report(criterion: str, label: str, ok: bool, detail: str) -> None:
    ACCEPTANCE.setdefault(criterion, []).append((label, bool(ok), detail))
    print(f"{'PASS' if ok else 'FAIL'} criterion {criterion}{label}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(ACCEPTANCE, key=int):
        parts = ACCEPTANCE[crit]
        ok = all(p[1] for p in parts)
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {crit}")
        for label, good, detail in parts:
            terminalreporter.write_line(f"    {'PASS' if good else 'FAIL'} {crit}{label}: {detail}")


@pytest.fixture(scope="session")
def fields_1e4():
    return field_table(10**4)


@pytest.fixture(scope="session")
def fields_1e5():
    return field_table(10**5)


@pytest.fixture(scope="session")
def fields_1e6():
    return field_table(10**6)
