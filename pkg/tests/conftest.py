import pytest

# criterion id -> list of (part, ok, detail); filled by tests/test_acceptance.py
ACCEPTANCE: dict[int, list[tuple[str, bool, str]]] = {}


@pytest.fixture
def record():
    def _record(criterion: int, part: str, ok: bool, detail: str) -> bool:
        ACCEPTANCE.setdefault(criterion, []).append((part, bool(ok), detail))
        print(f"[{'PASS' if ok else 'FAIL'}] criterion {criterion} {part}: {detail}")
        return bool(ok)
    return _record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for cid in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[cid]
        ok = all(p[1] for p in parts)
        detail = "; ".join(f"{name}: {'ok' if good else 'FAILED'} ({d})" for name, good, d in parts)
        tr.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {cid:>2}  {detail}")
