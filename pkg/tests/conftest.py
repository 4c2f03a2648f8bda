# acceptance verdicts, filled by test_acceptance.report(); printed at session end
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        parts = ACCEPTANCE[num]
        ok = all(p[1] for p in parts)
        detail = "; ".join(f"{name}: {'PASS' if good else 'FAIL'} ({msg})"
                           for name, good, msg in parts)
        terminalreporter.write_line(f"criterion {num}: {'PASS' if ok else 'FAIL'}  {detail}")
