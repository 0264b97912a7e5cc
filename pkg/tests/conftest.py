import sys


def pytest_terminal_summary(terminalreporter):
    """Repeat the acceptance lines, which pytest captures while the checks run."""
    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        ok, detail = results[number]
        name = mod.CHECKS[number][0]
        terminalreporter.write_line(
            f"criterion {number:2d} {name}: {'PASS' if ok else 'FAIL'} ({detail})")
