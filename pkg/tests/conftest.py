import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))


def pytest_terminal_summary(terminalreporter):
    import oracles

    if oracles.ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(oracles.ACCEPTANCE):
            terminalreporter.write_line(line)
