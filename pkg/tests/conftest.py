import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    for name, mod in sys.modules.items():
        if name.rsplit(".", 1)[-1] == "test_acceptance" and mod is not None:
            lines = getattr(mod, "RESULT_LINES", None)
            if lines:
                terminalreporter.section("acceptance criteria")
                for line in lines:
                    terminalreporter.write_line(line)
            return
