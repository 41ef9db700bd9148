import textwrap

import pytest


def small_config(**overrides):
    """A tension config small enough to run in a few seconds."""
    sections = {
        "scenario": {"type": "tension_uni", "angle": "0 deg"},
        "geometry": {"length": "40 mm", "width": "10 mm", "thickness": "2 mm",
                     "elements": "8, 2, 1", "grip": "5 mm"},
        "loading": {"rate": "1 mm/s", "u_max": "0.3 mm"},
        "solver": {"dt": "0.1 s"},
        "output": {"every": "1"},
    }
    for key, value in overrides.items():
        section, name = key.split("__")
        sections.setdefault(section, {})[name] = value
    out = []
    for section, keys in sections.items():
        out.append(f"[{section}]")
        out.extend(f"{k} = {v}" for k, v in keys.items() if v is not None)
        out.append("")
    return "\n".join(out)


@pytest.fixture
def config_file(tmp_path):
    def make(**overrides):
        path = tmp_path / "case.cfg"
        path.write_text(textwrap.dedent(small_config(**overrides)))
        return path

    return make


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
