import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from pitchanchor.control import AnchorGains, TemplateParams  # noqa: E402
from pitchanchor.dynamics import InertiaModel  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


def record(criterion: str, passed: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def inert():
    return InertiaModel()


@pytest.fixture
def gains():
    return AnchorGains()


@pytest.fixture
def template():
    return TemplateParams()


@pytest.fixture
def unit_inertia():
    return InertiaModel((1.0, 1.0, 1.0), 1.0)


HALF_PI = math.pi / 2
