import os
import sys
from pathlib import Path

import pytest

from duallabor import scenario
from duallabor.market import ModelParams, default_forms

sys.path.insert(0, os.path.dirname(__file__))

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def params():
    return ModelParams()


@pytest.fixture
def forms(params):
    return default_forms(params)


@pytest.fixture
def asym():
    """Concentrated abilities, strong feedback, wage pinned; B starts behind."""
    return scenario.load(FIXTURES / "asym.cfg")


@pytest.fixture
def asym_percapita():
    return scenario.load(FIXTURES / "asym_percapita.cfg")


@pytest.fixture
def parity_scn():
    return scenario.load(FIXTURES / "parity.cfg")


ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def acceptance_log(request):
    """Collects one (criterion, passed, detail) line per acceptance check."""
    return request.config.stash.setdefault(ACCEPTANCE, [])


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for k, ok, detail in sorted(lines):
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'}  {detail}")
