import os
import sys

import numpy as np
import pytest
from hypothesis import settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


_LINES = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_LINES] = []


class _Criterion:
    def __init__(self, lines, number, title):
        self.lines, self.number, self.title = lines, number, title
        self.details = []

    def note(self, text):
        self.details.append(text)

    def check(self, cond, text):
        self.note(text)
        assert cond, text

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        status = "PASS" if exc_type is None else "FAIL"
        detail = "; ".join(self.details)
        if exc_type is not None and not isinstance(exc, AssertionError):
            detail = f"{detail}; {exc_type.__name__}: {exc}".lstrip("; ")
        line = f"criterion {self.number} [{status}] {self.title}: {detail}"
        print(line)
        self.lines.append((self.number, line))
        return False


@pytest.fixture
def criterion(request):
    lines = request.config.stash[_LINES]
    return lambda number, title: _Criterion(lines, number, title)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_LINES, [])
    if lines:
        terminalreporter.write_sep("=", "acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
