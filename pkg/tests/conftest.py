"""Collect the check suites of the ``*_test_runner.py`` scripts as pytest items.

Each runner exposes a ``SUITE`` of zero-argument checks; every ``CheckCase``
becomes one pytest item. The runners stay runnable as plain scripts.
"""

from __future__ import annotations

import importlib
import sys
from pathlib import Path

import pytest

TESTING_SCRIPTS = Path(__file__).resolve().parent / "testing-scripts"
if str(TESTING_SCRIPTS) not in sys.path:
    sys.path.insert(0, str(TESTING_SCRIPTS))


def pytest_collect_file(parent, file_path):
    if file_path.name.endswith("_test_runner.py") and TESTING_SCRIPTS in file_path.parents:
        return RunnerFile.from_parent(parent, path=file_path)
    return None


class RunnerFile(pytest.File):
    def collect(self):
        relative = self.path.relative_to(TESTING_SCRIPTS).with_suffix("")
        module = importlib.import_module(".".join(relative.parts))
        suite = getattr(module, "SUITE", None)
        if suite is None:
            return
        for case in suite.cases:
            yield CheckItem.from_parent(self, name=case.name, case=case)


class CheckItem(pytest.Item):
    def __init__(self, *, case, **kwargs):
        super().__init__(**kwargs)
        self.case = case

    def runtest(self):
        self.case.run()

    def reportinfo(self):
        return self.path, None, self.name
