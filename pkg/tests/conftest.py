import json
import sys
from pathlib import Path as FsPath

import pytest

sys.path.insert(0, str(FsPath(__file__).resolve().parent))

from sfsem import load_chart, load_scenario

CHART_DIR = FsPath(__file__).resolve().parent.parent / "charts"


def chart_file(name: str) -> FsPath:
    return CHART_DIR / f"{name}.json"


def load_example(name: str):
    return load_chart(chart_file(name).read_bytes())


def load_example_scenario(name: str):
    return load_scenario((CHART_DIR / f"{name}.scenario.json").read_bytes())


@pytest.fixture(scope="session")
def washing_chart():
    return load_example("washing_machine")


@pytest.fixture(scope="session")
def washing_scenario():
    return load_example_scenario("washing_machine")


@pytest.fixture
def chart_dir():
    return CHART_DIR


def read_json(path: FsPath):
    return json.loads(path.read_text())
