import copy
import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from wnslab.kernels import warmup

SCENARIO_DIR = Path(__file__).parent.parent / "scenarios"


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    warmup()


@pytest.fixture(scope="session")
def faultfree_obj():
    with open(SCENARIO_DIR / "faultfree_5node.json") as fh:
        return json.load(fh)


@pytest.fixture()
def scenario_obj(faultfree_obj):
    """Mutable copy of the bundled fault-free scenario object."""
    return copy.deepcopy(faultfree_obj)


def scenario_path(name: str) -> Path:
    return SCENARIO_DIR / name
