import random
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from spotdiff.scene import FLOOR, ObjectInstance, SceneConfig, SceneGraph, generate_scene, inject_difference  # noqa: E402
from spotdiff.taxonomy import default_taxonomy  # noqa: E402


@pytest.fixture(scope="session")
def tax():
    return default_taxonomy()


def obj(oid, category, color="white", material="wooden", x=1.0, y=1.0, parent=FLOOR, size=(0.5, 0.5, 0.5), z=0.0):
    w, d, h = size
    return ObjectInstance(oid, f"{category}#test", category, color, material, x, y, z, w, d, h, parent)


def scene_of(*objects, bounds=(14.0, 10.0)):
    return SceneGraph(tuple(objects), bounds)


def random_pair(seed, config=SceneConfig()):
    rng = random.Random(seed)
    return inject_difference(generate_scene(config, rng), rng, config)


@pytest.fixture(scope="session")
def pairs():
    return [random_pair(s) for s in range(40)]


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
