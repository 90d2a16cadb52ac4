import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent))

from socsim import canonical_profile_dir, load_profile_dir  # noqa: E402


@pytest.fixture(scope="session")
def canonical():
    """(graphs, resources) of the bundled 10-task/3-PE fixture."""
    return load_profile_dir(canonical_profile_dir())


@pytest.fixture(scope="session")
def canonical_graph(canonical):
    return canonical[0][0]


@pytest.fixture(scope="session")
def canonical_resources(canonical):
    return canonical[1]
