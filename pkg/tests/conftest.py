import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)


@pytest.fixture
def data_dir():
    import qring
    return Path(qring.__file__).parent / "data"


@pytest.fixture
def tests_data_dir():
    return Path(__file__).parent / "data"
