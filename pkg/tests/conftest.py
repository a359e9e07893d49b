import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from fcslab.builders import fixture_q1r3

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("fcslab", deadline=None, max_examples=40, derandomize=True)
settings.load_profile("fcslab")


@pytest.fixture(autouse=True)
def _isolated_cache(tmp_path, monkeypatch):
    monkeypatch.setenv("FCSLAB_CACHE_DIR", str(tmp_path / "cache"))


@pytest.fixture(scope="session")
def q1r3():
    return fixture_q1r3()


@pytest.fixture(scope="session")
def q1r3_free():
    return fixture_q1r3(lam=0.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
