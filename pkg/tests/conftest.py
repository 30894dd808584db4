import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import settings

from uccvqe.integrals import read_fcidump

DATA = Path(__file__).parent / "data"

settings.register_profile("deterministic", derandomize=True, print_blob=True)
settings.load_profile("deterministic")


@pytest.fixture(scope="session")
def refs():
    return json.loads((DATA / "reference_values.json").read_text())


@pytest.fixture(scope="session")
def h2():
    return read_fcidump(DATA / "h2_sto3g.fcidump")


@pytest.fixture(scope="session")
def h4():
    return read_fcidump(DATA / "h4_chain_sto3g.fcidump")


@pytest.fixture(scope="session")
def lih():
    return read_fcidump(DATA / "lih_sto3g.fcidump")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
