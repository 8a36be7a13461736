import random

import pytest

from aelab.algebra import GF256
from aelab.params import generate_params
from aelab.protocol import keygen_tag

PARAMS_SEED = 20240809


@pytest.fixture(scope="session")
def field():
    return GF256.get()


@pytest.fixture(scope="session")
def params10():
    return generate_params(10, random.Random(PARAMS_SEED))


@pytest.fixture(scope="session")
def tag10(params10):
    return keygen_tag(params10, random.Random(99))
