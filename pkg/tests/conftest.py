import numpy as np
import pytest

from aqss.access import parse_access_structure
from aqss.rng import stream

# Overlap graph: two 3-cliques {AB, AC, ADG} and {EG, EF, EH} joined by the
# single cross edge ADG-EG.
TWO_CLIQUES = "{AB, AC, ADG, EG, EF, EH}"


@pytest.fixture
def rng():
    return stream(12345, "tests")


@pytest.fixture
def two_cliques():
    return parse_access_structure(TWO_CLIQUES)


def random_state(d, rng):
    v = rng.normal(size=d) + 1j * rng.normal(size=d)
    return v / np.linalg.norm(v)
