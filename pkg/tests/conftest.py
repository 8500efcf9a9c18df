import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from conetheta import quadratic_space, validate_frame


@pytest.fixture(scope="session")
def space2():
    """The hyperbolic-plane-like space diag(2, -2)."""
    return quadratic_space([[2, 0], [0, -2]])


@pytest.fixture(scope="session")
def frame2(space2):
    """Canonical genus-1 frame with columns (0,1) and (1,2)."""
    return validate_frame(space2, [[0, 1], [1, 2]])


@pytest.fixture(scope="session")
def space3():
    return quadratic_space([[2, 0, 0], [0, 2, 0], [0, 0, -2]])


@pytest.fixture(scope="session")
def frame3(space3):
    """Genus-2 frame chosen without accidental lattice symmetries."""
    return validate_frame(space3, [[0, 1, 1], [0, 0, 1], [1, 2, 2]])
