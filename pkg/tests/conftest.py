import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rdsmc.core import DeterministicMap, StochasticMatrix
from rdsmc.rds import RDSMeasure

# The four maps of the 2-state example: identity, swap, both constants.
ALPHA_1 = DeterministicMap((0, 1))
ALPHA_2 = DeterministicMap((1, 0))
ALPHA_3 = DeterministicMap((0, 0))
ALPHA_4 = DeterministicMap((1, 1))


@pytest.fixture
def example4_measure() -> RDSMeasure:
    return RDSMeasure.from_pairs(
        [(ALPHA_1, 0.2), (ALPHA_2, 0.2), (ALPHA_3, 0.3), (ALPHA_4, 0.3)]
    )


@pytest.fixture
def fair_matrix() -> StochasticMatrix:
    return StochasticMatrix([[0.5, 0.5], [0.5, 0.5]])


def example4_markov_source():
    """Markov-driven map drawing for the 2-state example.

    The identity and the swap never follow one another, yet every row keeps
    P(next map fixes state x) = 1/2 for both x, so the one-point motion is
    still the fair chain.  Starting half-and-half on identity/swap preserves
    the symmetry between the two constant maps as well.
    """
    from rdsmc.core import StochasticMatrix as SM
    from rdsmc.simulate import MarkovMapSource

    trans = SM(
        [
            [0.0, 0.0, 0.5, 0.5],
            [0.0, 0.0, 0.5, 0.5],
            [0.2, 0.2, 0.3, 0.3],
            [0.2, 0.2, 0.3, 0.3],
        ]
    )
    return MarkovMapSource(
        (ALPHA_1, ALPHA_2, ALPHA_3, ALPHA_4),
        trans,
        np.array([0.5, 0.5, 0.0, 0.0]),
    )


@pytest.fixture
def rotation3() -> StochasticMatrix:
    """Biased 3-state rotation: 2/3 forward, 1/3 backward, uniform pi."""
    r = np.zeros((3, 3))
    for i in range(3):
        r[i, (i + 1) % 3] = 2.0 / 3.0
        r[i, (i - 1) % 3] = 1.0 / 3.0
    return StochasticMatrix(r)


@pytest.fixture
def two_state() -> StochasticMatrix:
    return StochasticMatrix([[0.7, 0.3], [0.4, 0.6]])
