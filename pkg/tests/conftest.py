import math

import pytest

from etbell.phys_model import PhaseConfig

SQRT2 = math.sqrt(2.0)
P_QUANTUM = (2 + SQRT2) / 4


@pytest.fixture
def optimal_phases():
    return PhaseConfig.optimal()


def binomial_sigma(p, n):
    return math.sqrt(p * (1 - p) / n)
