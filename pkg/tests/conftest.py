import math

import numpy as np
import pytest

from entdist.state import BasisKet, Frequency, PhotonKet, Polarization, StateVector

H, V = Polarization.H, Polarization.V
W0, W1, W2 = Frequency.W0, Frequency.W1, Frequency.W2
S = 1 / math.sqrt(2)


def ket(*photons, probes=()):
    """ket(("H", "W1", "a"), ("V", "W2", "b"))"""
    return BasisKet(
        tuple(PhotonKet(Polarization[p], Frequency[f], m) for p, f, m in photons),
        tuple(probes),
    )


def state(*pairs):
    return StateVector(list(pairs))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def source():
    """Anticorrelated-frequency pair, both photons H."""
    return state(
        (ket(("H", "W1", "a"), ("H", "W2", "b")), S),
        (ket(("H", "W2", "a"), ("H", "W1", "b")), S),
    )
