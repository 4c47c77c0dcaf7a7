import numpy as np
import pytest

from swfair.setfn import BitPoolSource, GroundSet, WeightVector


@pytest.fixture
def three_users():
    """The independent-bits demo model: three users over four shared bits.

    Hand-computed entropies (bits a=1, b=c=1/2, d=1/10):
      H{1}=2.0  H{2}=0.6  H{3}=0.6  H{1,2}=2.1  H{1,3}=2.1  H{2,3}=1.1  H(V)=2.1
    """
    ground = GroundSet(["1", "2", "3"])
    return BitPoolSource(
        ground,
        bits={"a": 1.0, "b": 0.5, "c": 0.5, "d": 0.1},
        observes={"1": ["a", "b", "c"], "2": ["c", "d"], "3": ["b", "d"]},
    )


@pytest.fixture
def unit_weights(three_users):
    return WeightVector.ones(three_users.ground)


@pytest.fixture
def skew_weights(three_users):
    return WeightVector(three_users.ground, [3.0, 1.0, 3.0])


def random_bit_pool(rng, n, pool_factor=3, observe_prob=0.3):
    """Small random coverage-entropy instance for property sweeps."""
    n_bits = pool_factor * n
    bits = {"b%d" % j: float(rng.uniform(0.05, 1.0)) for j in range(n_bits)}
    observes = {}
    for i in range(n):
        row = rng.random(n_bits) < observe_prob
        while not row.any():
            row = rng.random(n_bits) < observe_prob
        observes["u%d" % i] = ["b%d" % j for j in np.nonzero(row)[0]]
    ground = GroundSet(["u%d" % i for i in range(n)])
    return BitPoolSource(ground, bits, observes)
