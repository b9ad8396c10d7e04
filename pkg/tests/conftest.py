import numpy as np
import pytest

from frontpage import FixedThreshold, StoryConfig, VoteModelParams


@pytest.fixture
def default_params():
    return VoteModelParams()


@pytest.fixture
def queue_only_params():
    """Friends channels disabled; with S=0 only the upcoming queue remains."""
    return VoteModelParams(sm_alpha=0.0, sm_beta=0.0)


@pytest.fixture
def unreachable_policy():
    """A threshold no desk-scale scenario reaches; keeps stories in the queue."""
    return FixedThreshold(h=100_000)


@pytest.fixture
def plain_story():
    return StoryConfig(interestingness_r=0.5, submitter_network_S=0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
