import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from frontpage import (
    FixedThreshold,
    FriendVoteObservation,
    NetworkProportional,
    ParameterError,
    RankModelParams,
    StoryConfig,
    UserState,
    VoteModelParams,
    VoteTrajectory,
    validate_params,
)
from frontpage.core import parse_config_text, record_from_mapping, to_config_text


def test_golden_defaults():
    v = VoteModelParams()
    assert (v.c, v.c_u, v.c_f) == (0.3, 0.3, 0.3)
    assert v.visit_rate_N == 10.0
    assert v.threshold_h == 40
    assert v.k_u == 0.060
    assert v.k_f == 0.003
    assert (v.sm_alpha, v.sm_beta) == (112.0, 47.0)
    assert v.sm_log_base == math.e
    assert (v.upcoming_window, v.friends_window) == (1440.0, 2880.0)
    assert v.dt == 1.0
    r = RankModelParams()
    assert (r.a, r.b, r.c_success, r.dt_weeks) == (0.03, 1.0, 0.002, 1.0)
    assert NetworkProportional().factor == 1.5
    assert FixedThreshold().h == 40


def test_validate_params_passes_defaults():
    params = VoteModelParams()
    assert validate_params(params) is params
    assert validate_params(RankModelParams()) is not None


@pytest.mark.parametrize(
    "kwargs, fragment",
    [
        ({"c_u": 1.0}, "c_u"),  # saturation diverges at c_u = 1
        ({"c_u": 0.0}, "c_u"),
        ({"c_f": 1.0}, "c_f"),
        ({"c": 0.0}, "c"),
        ({"c": 1.2}, "c"),
        ({"visit_rate_N": 0.0}, "visit_rate_N"),
        ({"threshold_h": 1}, "threshold_h"),  # would promote at the initial vote
        ({"threshold_h": 2.5}, "threshold_h"),
        ({"k_u": 0.0}, "k_u"),
        ({"k_f": -0.1}, "k_f"),
        ({"sm_alpha": -1.0}, "sm_alpha"),
        ({"sm_log_base": 1.0}, "sm_log_base"),
        ({"upcoming_window": 3000.0}, "upcoming_window"),  # exceeds friends_window
        ({"dt": 0.0}, "dt"),
        ({"dt": float("nan")}, "dt"),
    ],
)
def test_vote_params_rejections_name_the_field(kwargs, fragment):
    with pytest.raises(ParameterError, match=fragment):
        VoteModelParams(**kwargs)


def test_error_lists_every_violation():
    with pytest.raises(ParameterError) as exc:
        VoteModelParams(c_u=2.0, visit_rate_N=-1.0, threshold_h=0)
    message = str(exc.value)
    assert "c_u" in message
    assert "visit_rate_N" in message
    assert "threshold_h" in message


def test_story_config_bounds():
    assert StoryConfig(interestingness_r=0.0).submitter_network_S == 0
    assert StoryConfig(interestingness_r=1.0, submitter_network_S=400)
    with pytest.raises(ParameterError, match="interestingness_r"):
        StoryConfig(interestingness_r=1.5)
    with pytest.raises(ParameterError, match="submitter_network_S"):
        StoryConfig(interestingness_r=0.5, submitter_network_S=-3)
    with pytest.raises(ParameterError, match="submitter_network_S"):
        StoryConfig(interestingness_r=0.5, submitter_network_S=2.5)


def test_policy_bounds():
    with pytest.raises(ParameterError, match="h"):
        FixedThreshold(h=1)
    with pytest.raises(ParameterError, match="factor"):
        NetworkProportional(factor=0.0)


def test_rank_and_user_bounds():
    with pytest.raises(ParameterError, match="c_success"):
        RankModelParams(c_success=-0.001)
    with pytest.raises(ParameterError, match="dt_weeks"):
        RankModelParams(dt_weeks=0.0)
    with pytest.raises(ParameterError, match="network_S"):
        UserState(front_page_F=1.0, network_S=-2.0, submission_rate_M=0.0)


def test_trajectory_invariants():
    good = VoteTrajectory(times=[0.0, 1.0, 2.0], votes_m=[1.0, 1.5, 1.5])
    assert good.final_votes == 1.5
    assert good.promotion_time_Th is None
    with pytest.raises(ParameterError, match="start at 1"):
        VoteTrajectory(times=[0.0, 1.0], votes_m=[0.0, 1.0])
    with pytest.raises(ParameterError, match="nondecreasing"):
        VoteTrajectory(times=[0.0, 1.0, 2.0], votes_m=[1.0, 2.0, 1.9])
    with pytest.raises(ParameterError, match="strictly increasing"):
        VoteTrajectory(times=[0.0, 1.0, 1.0], votes_m=[1.0, 1.0, 1.0])


def test_observation_bounds():
    obs = FriendVoteObservation(pool_N=15742, sample_n=215, group_K=120, overlap_k=4)
    assert obs.overlap_k == 4
    with pytest.raises(ParameterError, match="overlap_k"):
        FriendVoteObservation(pool_N=100, sample_n=10, group_K=5, overlap_k=6)
    with pytest.raises(ParameterError, match="sample_n"):
        FriendVoteObservation(pool_N=100, sample_n=101, group_K=5, overlap_k=0)
    with pytest.raises(ParameterError, match="group_K"):
        FriendVoteObservation(pool_N=100, sample_n=10, group_K=101, overlap_k=0)


@given(
    c_u=st.floats(allow_nan=True, allow_infinity=True, width=64),
    k_u=st.floats(allow_nan=True, allow_infinity=True, width=64),
    h=st.one_of(st.integers(min_value=-10, max_value=10**9), st.floats(width=64)),
)
@settings(max_examples=200, deadline=None)
def test_validation_is_total(c_u, k_u, h):
    """Any field combination either validates or raises ParameterError."""
    try:
        params = VoteModelParams(c_u=c_u, k_u=k_u, threshold_h=h)
    except ParameterError:
        return
    assert 0.0 < params.c_u < 1.0
    assert params.k_u > 0.0
    assert params.threshold_h >= 2


def test_config_text_round_trip():
    params = VoteModelParams(c=0.25, threshold_h=50)
    text = to_config_text(params)
    assert "c = 0.25" in text
    assert "threshold_h = 50" in text
    rebuilt = record_from_mapping(VoteModelParams, parse_config_text(text))
    assert rebuilt == params


def test_parse_config_text_comments_and_errors():
    parsed = parse_config_text("# header\n c = 0.3  # inline\n\nk_u = 0.06\n")
    assert parsed == {"c": "0.3", "k_u": "0.06"}
    with pytest.raises(ParameterError, match="line 2"):
        parse_config_text("c = 0.3\nnot a pair\n")


def test_record_from_mapping_errors():
    with pytest.raises(ParameterError, match="unknown key"):
        record_from_mapping(VoteModelParams, {"speed": "1"})
    with pytest.raises(ParameterError, match="cannot parse"):
        record_from_mapping(VoteModelParams, {"c": "fast"})
    with pytest.raises(ParameterError, match="threshold_h"):
        record_from_mapping(VoteModelParams, {"threshold_h": "40.5"})
    with pytest.raises(ParameterError, match="missing required"):
        record_from_mapping(StoryConfig, {"submitter_network_S": "10"})
    story = record_from_mapping(
        StoryConfig, {"interestingness_r": "0.5", "submitter_network_S": "80"}
    )
    assert story == StoryConfig(interestingness_r=0.5, submitter_network_S=80)
