import math

import numpy as np
import pytest

from frontpage import (
    FixedThreshold,
    NetworkProportional,
    StoryConfig,
    VoteModelParams,
)
from frontpage.vote_dynamics import (
    analytic_upcoming_saturation,
    combined_voter_network,
    integrate_votes,
    page_front,
    page_upcoming,
    promotion_threshold_for,
    saturation_time,
    visibility,
)


class TestPagePositions:
    def test_upcoming_initial_and_drift(self, default_params):
        assert page_upcoming(0.0, default_params) == 1.0
        assert page_upcoming(60.0, default_params) == pytest.approx(4.6)
        assert page_upcoming(1000.0, default_params) == pytest.approx(61.0)

    def test_front_zero_before_promotion(self, default_params):
        assert page_front(50.0, 100.0, default_params) == 0.0
        assert page_front(100.0, 100.0, default_params) == 1.0
        assert page_front(1100.0, 100.0, default_params) == pytest.approx(4.0)

    def test_negative_time_rejected(self, default_params):
        with pytest.raises(ValueError):
            page_upcoming(-1.0, default_params)
        with pytest.raises(ValueError):
            page_front(-1.0, 0.0, default_params)


class TestCombinedVoterNetwork:
    def test_intercept_at_single_vote(self):
        assert combined_voter_network(1.0, 112.0, 47.0) == 47.0

    def test_natural_log_growth(self):
        # 112 * ln(10) + 47
        assert combined_voter_network(10.0, 112.0, 47.0) == pytest.approx(
            304.88953041533315
        )

    def test_disabled_channel(self):
        for m in (1.0, 5.0, 1e6):
            assert combined_voter_network(m, 0.0, 0.0) == 0.0

    def test_alternate_base(self):
        assert combined_voter_network(100.0, 112.0, 47.0, log_base=10.0) == (
            pytest.approx(112.0 * 2 + 47.0)
        )

    def test_m_below_one_rejected(self):
        with pytest.raises(ValueError):
            combined_voter_network(0.5, 112.0, 47.0)


class TestVisibility:
    def test_fresh_story_channels(self, default_params):
        v = visibility(0.0, 1.0, StoryConfig(0.5, 0), None, default_params)
        assert v.v_upcoming == pytest.approx(3.0)  # c * N on queue page 1
        assert v.v_front == 0.0
        assert v.v_submitter_friends == 0.0
        assert v.v_voter_friends == pytest.approx(47.0 / 1440.0)

    def test_friends_windows_close(self, default_params):
        story = StoryConfig(0.5, 300)
        v = visibility(2881.0, 5.0, story, None, default_params)
        assert v.v_submitter_friends == 0.0
        assert v.v_voter_friends == 0.0

    def test_submitter_pool_drains_after_a_day(self, default_params):
        story = StoryConfig(0.5, 300)
        before = visibility(1000.0, 5.0, story, None, default_params)
        assert before.v_submitter_friends == pytest.approx(300.0 / 1440.0)
        after = visibility(1500.0, 5.0, story, None, default_params)
        assert after.v_submitter_friends == 0.0

    def test_promotion_switches_page_channels(self, default_params):
        story = StoryConfig(0.5, 0)
        promoted = visibility(100.0, 45.0, story, 100.0, default_params)
        assert promoted.v_upcoming == 0.0
        assert promoted.v_front == pytest.approx(10.0)  # front page 1
        assert promoted.v_voter_friends == 0.0
        waiting = visibility(100.0, 45.0, story, None, default_params)
        assert waiting.v_front == 0.0
        assert waiting.v_upcoming > 0.0

    def test_queue_expires_after_a_day(self, default_params):
        story = StoryConfig(0.5, 0)
        edge = visibility(1440.0, 2.0, story, None, default_params)
        assert edge.v_upcoming > 0.0  # window edge counts as inside
        gone = visibility(1441.0, 2.0, story, None, default_params)
        assert gone.v_upcoming == 0.0

    def test_total_sums_channels(self, default_params):
        v = visibility(10.0, 3.0, StoryConfig(0.5, 50), None, default_params)
        assert v.total == pytest.approx(
            v.v_front + v.v_upcoming + v.v_submitter_friends + v.v_voter_friends
        )


def test_promotion_threshold_for():
    story = StoryConfig(0.5, 160)
    assert promotion_threshold_for(FixedThreshold(h=40), story) == 40.0
    assert promotion_threshold_for(NetworkProportional(1.5), story) == 240.0
    no_network = StoryConfig(0.5, 0)
    assert promotion_threshold_for(NetworkProportional(1.5), no_network) == 2.0


class TestAnalyticSaturation:
    def test_matches_forty_two_r_plus_one(self, default_params):
        value = analytic_upcoming_saturation(1.0, default_params)
        assert 42.0 <= value <= 43.0
        assert analytic_upcoming_saturation(0.5, default_params) == pytest.approx(
            21.8, abs=0.1
        )
        assert analytic_upcoming_saturation(0.0, default_params) == 1.0

    def test_r_out_of_range(self, default_params):
        with pytest.raises(ValueError):
            analytic_upcoming_saturation(1.5, default_params)


class TestIntegrateVotes:
    def test_zero_interest_stays_at_one(self, default_params):
        story = StoryConfig(0.0, 400)
        traj = integrate_votes(story, default_params, FixedThreshold(h=40), 2880.0)
        assert np.all(traj.votes_m == 1.0)
        assert traj.promotion_time_Th is None

    def test_queue_only_matches_closed_form(
        self, queue_only_params, unreachable_policy
    ):
        for r in (0.1, 0.5, 0.9):
            story = StoryConfig(r, 0)
            traj = integrate_votes(story, queue_only_params, unreachable_policy, 2880.0)
            closed = analytic_upcoming_saturation(r, queue_only_params)
            assert traj.final_votes == pytest.approx(closed, rel=0.02)

    def test_big_network_promotes_low_interest(self, queue_only_params):
        story = StoryConfig(0.1, 400)
        traj = integrate_votes(story, queue_only_params, FixedThreshold(h=40), 2880.0)
        assert traj.promotion_time_Th is not None

    def test_design_threshold_blocks_low_interest(self, default_params):
        story = StoryConfig(0.15, 160)
        traj = integrate_votes(
            story, default_params, NetworkProportional(1.5), 7 * 1440.0
        )
        assert traj.promotion_time_Th is None

    def test_monotone_in_time(self, default_params):
        story = StoryConfig(0.7, 120)
        traj = integrate_votes(story, default_params, FixedThreshold(h=40), 2880.0)
        assert np.all(np.diff(traj.votes_m) >= 0)

    def test_monotone_in_r_grid(self, queue_only_params):
        finals, promotions = [], []
        for r in np.arange(0.1, 0.95, 0.1):
            story = StoryConfig(round(float(r), 2), 80)
            traj = integrate_votes(
                story, queue_only_params, FixedThreshold(h=40), 2880.0
            )
            finals.append(traj.final_votes)
            promotions.append(traj.promotion_time_Th)
        assert all(b >= a for a, b in zip(finals, finals[1:]))
        defined = [t for t in promotions if t is not None]
        assert all(b <= a for a, b in zip(defined, defined[1:]))
        # once a story promotes, every more interesting one does too
        first_promoted = next(
            i for i, t in enumerate(promotions) if t is not None
        )
        assert all(t is not None for t in promotions[first_promoted:])

    def test_promotion_crossing_is_tight(self, default_params):
        story = StoryConfig(0.5, 80)
        traj = integrate_votes(story, default_params, FixedThreshold(h=40), 2880.0)
        th = traj.promotion_time_Th
        assert th is not None
        i = int(np.searchsorted(traj.times, th))
        assert traj.votes_m[i] >= 40.0
        assert traj.votes_m[i - 1] < 40.0

    def test_channel_complementarity(self, default_params):
        story = StoryConfig(0.9, 80)
        traj = integrate_votes(story, default_params, FixedThreshold(h=40), 2880.0)
        for k, t in enumerate(traj.times[:-1]):
            v = visibility(
                float(t),
                float(traj.votes_m[k]),
                story,
                traj.promotion_time_Th,
                default_params,
            )
            assert not (v.v_front > 0.0 and v.v_upcoming > 0.0)

    def test_reproducible(self, default_params):
        story = StoryConfig(0.5, 80)
        a = integrate_votes(story, default_params, FixedThreshold(h=40), 2880.0)
        b = integrate_votes(story, default_params, FixedThreshold(h=40), 2880.0)
        assert np.array_equal(a.votes_m, b.votes_m)
        assert a.promotion_time_Th == b.promotion_time_Th

    def test_horizon_must_align_with_dt(self, default_params):
        story = StoryConfig(0.5, 0)
        with pytest.raises(ValueError):
            integrate_votes(story, default_params, FixedThreshold(h=40), 10.5)
        with pytest.raises(ValueError):
            integrate_votes(story, default_params, FixedThreshold(h=40), 0.0)


def test_saturation_time_detects_stalling(queue_only_params, unreachable_policy):
    story = StoryConfig(0.5, 0)
    traj = integrate_votes(story, queue_only_params, unreachable_policy, 1440.0)
    t_sat = saturation_time(traj)
    assert t_sat is not None
    # the queue decays with a ~14 min time constant, so votes stall well
    # before the day is out
    assert 0.0 < t_sat < 1440.0
    growing = integrate_votes(
        StoryConfig(0.9, 400), VoteModelParams(), FixedThreshold(h=40), 720.0
    )
    assert saturation_time(growing) is None
