"""Domain types and validation for the collaborative-rating toolkit.

Two families of records live here: the constants and inputs of the
story-vote model (minute resolution) and of the user-rank model (week
resolution), plus the observation tuple used by the friend-voting
significance test.  Every record checks its invariants on construction and
is frozen afterwards, so validated instances can be shared freely between
concurrent runs.

Records also serialize to a plain ``key = value`` text format (one field
per line, ``#`` starts a comment).  The CLI composes the same lines into
per-model sections; see :mod:`frontpage.cli` for the section layout.
"""

from __future__ import annotations

import dataclasses
import math
import numbers
from dataclasses import dataclass, fields
from typing import Mapping, Union

import numpy as np

__all__ = [
    "ParameterError",
    "VoteModelParams",
    "StoryConfig",
    "VoteTrajectory",
    "FixedThreshold",
    "NetworkProportional",
    "PromotionPolicy",
    "RankModelParams",
    "UserState",
    "FriendVoteObservation",
    "validate_params",
    "to_config_text",
    "parse_config_text",
    "record_from_mapping",
]


class ParameterError(ValueError):
    """One or more invariants are violated.

    The message lists *every* violation, each naming the offending field
    and the bound it broke.
    """


def _raise_if(violations: list[str]) -> None:
    if violations:
        raise ParameterError("; ".join(violations))


def _is_integral(value) -> bool:
    if isinstance(value, bool):
        return False
    if isinstance(value, numbers.Integral):
        return True
    return (
        isinstance(value, numbers.Real)
        and math.isfinite(value)
        and float(value).is_integer()
    )


def _finite(value) -> bool:
    try:
        return math.isfinite(value)
    except TypeError:
        return False


@dataclass(frozen=True)
class VoteModelParams:
    """Constants of the story-vote model.

    All rates are per minute.  The stock values are the fitted site-wide
    constants; only the story-specific inputs (interestingness and the
    submitter's network) change from one submission to the next.
    """

    c: float = 0.3              # share of visitors who browse the upcoming section
    c_u: float = 0.3            # fraction proceeding from one upcoming page to the next
    c_f: float = 0.3            # fraction proceeding from one front page to the next
    visit_rate_N: float = 10.0  # site visitors per minute
    threshold_h: int = 40       # votes required by the fixed promotion rule
    k_u: float = 0.060          # upcoming-queue page drift, pages/minute
    k_f: float = 0.003          # front-page drift, pages/minute
    sm_alpha: float = 112.0     # voter-network growth law: alpha * log(m) + beta
    sm_beta: float = 47.0
    sm_log_base: float = math.e  # base of the voter-network logarithm
    upcoming_window: float = 1440.0  # minutes a story stays in the upcoming queue
    friends_window: float = 2880.0   # minutes a story stays in the friends interface
    dt: float = 1.0             # integration step, minutes

    def __post_init__(self) -> None:
        _raise_if(self._violations())

    def _violations(self) -> list[str]:
        bad: list[str] = []
        if not (_finite(self.c) and 0.0 < self.c <= 1.0):
            bad.append(f"c must be in (0, 1], got {self.c}")
        if not (_finite(self.c_u) and 0.0 < self.c_u < 1.0):
            bad.append(f"c_u must be in (0, 1), got {self.c_u}")
        if not (_finite(self.c_f) and 0.0 < self.c_f < 1.0):
            bad.append(f"c_f must be in (0, 1), got {self.c_f}")
        if not (_finite(self.visit_rate_N) and self.visit_rate_N > 0.0):
            bad.append(f"visit_rate_N must be > 0, got {self.visit_rate_N}")
        if not _is_integral(self.threshold_h) or self.threshold_h < 2:
            bad.append(
                f"threshold_h must be an integer >= 2 (a story starts with the "
                f"submitter's own vote), got {self.threshold_h}"
            )
        if not (_finite(self.k_u) and self.k_u > 0.0):
            bad.append(f"k_u must be > 0, got {self.k_u}")
        if not (_finite(self.k_f) and self.k_f >= 0.0):
            bad.append(f"k_f must be >= 0, got {self.k_f}")
        if not (_finite(self.sm_alpha) and self.sm_alpha >= 0.0):
            bad.append(f"sm_alpha must be >= 0, got {self.sm_alpha}")
        if not (_finite(self.sm_beta) and self.sm_beta >= 0.0):
            bad.append(f"sm_beta must be >= 0, got {self.sm_beta}")
        if not (
            _finite(self.sm_log_base)
            and self.sm_log_base > 0.0
            and self.sm_log_base != 1.0
        ):
            bad.append(f"sm_log_base must be positive and != 1, got {self.sm_log_base}")
        if not (_finite(self.upcoming_window) and self.upcoming_window > 0.0):
            bad.append(f"upcoming_window must be > 0, got {self.upcoming_window}")
        if not (_finite(self.friends_window) and self.friends_window > 0.0):
            bad.append(f"friends_window must be > 0, got {self.friends_window}")
        elif _finite(self.upcoming_window) and not (
            self.upcoming_window < self.friends_window
        ):
            bad.append(
                f"upcoming_window ({self.upcoming_window}) must be shorter than "
                f"friends_window ({self.friends_window})"
            )
        if not (_finite(self.dt) and self.dt > 0.0):
            bad.append(f"dt must be > 0, got {self.dt}")
        return bad


@dataclass(frozen=True)
class StoryConfig:
    """A single story's inputs: how interesting it is and who submitted it."""

    interestingness_r: float      # probability a viewer votes on the story
    submitter_network_S: int = 0  # submitter's reverse friends

    def __post_init__(self) -> None:
        _raise_if(self._violations())

    def _violations(self) -> list[str]:
        bad: list[str] = []
        if not (_finite(self.interestingness_r) and 0.0 <= self.interestingness_r <= 1.0):
            bad.append(
                f"interestingness_r must be in [0, 1], got {self.interestingness_r}"
            )
        if not _is_integral(self.submitter_network_S) or self.submitter_network_S < 0:
            bad.append(
                f"submitter_network_S must be a non-negative integer, "
                f"got {self.submitter_network_S}"
            )
        return bad


@dataclass(frozen=True)
class VoteTrajectory:
    """A story's vote history on a fixed time grid.

    ``votes_m`` is float-valued for mean-field runs and integer-valued for
    stochastic ones; either way it starts at the submitter's own vote and
    never decreases.  ``promotion_time_Th`` is the end of the step in
    which the promotion policy first fired, or None if it never did.
    """

    times: np.ndarray
    votes_m: np.ndarray
    promotion_time_Th: float | None = None

    def __post_init__(self) -> None:
        t = np.asarray(self.times, dtype=float)
        m = np.asarray(self.votes_m)
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "votes_m", m)
        bad: list[str] = []
        if t.ndim != 1 or t.size == 0:
            bad.append("times must be a non-empty 1-d array")
        elif m.shape != t.shape:
            bad.append(f"votes_m shape {m.shape} does not match times shape {t.shape}")
        else:
            if np.any(np.diff(t) <= 0):
                bad.append("times must be strictly increasing")
            if m[0] != 1:
                bad.append(f"votes_m must start at 1 (submitter's vote), got {m[0]}")
            if np.any(np.diff(m) < 0):
                bad.append("votes_m must be nondecreasing")
        if self.promotion_time_Th is not None and not _finite(self.promotion_time_Th):
            bad.append(
                f"promotion_time_Th must be finite or None, got {self.promotion_time_Th}"
            )
        _raise_if(bad)

    @property
    def final_votes(self):
        """Vote count at the end of the horizon."""
        return self.votes_m[-1].item()


@dataclass(frozen=True)
class FixedThreshold:
    """Promote once the vote count reaches a site-wide constant."""

    h: int = 40

    def __post_init__(self) -> None:
        _raise_if(self._violations())

    def _violations(self) -> list[str]:
        if not _is_integral(self.h) or self.h < 2:
            return [
                f"h must be an integer >= 2 (a story starts with one vote), got {self.h}"
            ]
        return []


@dataclass(frozen=True)
class NetworkProportional:
    """Promote once votes reach ``factor`` times the submitter's network size.

    Scaling the bar with the network keeps low-interest stories off the
    front page even when the submitter's reverse friends vote early and
    often.
    """

    factor: float = 1.5

    def __post_init__(self) -> None:
        _raise_if(self._violations())

    def _violations(self) -> list[str]:
        if not (_finite(self.factor) and self.factor > 0.0):
            return [f"factor must be > 0, got {self.factor}"]
        return []


PromotionPolicy = Union[FixedThreshold, NetworkProportional]


@dataclass(frozen=True)
class RankModelParams:
    """Constants of the weekly front-page / social-network model."""

    a: float = 0.03        # reverse friends per front-page story per week (standing)
    b: float = 1.0         # reverse friends gained per newly promoted story
    c_success: float = 0.002  # success rate per reverse friend
    dt_weeks: float = 1.0  # integration step, weeks

    def __post_init__(self) -> None:
        _raise_if(self._violations())

    def _violations(self) -> list[str]:
        bad: list[str] = []
        for name in ("a", "b", "c_success"):
            value = getattr(self, name)
            if not (_finite(value) and value >= 0.0):
                bad.append(f"{name} must be >= 0, got {value}")
        if not (_finite(self.dt_weeks) and self.dt_weeks > 0.0):
            bad.append(f"dt_weeks must be > 0, got {self.dt_weeks}")
        return bad


@dataclass(frozen=True)
class UserState:
    """A user's evolving state in the rank model.

    Front-page count and network size are real-valued in the model
    (fractional weekly increments accumulate); round only for display.
    """

    front_page_F: float       # cumulative stories promoted to the front page
    network_S: float          # reverse friends
    submission_rate_M: float  # stories submitted per week

    def __post_init__(self) -> None:
        _raise_if(self._violations())

    def _violations(self) -> list[str]:
        bad: list[str] = []
        for name in ("front_page_F", "network_S", "submission_rate_M"):
            value = getattr(self, name)
            if not (_finite(value) and value >= 0.0):
                bad.append(f"{name} must be >= 0, got {value}")
        return bad


@dataclass(frozen=True)
class FriendVoteObservation:
    """One story's voter sample for the chance-probability test.

    Of ``sample_n`` voters drawn from a pool of ``pool_N`` users,
    ``overlap_k`` belonged to the submitter's group of ``group_K``
    reverse friends.
    """

    pool_N: int
    sample_n: int
    group_K: int
    overlap_k: int

    def __post_init__(self) -> None:
        _raise_if(self._violations())

    def _violations(self) -> list[str]:
        bad: list[str] = []
        for name in ("pool_N", "sample_n", "group_K", "overlap_k"):
            if not _is_integral(getattr(self, name)):
                bad.append(f"{name} must be an integer, got {getattr(self, name)}")
        if bad:
            return bad
        if self.pool_N < 1:
            bad.append(f"pool_N must be >= 1, got {self.pool_N}")
        if not 0 <= self.sample_n <= self.pool_N:
            bad.append(
                f"sample_n must be in [0, pool_N], got {self.sample_n} "
                f"with pool_N={self.pool_N}"
            )
        if not 0 <= self.group_K <= self.pool_N:
            bad.append(
                f"group_K must be in [0, pool_N], got {self.group_K} "
                f"with pool_N={self.pool_N}"
            )
        if not 0 <= self.overlap_k <= min(self.sample_n, self.group_K):
            bad.append(
                f"overlap_k must be in [0, min(sample_n, group_K)], "
                f"got {self.overlap_k}"
            )
        return bad


def validate_params(params):
    """Re-check an already constructed record.

    Returns ``params`` unchanged when every invariant holds; raises
    :class:`ParameterError` listing all violations otherwise.
    """
    _raise_if(params._violations())
    return params


# --- key = value serialization ---------------------------------------------

def _parse_int(raw: str) -> int:
    try:
        return int(raw)
    except ValueError:
        value = float(raw)  # may raise again; caller reports the key
        if not value.is_integer():
            raise ValueError(f"{raw!r} is not an integer") from None
        return int(value)


_CASTERS = {"int": _parse_int, "float": float}


def to_config_text(record) -> str:
    """Render a record as one ``key = value`` line per field."""
    return "".join(
        f"{f.name} = {getattr(record, f.name)!r}\n" for f in fields(record)
    )


def parse_config_text(text: str) -> dict[str, str]:
    """Parse ``key = value`` lines into a string mapping.

    ``#`` starts a comment (full-line or trailing); blank lines are
    ignored.  Malformed lines raise :class:`ParameterError` with the line
    number.
    """
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ParameterError(
                f"line {lineno}: expected 'key = value', got {raw.strip()!r}"
            )
        out[key] = value.strip()
    return out


def record_from_mapping(cls, mapping: Mapping[str, str]):
    """Build a record from string values, coercing per field type.

    Unknown keys and unparseable values raise :class:`ParameterError`
    naming the key; omitted keys fall back to the record's defaults.
    """
    known = {f.name: f for f in fields(cls)}
    unknown = sorted(set(mapping) - set(known))
    if unknown:
        raise ParameterError(
            f"unknown key(s) for {cls.__name__}: {', '.join(unknown)}"
        )
    kwargs = {}
    for key, raw in mapping.items():
        caster = _CASTERS[known[key].type]
        try:
            kwargs[key] = caster(str(raw).strip())
        except ValueError:
            raise ParameterError(
                f"{key}: cannot parse {raw!r} as {known[key].type}"
            ) from None
    required = [
        f.name
        for f in fields(cls)
        if f.default is dataclasses.MISSING
        and f.default_factory is dataclasses.MISSING
        and f.name not in kwargs
    ]
    if required:
        raise ParameterError(
            f"missing required key(s) for {cls.__name__}: {', '.join(required)}"
        )
    return cls(**kwargs)
