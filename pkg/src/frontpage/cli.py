"""Config-driven scenario runner.

Subcommands
    simulate votes   deterministic vote trajectory (CSV ``t,m``)
    simulate rank    weekly rank model (CSV ``week,F,S,rank_proxy``)
    ensemble         stochastic ensemble; mean trajectory + summary stats
    fit linear|log|success   least-squares fits over ingested CSV data
    significance     friend-voting chance probabilities per observation
    compare          model trajectory vs. an observed trace

Scenario configs are INI-style: sections ``[vote] [story] [policy] [rank]
[user] [ensemble] [run]`` whose keys mirror the parameter-record field
names exactly.  ``--sweep SECTION.KEY=V1,V2,...`` (repeatable; cross
product) fans one scenario out over a parameter grid; outputs are keyed
by the swept values.

Every command writes a ``summary.json`` embedding the fully resolved
parameters and tool version, so a run is reproducible from its outputs.
Outputs are deterministic byte for byte: no timestamps, no absolute
paths, sorted JSON keys, write-then-rename per file.

Exit codes: 0 success; 2 invalid config or command line; 3 unreadable or
malformed input data; 4 unwritable output.
"""

from __future__ import annotations

import argparse
import configparser
import copy
import csv
import dataclasses
import io
import itertools
import json
import math
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .core import (
    FixedThreshold,
    FriendVoteObservation,
    NetworkProportional,
    ParameterError,
    RankModelParams,
    StoryConfig,
    UserState,
    VoteModelParams,
    VoteTrajectory,
    record_from_mapping,
)
from .fitting import (
    chance_probability,
    fit_linear,
    fit_log,
    success_rate_series,
)
from .rank_dynamics import integrate_rank, rank_proxy
from .stochastic_sim import StochasticRunConfig, ensemble
from .vote_dynamics import (
    integrate_votes,
    promotion_threshold_for,
    saturation_time,
)

__all__ = [
    "CliError",
    "ConfigError",
    "InputError",
    "OutputError",
    "Scenario",
    "TraceRecord",
    "ComparisonReport",
    "ingest_traces",
    "group_trace",
    "compare_model_to_trace",
    "run_scenario",
    "main",
]

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INPUT = 3
EXIT_OUTPUT = 4

_SECTIONS = ("vote", "story", "policy", "rank", "user", "ensemble", "run")
_TRACE_HEADER = ["id", "t", "value"]
_USERS_HEADER = ["id", "submissions", "front_page_F", "network_S"]
_OBS_HEADER = ["id", "pool_N", "sample_n", "group_K", "overlap_k"]


class CliError(Exception):
    exit_code = EXIT_CONFIG


class ConfigError(CliError):
    """Invalid or inconsistent scenario configuration."""

    exit_code = EXIT_CONFIG


class InputError(CliError):
    """Missing, unreadable, or schema-violating input data."""

    exit_code = EXIT_INPUT


class OutputError(CliError):
    """Output directory or file cannot be written."""

    exit_code = EXIT_OUTPUT


# --- config loading --------------------------------------------------------

def load_config(path: Path) -> dict[str, dict[str, str]]:
    """Read an INI scenario file into {section: {key: raw value}}."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    parser = configparser.ConfigParser(
        interpolation=None,
        inline_comment_prefixes=("#",),
        delimiters=("=",),
    )
    parser.optionxform = str  # keys are case-sensitive field names
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(f"config {path}: {exc}") from None
    unknown = sorted(set(parser.sections()) - set(_SECTIONS))
    if unknown:
        raise ConfigError(
            f"config {path}: unknown section(s) {', '.join(unknown)}; "
            f"expected {', '.join(_SECTIONS)}"
        )
    return {s: dict(parser.items(s)) for s in parser.sections()}


def _build_record(cls, cfg: dict[str, dict[str, str]], section: str):
    try:
        return record_from_mapping(cls, cfg.get(section, {}))
    except ParameterError as exc:
        raise ConfigError(f"[{section}] {exc}") from None


def _build_policy(cfg: dict[str, dict[str, str]]):
    section = dict(cfg.get("policy", {}))
    kind = section.pop("kind", "fixed")
    try:
        if kind == "fixed":
            return record_from_mapping(FixedThreshold, section)
        if kind == "network_proportional":
            return record_from_mapping(NetworkProportional, section)
    except ParameterError as exc:
        raise ConfigError(f"[policy] {exc}") from None
    raise ConfigError(
        f"[policy] kind must be 'fixed' or 'network_proportional', got {kind!r}"
    )


@dataclass(frozen=True)
class RunOptions:
    horizon_minutes: float = 2880.0
    weeks: int = 25
    rank_kappa: float = 1.0
    M_schedule: tuple[float, ...] | None = None


def _parse_run_section(cfg: dict[str, dict[str, str]]) -> RunOptions:
    section = dict(cfg.get("run", {}))
    known = {"horizon_minutes", "weeks", "rank_kappa", "M_schedule"}
    unknown = sorted(set(section) - known)
    if unknown:
        raise ConfigError(f"[run] unknown key(s): {', '.join(unknown)}")
    try:
        horizon = float(section.get("horizon_minutes", 2880.0))
        weeks = int(section.get("weeks", 25))
        kappa = float(section.get("rank_kappa", 1.0))
        schedule = None
        if "M_schedule" in section:
            schedule = tuple(
                float(v) for v in section["M_schedule"].split(",") if v.strip()
            )
            if not schedule:
                raise ValueError("M_schedule is empty")
    except ValueError as exc:
        raise ConfigError(f"[run] {exc}") from None
    if not (math.isfinite(horizon) and horizon > 0):
        raise ConfigError(f"[run] horizon_minutes must be > 0, got {horizon}")
    if weeks < 1:
        raise ConfigError(f"[run] weeks must be >= 1, got {weeks}")
    if not (math.isfinite(kappa) and kappa > 0):
        raise ConfigError(f"[run] rank_kappa must be > 0, got {kappa}")
    return RunOptions(
        horizon_minutes=horizon, weeks=weeks, rank_kappa=kappa, M_schedule=schedule
    )


@dataclass(frozen=True)
class EnsembleOptions:
    runs: int = 100
    seed: int = 0
    arrival_mode: str = "poisson"


def _parse_ensemble_section(
    cfg: dict[str, dict[str, str]], seed_override: int | None
) -> EnsembleOptions:
    section = dict(cfg.get("ensemble", {}))
    known = {"runs", "seed", "arrival_mode"}
    unknown = sorted(set(section) - known)
    if unknown:
        raise ConfigError(f"[ensemble] unknown key(s): {', '.join(unknown)}")
    try:
        runs = int(section.get("runs", 100))
        seed = int(section.get("seed", 0))
    except ValueError as exc:
        raise ConfigError(f"[ensemble] {exc}") from None
    mode = section.get("arrival_mode", "poisson")
    if seed_override is not None:
        seed = seed_override
    return EnsembleOptions(runs=runs, seed=seed, arrival_mode=mode)


# --- sweeps ----------------------------------------------------------------

def parse_sweeps(specs: list[str]) -> list[tuple[str, str, list[str]]]:
    """Parse ``SECTION.KEY=V1,V2,...`` flags into (section, key, values)."""
    sweeps = []
    for spec in specs:
        name, sep, raw_values = spec.partition("=")
        if not sep:
            raise ConfigError(f"sweep {spec!r}: expected SECTION.KEY=V1,V2,...")
        section, dot, key = name.strip().partition(".")
        if not dot or not section or not key:
            raise ConfigError(
                f"sweep {spec!r}: key must be qualified as SECTION.KEY"
            )
        if section not in _SECTIONS:
            raise ConfigError(
                f"sweep {spec!r}: unknown section {section!r}; "
                f"expected one of {', '.join(_SECTIONS)}"
            )
        values = [v.strip() for v in raw_values.split(",") if v.strip()]
        if not values:
            raise ConfigError(f"sweep {spec!r}: empty value list")
        sweeps.append((section, key, values))
    return sweeps


def expand_sweeps(
    cfg: dict[str, dict[str, str]],
    sweeps: list[tuple[str, str, list[str]]],
) -> list[tuple[dict[str, str], dict[str, dict[str, str]]]]:
    """Cross product of sweep values; yields (overrides, patched config)."""
    if not sweeps:
        return [({}, cfg)]
    combos = []
    for values in itertools.product(*(vals for _, _, vals in sweeps)):
        patched = copy.deepcopy(cfg)
        overrides = {}
        for (section, key, _), value in zip(sweeps, values):
            patched.setdefault(section, {})[key] = value
            overrides[f"{section}.{key}"] = value
        combos.append((overrides, patched))
    return combos


def _suffix_for(overrides: dict[str, str]) -> str:
    if not overrides:
        return ""
    parts = []
    for qualified, value in overrides.items():
        key = qualified.split(".", 1)[1]
        parts.append(f"{key}={value.replace('/', '-')}")
    return "_" + "_".join(parts)


# --- trace ingestion -------------------------------------------------------

@dataclass(frozen=True)
class TraceRecord:
    """One observed point of a story's (or user's) time series."""

    series_id: str
    t: float
    value: float


def _read_rows(path: Path, header: list[str]) -> list[tuple[int, list[str]]]:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise InputError(f"cannot read input {path}: {exc}") from None
    rows = list(csv.reader(io.StringIO(text)))
    rows = [(lineno, row) for lineno, row in enumerate(rows, start=1) if row]
    if not rows:
        raise InputError(f"{path}: empty file")
    first_line, first = rows[0]
    if [c.strip() for c in first] != header:
        raise InputError(
            f"{path}: line {first_line}: expected header {','.join(header)!r}"
        )
    data = rows[1:]
    if not data:
        raise InputError(f"{path}: no data rows")
    for lineno, row in data:
        if len(row) != len(header):
            raise InputError(
                f"{path}: line {lineno}: expected {len(header)} fields, "
                f"got {len(row)}"
            )
    return data


def ingest_traces(path: Path, kind: str = "vote") -> list[TraceRecord]:
    """Parse a ``id,t,value`` CSV trace; time per id must never decrease.

    ``kind`` states the time unit only: "vote" traces are in minutes,
    "rank" traces in week indices.  Violations are reported with their
    line numbers.
    """
    if kind not in ("vote", "rank"):
        raise ValueError(f"kind must be 'vote' or 'rank', got {kind!r}")
    records: list[TraceRecord] = []
    last_t: dict[str, float] = {}
    for lineno, row in _read_rows(path, _TRACE_HEADER):
        series_id = row[0].strip()
        if not series_id:
            raise InputError(f"{path}: line {lineno}: empty id")
        try:
            t = float(row[1])
            value = float(row[2])
        except ValueError:
            raise InputError(
                f"{path}: line {lineno}: t and value must be numbers, "
                f"got {row[1]!r}, {row[2]!r}"
            ) from None
        if not (math.isfinite(t) and t >= 0):
            raise InputError(f"{path}: line {lineno}: t must be finite and >= 0")
        if not math.isfinite(value):
            raise InputError(f"{path}: line {lineno}: value must be finite")
        if series_id in last_t and t < last_t[series_id]:
            raise InputError(
                f"{path}: line {lineno}: time goes backwards for id "
                f"{series_id!r} ({t} after {last_t[series_id]})"
            )
        last_t[series_id] = t
        records.append(TraceRecord(series_id=series_id, t=t, value=value))
    return records


def group_trace(
    records: list[TraceRecord],
) -> dict[str, tuple[np.ndarray, np.ndarray]]:
    """Group records by id (first-appearance order) into (t, value) arrays."""
    by_id: dict[str, list[TraceRecord]] = {}
    for rec in records:
        by_id.setdefault(rec.series_id, []).append(rec)
    return {
        sid: (
            np.array([r.t for r in recs]),
            np.array([r.value for r in recs]),
        )
        for sid, recs in by_id.items()
    }


# --- model-vs-trace comparison ---------------------------------------------

@dataclass(frozen=True)
class ComparisonReport:
    """Goodness of a model trajectory against one observed series."""

    n_overlap: int
    rms_error: float
    promotion_time_model: float | None
    promotion_time_trace: float | None
    promotion_time_difference: float | None  # model minus trace
    final_value_ratio: float | None  # model / trace at last overlapping time


def compare_model_to_trace(
    trace_times: np.ndarray,
    trace_values: np.ndarray,
    trajectory: VoteTrajectory,
    threshold: float | None = None,
) -> ComparisonReport:
    """RMS error on the overlapping time range, plus promotion timing.

    The model is linearly interpolated at the trace's time stamps.  The
    trace's promotion time, when a ``threshold`` is given, is the first
    stamp at which its value reaches the threshold.
    """
    tt = np.asarray(trace_times, dtype=float)
    tv = np.asarray(trace_values, dtype=float)
    mask = (tt >= trajectory.times[0]) & (tt <= trajectory.times[-1])
    if not np.any(mask):
        raise ValueError(
            f"no time overlap: trace spans [{tt.min()}, {tt.max()}], "
            f"model spans [{trajectory.times[0]}, {trajectory.times[-1]}]"
        )
    tt, tv = tt[mask], tv[mask]
    model_at = np.interp(tt, trajectory.times, np.asarray(trajectory.votes_m, float))
    rms = float(np.sqrt(np.mean((model_at - tv) ** 2)))

    promo_trace: float | None = None
    if threshold is not None:
        crossed = np.nonzero(np.asarray(trace_values, float) >= threshold)[0]
        if crossed.size:
            promo_trace = float(np.asarray(trace_times, float)[crossed[0]])
    promo_model = trajectory.promotion_time_Th
    difference = (
        promo_model - promo_trace
        if promo_model is not None and promo_trace is not None
        else None
    )
    ratio = float(model_at[-1] / tv[-1]) if tv[-1] != 0 else None
    return ComparisonReport(
        n_overlap=int(tt.size),
        rms_error=rms,
        promotion_time_model=promo_model,
        promotion_time_trace=promo_trace,
        promotion_time_difference=difference,
        final_value_ratio=ratio,
    )


# --- output rendering ------------------------------------------------------

def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return ""
    return repr(value)


def _csv_text(header: str, rows) -> str:
    lines = [header]
    lines.extend(",".join(_fmt(cell) for cell in row) for row in rows)
    return "\n".join(lines) + "\n"


def _jsonify(value):
    """Convert to plain JSON types; non-finite floats become null."""
    if value is None or isinstance(value, (str, bool)):
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    if isinstance(value, np.ndarray):
        return [_jsonify(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): _jsonify(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonify(v) for v in value]
    raise TypeError(f"cannot serialize {type(value).__name__} to JSON")


def _json_text(doc) -> str:
    return json.dumps(_jsonify(doc), sort_keys=True, indent=2) + "\n"


def _write_outputs(out_dir: Path, outputs: list[tuple[str, str]]) -> None:
    """Write fully rendered outputs, each atomically (write then rename)."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OutputError(f"cannot create output directory {out_dir}: {exc}") from None
    for name, text in outputs:
        target = out_dir / name
        tmp = out_dir / (name + ".tmp")
        try:
            tmp.write_text(text, encoding="utf-8")
            os.replace(tmp, target)
        except OSError as exc:
            raise OutputError(f"cannot write {target}: {exc}") from None


# --- scenario orchestration ------------------------------------------------

@dataclass(frozen=True)
class Scenario:
    """A fully parsed command: what to run, on what, where to put it."""

    kind: str
    config: dict[str, dict[str, str]] = field(default_factory=dict)
    sweeps: tuple = ()
    out_dir: Path = Path(".")
    output_format: str = "csv"
    seed_override: int | None = None
    input_path: Path | None = None
    options: dict = field(default_factory=dict)


def _scenario_doc(scenario: Scenario, results: list[dict], extra: dict | None = None):
    doc = {
        "command": scenario.kind.replace("-", " "),
        "format": scenario.output_format,
        "results": results,
        "tool_version": __version__,
    }
    if scenario.input_path is not None:
        doc["input"] = Path(scenario.input_path).name
    if extra:
        doc.update(extra)
    return doc


def _run_simulate_votes(scenario: Scenario) -> list[tuple[str, str]]:
    combos = expand_sweeps(scenario.config, list(scenario.sweeps))
    bundles = []
    for overrides, cfg in combos:  # build (and so validate) before any run
        params = _build_record(VoteModelParams, cfg, "vote")
        story = _build_record(StoryConfig, cfg, "story")
        policy = _build_policy(cfg)
        run = _parse_run_section(cfg)
        bundles.append((overrides, params, story, policy, run))

    outputs: list[tuple[str, str]] = []
    results = []
    for overrides, params, story, policy, run in bundles:
        trajectory = integrate_votes(story, params, policy, run.horizon_minutes)
        entry = {
            "overrides": overrides,
            "params": {
                "vote": dataclasses.asdict(params),
                "story": dataclasses.asdict(story),
                "policy": _policy_dict(policy),
                "run": {"horizon_minutes": run.horizon_minutes},
            },
            "promotion_time_Th": trajectory.promotion_time_Th,
            "final_votes": trajectory.final_votes,
            "saturated_at": saturation_time(trajectory),
        }
        if scenario.output_format == "csv":
            name = f"votes{_suffix_for(overrides)}.csv"
            outputs.append(
                (name, _csv_text("t,m", zip(trajectory.times, trajectory.votes_m)))
            )
            entry["file"] = name
        else:
            entry["file"] = None
            entry["trajectory"] = {
                "t": trajectory.times,
                "m": trajectory.votes_m,
            }
        results.append(entry)
    outputs.append(("summary.json", _json_text(_scenario_doc(scenario, results))))
    return outputs


def _run_simulate_rank(scenario: Scenario) -> list[tuple[str, str]]:
    combos = expand_sweeps(scenario.config, list(scenario.sweeps))
    bundles = []
    for overrides, cfg in combos:
        params = _build_record(RankModelParams, cfg, "rank")
        user = _build_record(UserState, cfg, "user")
        run = _parse_run_section(cfg)
        if run.M_schedule is not None and len(run.M_schedule) != run.weeks:
            raise ConfigError(
                f"[run] M_schedule has {len(run.M_schedule)} entries "
                f"but weeks = {run.weeks}"
            )
        bundles.append((overrides, params, user, run))

    outputs: list[tuple[str, str]] = []
    results = []
    for overrides, params, user, run in bundles:
        trajectory = integrate_rank(user, params, run.weeks, run.M_schedule)
        proxies = [
            rank_proxy(f, run.rank_kappa) if f > 0 else None
            for f in trajectory.front_page_F
        ]
        entry = {
            "overrides": overrides,
            "params": {
                "rank": dataclasses.asdict(params),
                "user": dataclasses.asdict(user),
                "run": {
                    "weeks": run.weeks,
                    "rank_kappa": run.rank_kappa,
                    "M_schedule": list(run.M_schedule) if run.M_schedule else None,
                },
            },
            "final_front_page_F": trajectory.front_page_F[-1],
            "final_network_S": trajectory.network_S[-1],
            "final_rank_proxy": proxies[-1],
        }
        if scenario.output_format == "csv":
            name = f"rank{_suffix_for(overrides)}.csv"
            rows = zip(
                trajectory.weeks,
                trajectory.front_page_F,
                trajectory.network_S,
                proxies,
            )
            outputs.append((name, _csv_text("week,F,S,rank_proxy", rows)))
            entry["file"] = name
        else:
            entry["file"] = None
            entry["trajectory"] = {
                "week": trajectory.weeks,
                "F": trajectory.front_page_F,
                "S": trajectory.network_S,
                "rank_proxy": proxies,
            }
        results.append(entry)
    outputs.append(("summary.json", _json_text(_scenario_doc(scenario, results))))
    return outputs


def _run_ensemble(scenario: Scenario) -> list[tuple[str, str]]:
    combos = expand_sweeps(scenario.config, list(scenario.sweeps))
    bundles = []
    for overrides, cfg in combos:
        params = _build_record(VoteModelParams, cfg, "vote")
        story = _build_record(StoryConfig, cfg, "story")
        policy = _build_policy(cfg)
        run = _parse_run_section(cfg)
        opts = _parse_ensemble_section(cfg, scenario.seed_override)
        try:
            config = StochasticRunConfig(
                story=story,
                params=params,
                policy=policy,
                horizon=run.horizon_minutes,
                seed=opts.seed,
                runs=opts.runs,
                arrival_mode=opts.arrival_mode,
            )
        except ParameterError as exc:
            raise ConfigError(f"[ensemble] {exc}") from None
        bundles.append((overrides, config, run))

    outputs: list[tuple[str, str]] = []
    results = []
    for overrides, config, run in bundles:
        summary = ensemble(config)
        n = summary.n_runs
        std_final = float(summary.final_votes.std(ddof=1)) if n > 1 else 0.0
        entry = {
            "overrides": overrides,
            "params": {
                "vote": dataclasses.asdict(config.params),
                "story": dataclasses.asdict(config.story),
                "policy": _policy_dict(config.policy),
                "run": {"horizon_minutes": run.horizon_minutes},
                "ensemble": {
                    "runs": config.runs,
                    "seed": config.seed,
                    "arrival_mode": config.arrival_mode,
                },
            },
            "promotion_probability": summary.promotion_probability,
            "promotion_time_quantiles": summary.promotion_time_quantiles,
            "mean_final_votes": float(summary.final_votes.mean()),
            "std_final_votes": std_final,
        }
        if scenario.output_format == "csv":
            name = f"ensemble_mean{_suffix_for(overrides)}.csv"
            outputs.append(
                (name, _csv_text("t,m", zip(summary.times, summary.mean_votes)))
            )
            entry["file"] = name
        else:
            entry["file"] = None
            entry["trajectory"] = {
                "t": summary.times,
                "mean_m": summary.mean_votes,
                "std_m": summary.std_votes,
            }
        results.append(entry)
    outputs.append(("summary.json", _json_text(_scenario_doc(scenario, results))))
    return outputs


def _policy_dict(policy) -> dict:
    if isinstance(policy, FixedThreshold):
        return {"kind": "fixed", "h": policy.h}
    return {"kind": "network_proportional", "factor": policy.factor}


def _run_fit_linear(scenario: Scenario) -> list[tuple[str, str]]:
    series = group_trace(ingest_traces(scenario.input_path, kind="vote"))
    through_origin = bool(scenario.options.get("through_origin", False))
    results = []
    for sid, (x, y) in series.items():
        try:
            fit = fit_linear(np.column_stack([x, y]), through_origin=through_origin)
        except ValueError as exc:
            raise InputError(f"id {sid!r}: {exc}") from None
        results.append({"id": sid, **dataclasses.asdict(fit)})
    extra = {"options": {"through_origin": through_origin}}
    outputs: list[tuple[str, str]] = []
    if scenario.output_format == "csv":
        rows = [
            (r["id"], r["slope"], r["intercept"], r["rss"], r["n_points"])
            for r in results
        ]
        outputs.append(("fits.csv", _csv_text("id,slope,intercept,rss,n_points", rows)))
    outputs.append(
        ("summary.json", _json_text(_scenario_doc(scenario, results, extra)))
    )
    return outputs


def _run_fit_log(scenario: Scenario) -> list[tuple[str, str]]:
    series = group_trace(ingest_traces(scenario.input_path, kind="vote"))
    log_base = float(scenario.options.get("log_base", math.e))
    results = []
    for sid, (x, y) in series.items():
        try:
            fit = fit_log(np.column_stack([x, y]), log_base=log_base)
        except ValueError as exc:
            raise InputError(f"id {sid!r}: {exc}") from None
        results.append({"id": sid, **dataclasses.asdict(fit)})
    extra = {"options": {"log_base": log_base}}
    outputs: list[tuple[str, str]] = []
    if scenario.output_format == "csv":
        rows = [
            (r["id"], r["alpha"], r["beta"], r["log_base"], r["rss"], r["n_points"])
            for r in results
        ]
        outputs.append(
            ("fits.csv", _csv_text("id,alpha,beta,log_base,rss,n_points", rows))
        )
    outputs.append(
        ("summary.json", _json_text(_scenario_doc(scenario, results, extra)))
    )
    return outputs


def _run_fit_success(scenario: Scenario) -> list[tuple[str, str]]:
    bins = int(scenario.options.get("bins", 10))
    min_submissions = int(scenario.options.get("min_submissions", 50))
    triples = []
    for lineno, row in _read_rows(scenario.input_path, _USERS_HEADER):
        try:
            triples.append((float(row[1]), float(row[2]), float(row[3])))
        except ValueError:
            raise InputError(
                f"{scenario.input_path}: line {lineno}: numeric fields required"
            ) from None
    try:
        binned = success_rate_series(
            triples, bins=bins, min_submissions=min_submissions
        )
        fit = fit_linear(binned.points)
    except ValueError as exc:
        raise InputError(f"{scenario.input_path}: {exc}") from None
    bin_entries = [
        {
            "center_S": c,
            "mean_success": m,
            "stderr": e,
            "count": n,
        }
        for c, m, e, n in zip(
            binned.bin_centers, binned.mean_rate, binned.stderr, binned.counts
        )
    ]
    results = [
        {
            "bins": bin_entries,
            "fit": dataclasses.asdict(fit),
            "n_users_kept": binned.n_users_kept,
            "n_users_total": binned.n_users_total,
        }
    ]
    extra = {"options": {"bins": bins, "min_submissions": min_submissions}}
    outputs: list[tuple[str, str]] = []
    if scenario.output_format == "csv":
        rows = [
            (b["center_S"], b["mean_success"], b["stderr"], b["count"])
            for b in bin_entries
        ]
        outputs.append(
            (
                "success_bins.csv",
                _csv_text("bin_center_S,mean_success,stderr,count", rows),
            )
        )
    outputs.append(
        ("summary.json", _json_text(_scenario_doc(scenario, results, extra)))
    )
    return outputs


def _run_significance(scenario: Scenario) -> list[tuple[str, str]]:
    results = []
    for lineno, row in _read_rows(scenario.input_path, _OBS_HEADER):
        try:
            obs = FriendVoteObservation(
                pool_N=int(row[1]),
                sample_n=int(row[2]),
                group_K=int(row[3]),
                overlap_k=int(row[4]),
            )
        except (ValueError, ParameterError) as exc:
            raise InputError(
                f"{scenario.input_path}: line {lineno}: {exc}"
            ) from None
        results.append(
            {
                "id": row[0].strip(),
                "exact_k": chance_probability(obs, mode="exact"),
                "tail_at_least_k": chance_probability(obs, mode="tail"),
            }
        )
    extra = {
        "mean_exact_k": float(np.mean([r["exact_k"] for r in results])),
        "mean_tail_at_least_k": float(
            np.mean([r["tail_at_least_k"] for r in results])
        ),
    }
    outputs: list[tuple[str, str]] = []
    if scenario.output_format == "csv":
        rows = [(r["id"], r["exact_k"], r["tail_at_least_k"]) for r in results]
        outputs.append(
            ("significance.csv", _csv_text("id,exact_k,tail_at_least_k", rows))
        )
    outputs.append(
        ("summary.json", _json_text(_scenario_doc(scenario, results, extra)))
    )
    return outputs


def _run_compare(scenario: Scenario) -> list[tuple[str, str]]:
    params = _build_record(VoteModelParams, scenario.config, "vote")
    story = _build_record(StoryConfig, scenario.config, "story")
    policy = _build_policy(scenario.config)
    run = _parse_run_section(scenario.config)
    trajectory = integrate_votes(story, params, policy, run.horizon_minutes)
    threshold = promotion_threshold_for(policy, story)

    series = group_trace(ingest_traces(scenario.input_path, kind="vote"))
    results = []
    for sid, (t, v) in series.items():
        try:
            report = compare_model_to_trace(t, v, trajectory, threshold=threshold)
        except ValueError as exc:
            raise InputError(f"id {sid!r}: {exc}") from None
        results.append({"id": sid, **dataclasses.asdict(report)})
    extra = {
        "params": {
            "vote": dataclasses.asdict(params),
            "story": dataclasses.asdict(story),
            "policy": _policy_dict(policy),
            "run": {"horizon_minutes": run.horizon_minutes},
        }
    }
    outputs: list[tuple[str, str]] = []
    if scenario.output_format == "csv":
        rows = [
            (
                r["id"],
                r["n_overlap"],
                r["rms_error"],
                r["promotion_time_model"],
                r["promotion_time_trace"],
                r["promotion_time_difference"],
                r["final_value_ratio"],
            )
            for r in results
        ]
        outputs.append(
            (
                "compare.csv",
                _csv_text(
                    "id,n_overlap,rms_error,promotion_time_model,"
                    "promotion_time_trace,promotion_time_difference,"
                    "final_value_ratio",
                    rows,
                ),
            )
        )
    outputs.append(
        ("summary.json", _json_text(_scenario_doc(scenario, results, extra)))
    )
    return outputs


_RUNNERS = {
    "simulate-votes": _run_simulate_votes,
    "simulate-rank": _run_simulate_rank,
    "ensemble": _run_ensemble,
    "fit-linear": _run_fit_linear,
    "fit-log": _run_fit_log,
    "fit-success": _run_fit_success,
    "significance": _run_significance,
    "compare": _run_compare,
}


def run_scenario(scenario: Scenario) -> int:
    """Execute a scenario: build every output in memory, then write.

    Building first means a failure part-way leaves the output directory
    untouched; each file is then written via write-then-rename.
    """
    runner = _RUNNERS.get(scenario.kind)
    if runner is None:
        raise ConfigError(f"unknown scenario kind {scenario.kind!r}")
    outputs = runner(scenario)
    _write_outputs(scenario.out_dir, outputs)
    return EXIT_OK


# --- argument parsing ------------------------------------------------------

def _add_output_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--out",
        type=Path,
        default=Path("."),
        metavar="DIR",
        help="output directory (default: current directory)",
    )
    parser.add_argument(
        "--format",
        choices=("csv", "json"),
        default="csv",
        dest="output_format",
        help="csv: tables as CSV files plus summary.json; "
        "json: everything embedded in summary.json",
    )


def _add_config_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--config",
        type=Path,
        required=True,
        metavar="PATH",
        help="INI scenario config (sections [vote] [story] [policy] "
        "[rank] [user] [ensemble] [run])",
    )
    parser.add_argument(
        "--sweep",
        action="append",
        default=[],
        metavar="SECTION.KEY=V1,V2,...",
        help="sweep a config key over values; repeatable (cross product)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="frontpage",
        description="Collective-rating dynamics: simulations, ensembles, "
        "fits, and significance tests.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    simulate = sub.add_parser("simulate", help="deterministic model runs")
    sim_sub = simulate.add_subparsers(dest="target", required=True, metavar="WHAT")
    votes = sim_sub.add_parser("votes", help="story vote trajectory (CSV t,m)")
    _add_config_args(votes)
    _add_output_args(votes)
    rank = sim_sub.add_parser(
        "rank", help="weekly user rank model (CSV week,F,S,rank_proxy)"
    )
    _add_config_args(rank)
    _add_output_args(rank)

    ens = sub.add_parser("ensemble", help="stochastic vote-model ensemble")
    _add_config_args(ens)
    _add_output_args(ens)
    ens.add_argument(
        "--seed",
        type=int,
        default=None,
        metavar="N",
        help="override the [ensemble] seed",
    )

    fit = sub.add_parser("fit", help="least-squares fits over CSV data")
    fit_sub = fit.add_subparsers(dest="target", required=True, metavar="KIND")
    linear = fit_sub.add_parser("linear", help="y = slope*x + intercept per id")
    linear.add_argument("input", type=Path, help="trace CSV (id,t,value)")
    linear.add_argument(
        "--through-origin", action="store_true", help="pin the intercept at 0"
    )
    _add_output_args(linear)
    log = fit_sub.add_parser("log", help="y = alpha*log(x) + beta per id")
    log.add_argument("input", type=Path, help="trace CSV (id,t,value), t >= 1")
    log.add_argument(
        "--log-base", type=float, default=math.e, help="logarithm base (default e)"
    )
    _add_output_args(log)
    success = fit_sub.add_parser(
        "success", help="binned success rate vs. network size"
    )
    success.add_argument(
        "input", type=Path, help=f"users CSV ({','.join(_USERS_HEADER)})"
    )
    success.add_argument(
        "--bins", type=int, default=10, help="equal-width bin count (default 10)"
    )
    success.add_argument(
        "--min-submissions",
        type=int,
        default=50,
        help="drop users below this many submissions (default 50)",
    )
    _add_output_args(success)

    sig = sub.add_parser(
        "significance", help="friend-voting chance probabilities"
    )
    sig.add_argument(
        "input", type=Path, help=f"observations CSV ({','.join(_OBS_HEADER)})"
    )
    _add_output_args(sig)

    comp = sub.add_parser("compare", help="model trajectory vs. observed trace")
    comp.add_argument("trace", type=Path, help="trace CSV (id,t,value)")
    _add_config_args(comp)
    _add_output_args(comp)

    return parser


def _scenario_from_args(args: argparse.Namespace) -> Scenario:
    if args.command == "simulate":
        kind = f"simulate-{args.target}"
    elif args.command == "fit":
        kind = f"fit-{args.target}"
    else:
        kind = args.command

    config: dict[str, dict[str, str]] = {}
    sweeps: tuple = ()
    if getattr(args, "config", None) is not None:
        config = load_config(args.config)
        sweeps = tuple(parse_sweeps(list(getattr(args, "sweep", []) or [])))

    options: dict = {}
    if kind == "fit-linear":
        options["through_origin"] = args.through_origin
    elif kind == "fit-log":
        options["log_base"] = args.log_base
    elif kind == "fit-success":
        options["bins"] = args.bins
        options["min_submissions"] = args.min_submissions

    input_path = getattr(args, "input", None)
    if kind == "compare":
        input_path = args.trace

    return Scenario(
        kind=kind,
        config=config,
        sweeps=sweeps,
        out_dir=args.out,
        output_format=args.output_format,
        seed_override=getattr(args, "seed", None),
        input_path=input_path,
        options=options,
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return run_scenario(_scenario_from_args(args))
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
