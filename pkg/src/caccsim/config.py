"""Parsing of the line-oriented configuration files.

All files share one shape: `key = value` lines under `[section]` headers,
with `#` comments.  Missing optional keys fall back to the dataclass
defaults; structurally required keys raise with the file and key named.
"""

from __future__ import annotations

import configparser

from .gaintable import AxisGrid, BuildConfig, CandidateSets
from .controllers import GainPair, LinearFeedbackGains
from .harness import BaselineConfig, ScenarioConfig
from .metrics import ComfortWeights, ConsensusThresholds, SafetyMode
from .stability import FrequencySweep

__all__ = [
    "load_build_config",
    "load_axes",
    "load_candidates",
    "load_scenario",
    "load_baselines",
    "load_sweep",
]


def _read(path) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#",))
    with open(path, "r", encoding="utf-8") as fh:
        parser.read_file(fh)
    return parser


def _require(parser, section: str, key: str, path) -> str:
    if not parser.has_option(section, key):
        raise ValueError(f"{path}: missing required key {key!r} in [{section}]")
    return parser.get(section, key)


def _float_list(text: str) -> list[float]:
    return [float(part) for part in text.split(",") if part.strip() != ""]


def load_build_config(path) -> BuildConfig:
    """Build and run settings from [build], [thresholds], [weights]."""
    parser = _read(path)
    defaults = BuildConfig()
    thr_defaults = ConsensusThresholds()
    w_defaults = ComfortWeights()

    def get(section, key, fallback):
        if parser.has_option(section, key):
            return parser.getfloat(section, key)
        return fallback

    mode_text = (
        parser.get("build", "safety_mode")
        if parser.has_option("build", "safety_mode")
        else defaults.safety_mode.value
    )
    try:
        mode = SafetyMode(mode_text)
    except ValueError as exc:
        raise ValueError(f"{path}: unknown safety_mode {mode_text!r}") from exc

    return BuildConfig(
        dt=get("build", "dt", defaults.dt),
        t_max=get("build", "t_max", defaults.t_max),
        comm_delay=get("build", "comm_delay", defaults.comm_delay),
        leader_length=get("build", "leader_length", defaults.leader_length),
        time_gap=get("build", "time_gap", defaults.time_gap),
        thresholds=ConsensusThresholds(
            eta_r=get("thresholds", "eta_r", thr_defaults.eta_r),
            eta_v=get("thresholds", "eta_v", thr_defaults.eta_v),
            delta_a=get("thresholds", "delta_a", thr_defaults.delta_a),
            delta_jerk=get("thresholds", "delta_jerk", thr_defaults.delta_jerk),
        ),
        weights=ComfortWeights(
            omega_1=get("weights", "omega_1", w_defaults.omega_1),
            omega_2=get("weights", "omega_2", w_defaults.omega_2),
        ),
        safety_mode=mode,
        hold_window=get("build", "hold_window", defaults.hold_window),
    )


def load_axes(path) -> AxisGrid:
    """Axis grids from [axes] keys dr, vi, vj (comma-separated values)."""
    parser = _read(path)
    return AxisGrid(
        dr=_float_list(_require(parser, "axes", "dr", path)),
        vi=_float_list(_require(parser, "axes", "vi", path)),
        vj=_float_list(_require(parser, "axes", "vj", path)),
    )


def load_candidates(path) -> CandidateSets:
    """Candidate gain values from [candidates] keys gamma, k."""
    parser = _read(path)
    return CandidateSets(
        gammas=_float_list(_require(parser, "candidates", "gamma", path)),
        ks=_float_list(_require(parser, "candidates", "k", path)),
    )


def load_scenario(path) -> ScenarioConfig:
    """One scenario from [scenario] plus optional [controller_params]."""
    parser = _read(path)
    params: dict = {}
    if parser.has_section("controller_params"):
        params = {key: value for key, value in parser.items("controller_params")}
    scenario_id = (
        parser.get("scenario", "id")
        if parser.has_option("scenario", "id")
        else str(path)
    )
    defaults = ScenarioConfig(scenario_id="x", dr0=0.0, vi0=0.0, vj0=0.0)
    return ScenarioConfig(
        scenario_id=scenario_id,
        dr0=float(_require(parser, "scenario", "dr0", path)),
        vi0=float(_require(parser, "scenario", "vi0", path)),
        vj0=float(_require(parser, "scenario", "vj0", path)),
        duration=(
            parser.getfloat("scenario", "duration")
            if parser.has_option("scenario", "duration")
            else defaults.duration
        ),
        leader_profile=(
            parser.get("scenario", "leader_profile")
            if parser.has_option("scenario", "leader_profile")
            else defaults.leader_profile
        ),
        controller=(
            parser.get("scenario", "controller")
            if parser.has_option("scenario", "controller")
            else defaults.controller
        ),
        controller_params=params,
    )


def load_baselines(path) -> BaselineConfig:
    """Baseline controller gains from [fixed_consensus] and [linear_feedback]."""
    parser = _read(path)
    fixed_default = GainPair(k=0.1, gamma=1.0)
    lf_default = LinearFeedbackGains()

    def get(section, key, fallback):
        if parser.has_option(section, key):
            return parser.getfloat(section, key)
        return fallback

    return BaselineConfig(
        fixed=GainPair(
            k=get("fixed_consensus", "k", fixed_default.k),
            gamma=get("fixed_consensus", "gamma", fixed_default.gamma),
        ),
        linear=LinearFeedbackGains(
            k_a=get("linear_feedback", "k_a", lf_default.k_a),
            k_v=get("linear_feedback", "k_v", lf_default.k_v),
            k_d=get("linear_feedback", "k_d", lf_default.k_d),
            standstill_gap=get(
                "linear_feedback", "standstill_gap", lf_default.standstill_gap
            ),
        ),
    )


def load_sweep(path) -> FrequencySweep:
    """Frequency sweep settings from [sweep]."""
    parser = _read(path)
    defaults = FrequencySweep()
    return FrequencySweep(
        omega_min=(
            parser.getfloat("sweep", "omega_min")
            if parser.has_option("sweep", "omega_min")
            else defaults.omega_min
        ),
        omega_max=(
            parser.getfloat("sweep", "omega_max")
            if parser.has_option("sweep", "omega_max")
            else defaults.omega_max
        ),
        points=(
            parser.getint("sweep", "points")
            if parser.has_option("sweep", "points")
            else defaults.points
        ),
    )
