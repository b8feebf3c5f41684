"""Longitudinal controllers for a follower tracking a delayed leader.

All control laws see the leader only through the communication delay: the
leader sample handed to a controller is the delayed one.  The consensus law
regulates the gap toward a speed-dependent target spacing and weights the
speed error with a tunable gain; the linear feedback law is a conventional
fallback used when no scheduled gain is available.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .dynamics import VehicleState

__all__ = [
    "GainPair",
    "ControllerInput",
    "LinearFeedbackGains",
    "InvalidGainsError",
    "desired_gap",
    "consensus_command",
    "consensus_accel",
    "fixed_gain_consensus_accel",
    "linear_feedback_accel",
]


class InvalidGainsError(ValueError):
    """Raised when a controller is handed an invalid gain pair.

    The caller is expected to engage the fallback controller instead of
    retrying with the same gains.
    """


@dataclass(frozen=True)
class GainPair:
    """Consensus controller gains: position gain k, speed-error weight gamma.

    An invalid pair (the stored-table miss marker) carries NaN fields and
    valid=False; controllers refuse it.
    """

    k: float
    gamma: float
    valid: bool = True

    def __post_init__(self) -> None:
        if self.valid:
            if not (math.isfinite(self.k) and self.k > 0):
                raise ValueError(f"k must be positive and finite, got {self.k!r}")
            if not (math.isfinite(self.gamma) and self.gamma > 0):
                raise ValueError(
                    f"gamma must be positive and finite, got {self.gamma!r}"
                )

    @classmethod
    def invalid(cls) -> "GainPair":
        return cls(k=math.nan, gamma=math.nan, valid=False)


@dataclass(frozen=True)
class ControllerInput:
    """Everything a longitudinal controller sees at one control step.

    follower : own state at the current time.
    leader_delayed : leader state observed through the communication delay.
    leader_length : m, body length of the leader.
    time_gap : s, desired time gap of the spacing policy.
    comm_delay : s, communication delay (also part of the spacing policy).
    adjacency : 1.0 when the leader is connected, 0.0 when it is not; an
        unconnected leader yields a zero command.
    """

    follower: VehicleState
    leader_delayed: VehicleState
    leader_length: float = 5.0
    time_gap: float = 0.7
    comm_delay: float = 0.06
    adjacency: float = 1.0


@dataclass(frozen=True)
class LinearFeedbackGains:
    """Gains of the linear feedback fallback controller.

    k_a weights the leader's (delayed) acceleration, k_v the speed error,
    k_d the spacing error against a standstill-plus-time-gap policy.
    """

    k_a: float = 1.0
    k_v: float = 0.58
    k_d: float = 0.1
    standstill_gap: float = 1.0


# Conservative defaults for the fallback path when a lookup misses.
DEFAULT_FALLBACK_GAINS = LinearFeedbackGains()


def desired_gap(follower_speed, leader_length, time_gap, comm_delay):
    """Target spacing: leader length plus speed times (time gap + delay).

    Works elementwise on arrays.  The delay term compensates the age of the
    leader sample the controller acts on.
    """
    return leader_length + follower_speed * (time_gap + comm_delay)


def consensus_command(
    r_follower,
    r_leader_delayed,
    v_follower,
    v_leader_delayed,
    leader_length,
    headway_time,
    k,
    gamma,
    adjacency=1.0,
):
    """Consensus law on raw values; elementwise over arrays.

    headway_time is the combined spacing horizon (time gap + delay).  The
    command drives the spacing disagreement and the speed disagreement to
    zero together.  Both the per-run loop and the batched table builder call
    this, keeping their trajectories bit-identical.
    """
    spacing_error = r_follower - r_leader_delayed + leader_length + v_follower * headway_time
    speed_error = v_follower - v_leader_delayed
    return -(adjacency * k) * (spacing_error + gamma * speed_error)


def consensus_accel(inp: ControllerInput, gains: GainPair) -> float:
    """Commanded acceleration of the consensus controller (m/s^2)."""
    if not gains.valid:
        raise InvalidGainsError(
            "invalid gain pair; engage the fallback controller"
        )
    return consensus_command(
        inp.follower.position,
        inp.leader_delayed.position,
        inp.follower.speed,
        inp.leader_delayed.speed,
        inp.leader_length,
        inp.time_gap + inp.comm_delay,
        gains.k,
        gains.gamma,
        inp.adjacency,
    )


def fixed_gain_consensus_accel(inp: ControllerInput, static_gains: GainPair) -> float:
    """Consensus law with one static gain pair for every operating point."""
    return consensus_accel(inp, static_gains)


def linear_feedback_accel(
    inp: ControllerInput,
    leader_accel_delayed: float,
    gains: LinearFeedbackGains,
) -> float:
    """Linear feedback fallback: feedforward accel + speed + spacing terms."""
    spacing_target = (
        gains.standstill_gap
        + inp.leader_length
        + inp.follower.speed * inp.time_gap
    )
    spacing_error = (
        inp.leader_delayed.position - inp.follower.position - spacing_target
    )
    speed_error = inp.leader_delayed.speed - inp.follower.speed
    return (
        gains.k_a * leader_accel_delayed
        + gains.k_v * speed_error
        + gains.k_d * spacing_error
    )
