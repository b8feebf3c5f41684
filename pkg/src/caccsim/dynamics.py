"""Longitudinal point-mass vehicle model on a fixed-step grid.

Explicit first-order integration: position advances with the pre-step speed,
speed advances with the commanded acceleration, and the commanded value is
recorded as the acceleration of the new sample.  State retrieval with a
communication delay returns the stored sample from an integer number of steps
back and never interpolates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

__all__ = [
    "VehicleSpec",
    "VehicleState",
    "SimClock",
    "StateHistory",
    "step",
    "delayed_state",
]


def _require_finite(value: float, field_name: str) -> None:
    if not math.isfinite(value):
        raise ValueError(f"non-finite value for {field_name}: {value!r}")


@dataclass(frozen=True)
class VehicleSpec:
    """Static vehicle attributes.

    length : m, body length of the vehicle.
    accel_min / accel_max : m/s^2, actuation limits.  Defaults are unbounded;
        commands are not clamped unless a caller opts in via clamp().
    """

    length: float = 5.0
    accel_min: float = -math.inf
    accel_max: float = math.inf

    def __post_init__(self) -> None:
        if not self.length > 0:
            raise ValueError(f"length must be positive, got {self.length!r}")
        if not (self.accel_min < 0 < self.accel_max):
            raise ValueError(
                "accel limits must straddle zero, got "
                f"[{self.accel_min!r}, {self.accel_max!r}]"
            )

    def clamp(self, accel_cmd: float) -> float:
        """Clip a commanded acceleration to the actuation limits."""
        return min(max(accel_cmd, self.accel_min), self.accel_max)


@dataclass(frozen=True)
class VehicleState:
    """Kinematic sample: position (m), speed (m/s), acceleration (m/s^2)."""

    position: float
    speed: float
    accel: float = 0.0

    def __post_init__(self) -> None:
        _require_finite(self.position, "position")
        _require_finite(self.speed, "speed")
        _require_finite(self.accel, "accel")


@dataclass
class SimClock:
    """Integer step counter over a fixed step size.

    Time is always derived as step * dt, never accumulated by repeated
    addition, so sample times are reproducible bit for bit.
    """

    dt: float
    step: int = 0

    def __post_init__(self) -> None:
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt!r}")

    @property
    def t(self) -> float:
        return self.step * self.dt

    def tick(self) -> None:
        self.step += 1

    def steps_for(self, delay: float) -> int:
        """Convert a delay in seconds to a whole number of steps.

        The delay must be a non-negative integer multiple of dt; delayed
        retrieval works by index shift and never interpolates.
        """
        if delay < 0:
            raise ValueError(f"delay must be non-negative, got {delay!r}")
        ratio = delay / self.dt
        n = round(ratio)
        if abs(ratio - n) > 1e-9 * max(1.0, abs(ratio)):
            raise ValueError(
                f"delay {delay!r} is not an integer multiple of dt {self.dt!r}; "
                "delayed retrieval never interpolates"
            )
        return n


def _euler(position, speed, accel_cmd, dt):
    """Shared update arithmetic; works elementwise on scalars or arrays.

    Position uses the pre-step speed.  Both the scalar path and the batched
    table builder call this, so trajectories agree bit for bit.
    """
    return position + speed * dt, speed + accel_cmd * dt


def step(state: VehicleState, accel_cmd: float, dt: float) -> VehicleState:
    """Advance one step of explicit integration.

    The commanded acceleration becomes the acceleration of the returned
    sample: commands issued at time t shape the step that lands on t + dt.
    """
    _require_finite(accel_cmd, "accel_cmd")
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    position, speed = _euler(state.position, state.speed, accel_cmd, dt)
    return VehicleState(position=position, speed=speed, accel=accel_cmd)


class StateHistory:
    """Timestamped state samples at fixed spacing dt, oldest first.

    capacity bounds the retained sample count; it must cover the largest
    delay that will be queried.  Queries before the first retained sample
    return that first sample (start-of-run hold).
    """

    def __init__(self, dt: float, capacity: int | None = None):
        if not dt > 0:
            raise ValueError(f"dt must be positive, got {dt!r}")
        if capacity is not None and capacity < 1:
            raise ValueError(f"capacity must be at least 1, got {capacity!r}")
        self.dt = dt
        self.capacity = capacity
        self._clock = SimClock(dt)
        self._first_step = 0
        self._times: list[float] = []
        self._states: list[VehicleState] = []

    def __len__(self) -> int:
        return len(self._states)

    @property
    def times(self) -> list[float]:
        return list(self._times)

    def append(self, t: float, state: VehicleState) -> None:
        """Append a sample; times must advance by exactly one dt spacing."""
        if self._times:
            expected = (self._first_step + len(self._times)) * self.dt
            if abs(t - expected) > 1e-9 * max(1.0, abs(expected)):
                raise ValueError(
                    f"sample time {t!r} breaks the fixed spacing; expected {expected!r}"
                )
        self._times.append(t)
        self._states.append(state)
        if self.capacity is not None and len(self._states) > self.capacity:
            self._times.pop(0)
            self._states.pop(0)
            self._first_step += 1

    def sample_index(self, t: float) -> int:
        """Index of the stored sample at time t (must lie on the grid)."""
        if not self._times:
            raise ValueError("history is empty")
        ratio = (t - self._times[0]) / self.dt
        n = round(ratio)
        if abs(ratio - n) > 1e-6:
            raise ValueError(f"time {t!r} is not on the sample grid")
        if n < 0 or n >= len(self._states):
            raise ValueError(f"time {t!r} outside stored history")
        return n


def delayed_state(history: StateHistory, t: float, delay: float) -> VehicleState:
    """State sample observed at time t through a communication delay.

    Returns the sample stored delay/dt steps before t.  For query times
    earlier than the first retained sample the first sample is returned, so
    before any delayed data arrives the initial state is observed.
    """
    steps_back = SimClock(history.dt).steps_for(delay)
    if len(history) == 0:
        raise ValueError("history is empty")
    idx = history.sample_index(t) - steps_back
    if idx < 0:
        if history._first_step > 0:
            raise ValueError(
                "delayed query reaches samples evicted by capacity; "
                "capacity * dt must cover the delay"
            )
        idx = 0
    return history._states[idx]
