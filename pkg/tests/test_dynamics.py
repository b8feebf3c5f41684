"""Tests of the vehicle model: stepping, history, delayed retrieval."""

from __future__ import annotations

import numpy as np
import pytest

from caccsim.dynamics import (
    SimClock,
    StateHistory,
    VehicleSpec,
    VehicleState,
    delayed_state,
    step,
)


def test_step_cruise_from_standstill_command():
    """Position moves by v*dt, speed and accel keep the zero command."""
    out = step(VehicleState(position=0.0, speed=10.0, accel=0.0), 0.0, 0.01)
    assert out.position == 0.1
    assert out.speed == 10.0
    assert out.accel == 0.0


def test_step_braking_uses_pre_step_speed():
    """The position update uses the speed before the command acts."""
    out = step(VehicleState(position=100.0, speed=20.0, accel=0.0), -1.0, 0.01)
    assert out.position == 100.2
    assert out.speed == 19.99
    assert out.accel == -1.0


def test_step_records_command_as_new_accel():
    out = step(VehicleState(position=5.0, speed=0.0, accel=0.3), 2.5, 0.1)
    assert out.accel == 2.5


def test_step_rejects_nonfinite_command():
    with pytest.raises(ValueError, match="accel_cmd"):
        step(VehicleState(position=0.0, speed=0.0, accel=0.0), float("nan"), 0.01)


def test_state_rejects_nonfinite_fields():
    with pytest.raises(ValueError, match="position"):
        VehicleState(position=float("inf"), speed=0.0, accel=0.0)
    with pytest.raises(ValueError, match="speed"):
        VehicleState(position=0.0, speed=float("nan"), accel=0.0)


def test_step_rejects_bad_dt():
    with pytest.raises(ValueError, match="dt"):
        step(VehicleState(position=0.0, speed=0.0, accel=0.0), 0.0, 0.0)


def test_step_is_deterministic():
    """Identical inputs give bit-identical outputs."""
    state = VehicleState(position=12.34, speed=5.67, accel=-0.1)
    a = step(state, -0.456, 0.01)
    b = step(state, -0.456, 0.01)
    assert (a.position, a.speed, a.accel) == (b.position, b.speed, b.accel)


def test_position_strictly_increases_while_speed_positive():
    rng = np.random.default_rng(7)
    state = VehicleState(position=0.0, speed=3.0, accel=0.0)
    for _ in range(500):
        cmd = float(rng.uniform(-2.0, 2.0))
        new = step(state, cmd, 0.01)
        if state.speed > 0:
            assert new.position > state.position
        state = new


def test_vehicle_spec_validation_and_clamp():
    spec = VehicleSpec(length=4.5, accel_min=-3.0, accel_max=2.0)
    assert spec.clamp(5.0) == 2.0
    assert spec.clamp(-9.0) == -3.0
    assert spec.clamp(0.5) == 0.5
    with pytest.raises(ValueError, match="length"):
        VehicleSpec(length=0.0)
    with pytest.raises(ValueError, match="straddle"):
        VehicleSpec(length=5.0, accel_min=1.0, accel_max=2.0)


def test_simclock_time_is_step_times_dt():
    clock = SimClock(0.01)
    for _ in range(250):
        clock.tick()
    assert clock.t == 250 * 0.01


def test_simclock_delay_steps():
    clock = SimClock(0.01)
    assert clock.steps_for(0.06) == 6
    assert clock.steps_for(0.0) == 0
    with pytest.raises(ValueError, match="interpolates"):
        clock.steps_for(0.005)
    with pytest.raises(ValueError, match="non-negative"):
        clock.steps_for(-0.01)


def test_delayed_state_returns_exact_stored_sample():
    """A delay of n steps returns the sample stored n steps earlier."""
    history = StateHistory(dt=0.06)
    history.append(0.0, VehicleState(position=0.0, speed=14.0, accel=0.0))
    history.append(0.06, VehicleState(position=0.84, speed=14.5, accel=0.2))
    got = delayed_state(history, 0.06, 0.06)
    assert got.speed == 14.0
    assert got.position == 0.0


def test_delayed_state_zero_delay_is_current_sample():
    history = StateHistory(dt=0.06)
    history.append(0.0, VehicleState(position=0.0, speed=14.0, accel=0.0))
    history.append(0.06, VehicleState(position=0.84, speed=14.5, accel=0.2))
    assert delayed_state(history, 0.06, 0.0).speed == 14.5


def test_delayed_state_holds_initial_sample_before_start():
    """Queries reaching before the first sample see the initial state."""
    history = StateHistory(dt=0.01)
    first = VehicleState(position=50.0, speed=14.0, accel=0.0)
    history.append(0.0, first)
    history.append(0.01, VehicleState(position=50.14, speed=14.0, accel=0.0))
    held = delayed_state(history, 0.01, 0.06)
    assert held.position == first.position
    assert held.speed == first.speed


def test_delayed_state_rejects_non_multiple_delay():
    history = StateHistory(dt=0.01)
    history.append(0.0, VehicleState(position=0.0, speed=0.0, accel=0.0))
    with pytest.raises(ValueError, match="interpolates"):
        delayed_state(history, 0.0, 0.005)


def test_history_rejects_gapped_timestamps():
    history = StateHistory(dt=0.01)
    history.append(0.0, VehicleState(position=0.0, speed=0.0, accel=0.0))
    with pytest.raises(ValueError, match="spacing"):
        history.append(0.05, VehicleState(position=0.0, speed=0.0, accel=0.0))


def test_history_capacity_eviction_guard():
    """A delay that reaches evicted samples is an error, not a wrong answer."""
    history = StateHistory(dt=0.01, capacity=3)
    for i in range(10):
        history.append(i * 0.01, VehicleState(position=float(i), speed=0.0, accel=0.0))
    assert len(history) == 3
    assert delayed_state(history, 0.09, 0.02).position == 7.0
    with pytest.raises(ValueError, match="capacity"):
        delayed_state(history, 0.09, 0.05)


def test_bit_identical_resimulation():
    """Re-running the same command sequence reproduces every float exactly."""
    rng = np.random.default_rng(123)
    cmds = rng.uniform(-3.0, 3.0, size=200)

    def simulate():
        state = VehicleState(position=0.0, speed=20.0, accel=0.0)
        out = []
        for cmd in cmds:
            state = step(state, float(cmd), 0.01)
            out.append((state.position, state.speed, state.accel))
        return out

    assert simulate() == simulate()
