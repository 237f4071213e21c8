"""Player arrival-time model and probabilistic interception model.

All control fields in this package are built on two primitives: the expected
time for a player to reach a target, and the probability that the player has
arrived by a given time T. Arrival uncertainty follows a logistic distribution
centered on the expected arrival time, so

    f(T) = 1 / (1 + exp(-pi * (T - tau_exp) / (sqrt(3) * s)))

where s is the arrival-uncertainty scale in seconds. The functions here are
pure and broadcast over numpy arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ParameterError

SQRT3 = math.sqrt(3.0)

# exp() argument clamp; keeps the logistic exact to <1e-300 without overflow
_EXP_CLIP = 700.0


@dataclass(frozen=True)
class PlayerMotionParams:
    """Kinematic and ball-control parameters for one side's players.

    Attackers and defenders are modeled with separate instances so their
    control rates (and if desired, speeds) can differ.
    """

    reaction_time: float = 0.7  # s: coast at current velocity before turning
    v_max: float = 5.0  # m/s: top running speed
    a_max: float = 7.0  # m/s^2: used only by the constant-acceleration mode
    tti_sigma: float = 0.45  # s: arrival-time uncertainty scale
    control_rate: float = 4.3  # 1/s: Poisson rate of making a controlled touch
    arrival_model: str = "reaction"  # "reaction" or "constant_accel"

    def __post_init__(self):
        for name in ("reaction_time", "v_max", "a_max", "tti_sigma", "control_rate"):
            value = getattr(self, name)
            if not (value > 0) or not math.isfinite(value):
                raise ParameterError(f"{name} must be strictly positive and finite, got {value}")
        if self.reaction_time >= 2.0:
            raise ParameterError(f"reaction_time must be < 2 s, got {self.reaction_time}")
        if self.arrival_model not in ("reaction", "constant_accel"):
            raise ParameterError(f"unknown arrival_model {self.arrival_model!r}")


@dataclass(frozen=True)
class BallModel:
    """Ball (or disc) delivery model: straight line at constant speed."""

    speed: float = 15.0  # m/s: average pass/throw speed
    dribble_speed: float | None = None  # m/s: carry speed, if the sport allows it
    trajectory: str = "straight"

    def __post_init__(self):
        if not (self.speed > 0):
            raise ParameterError(f"ball speed must be > 0, got {self.speed}")
        if self.dribble_speed is not None and not (self.dribble_speed > 0):
            raise ParameterError(f"dribble speed must be > 0, got {self.dribble_speed}")
        if self.trajectory != "straight":
            raise ParameterError(f"unsupported trajectory mode {self.trajectory!r}")


def expected_arrival_time(position, velocity, target, params: PlayerMotionParams):
    """Expected time for a player to reach ``target``.

    The player coasts at the current velocity for ``reaction_time`` seconds,
    then runs straight to the target. In the default mode the run is at
    ``v_max``; in ``constant_accel`` mode the player accelerates from rest at
    ``a_max`` up to ``v_max``.

    ``target`` may be a single point or an array of shape (..., 2); the result
    broadcasts accordingly.
    """
    position = np.asarray(position, dtype=float)
    velocity = np.asarray(velocity, dtype=float)
    target = np.asarray(target, dtype=float)
    start = position + velocity * params.reaction_time
    dist = np.linalg.norm(target - start, axis=-1)
    if params.arrival_model == "constant_accel":
        run_time = _accel_run_time(dist, params.a_max, params.v_max)
    else:
        run_time = dist / params.v_max
    return params.reaction_time + run_time


def _accel_run_time(dist, a_max, v_max):
    """Time to cover ``dist`` from rest accelerating at a_max, capped at v_max."""
    dist = np.asarray(dist, dtype=float)
    d_ramp = v_max * v_max / (2.0 * a_max)
    ramp = np.sqrt(2.0 * dist / a_max)
    cruise = v_max / a_max + (dist - d_ramp) / v_max
    return np.where(dist <= d_ramp, ramp, cruise)


def arrival_probability(T, tau_exp, sigma):
    """Probability that a player with expected arrival ``tau_exp`` is there by T.

    Logistic CDF with scale chosen so ``sigma`` is the standard deviation of
    the arrival time. Broadcasts over arrays; strictly increasing in T.
    """
    if np.any(np.asarray(sigma) <= 0):
        raise ParameterError(f"arrival-uncertainty sigma must be > 0, got {sigma}")
    x = np.pi * (np.asarray(T, dtype=float) - tau_exp) / (SQRT3 * np.asarray(sigma, dtype=float))
    x = np.clip(x, -_EXP_CLIP, _EXP_CLIP)
    return 1.0 / (1.0 + np.exp(-x))


def ball_flight_time(origin, target, ball: BallModel):
    """Straight-line flight time from ``origin`` to ``target`` at the ball speed."""
    origin = np.asarray(origin, dtype=float)
    target = np.asarray(target, dtype=float)
    return np.linalg.norm(target - origin, axis=-1) / ball.speed
