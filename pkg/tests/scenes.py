"""Scripted synthetic Ultimate possessions for the timing pipeline tests.

One cutting play in two variants:

* blocked: a teammate and their marker camp in the throwing lane and only
  start vacating at ``CLEAR_FRAME``; a receiver who cuts on time spends the
  middle of the run in the shadowed lane, while a delayed cut traverses the
  same space after it opens.
* open: the same geometry with the pair out of the lane for the whole play,
  so every initiation sees an identical world and the realized timing is
  (jointly) optimal.

Defenders never chase, so time-shifting the receiver cannot harvest value
from scripted defensive motion. All movement stays under v_max per frame so
counterfactuals keep the continuity bound.
"""

import numpy as np

from spacefield.config import SportConfig
from spacefield.kinematics import BallModel
from spacefield.pitch_control import GridSpec
from spacefield.timing import Play, WeightParams

N_FRAMES = 72
T0 = 12
CLEAR_FRAME = 34
RUN_SPEED = 0.45  # m/frame (4.5 m/s at 10 Hz, under the 5 m/s cap)
RECEIVER = ("Home", 1)
HOLDER = ("Home", 0)
XI_RANGE = (-10, -5, 0, 5, 10, 15)


def scene_config() -> SportConfig:
    return SportConfig(
        sport="ultimate",
        field_length=109.73,
        field_width=48.77,
        endzone_depth=18.288,
        players_per_side=4,
        sample_rate=10.0,
        ball=BallModel(speed=12.0),
        grid_nx=26,
        grid_ny=12,
    )


def scene_grid(cfg: SportConfig) -> GridSpec:
    return GridSpec.from_sport(cfg)


def scene_weights() -> WeightParams:
    return WeightParams(distance_scale=18.0, cone_smooth=0.2, xi_range=XI_RANGE)


def _hold(pos, n):
    return np.tile(np.asarray(pos, dtype=float), (n, 1))


def _run_segment(start, velocity, n):
    """n positions starting at `start`, stepping by `velocity` per frame."""
    steps = np.arange(n)[:, None] * np.asarray(velocity, dtype=float)[None, :]
    return np.asarray(start, dtype=float)[None, :] + steps


def crsv_scene(blocked: bool) -> Play:
    """Build the scripted possession; the receiver initiates at T0."""
    cfg = scene_config()
    n = N_FRAMES
    home = np.zeros((n, 4, 2))
    away = np.zeros((n, 4, 2))

    # holder pinned during the stall, marked tightly
    home[:, 0] = _hold((-20.0, 0.0), n)
    away[:, 0] = _hold((-18.5, 1.0), n)

    # receiver: still until T0, then a straight downfield cut along y = -8
    start = np.array([-2.0, -8.0])
    home[:T0, 1] = start
    home[T0:, 1] = _run_segment(start, (RUN_SPEED, 0.0), n - T0)

    # the marker denies the stationary receiver from the disc side but is
    # flat-footed: any cut earns the same separation whenever it starts
    to_disc = np.array([-20.0, 0.0]) - start
    m_off = 2.0 * to_disc / np.linalg.norm(to_disc)
    away[:, 1] = _hold(start + m_off, n)

    # blocking pair parked in the throwing lane until it vacates upfield
    lane_mate = np.array([-8.0, -3.4])
    lane_def = np.array([-8.6, -4.2])
    if blocked:
        home[:CLEAR_FRAME, 2] = lane_mate
        away[:CLEAR_FRAME, 2] = lane_def
        clear_n = n - CLEAR_FRAME
        home[CLEAR_FRAME:, 2] = _run_segment(lane_mate, (0.0, RUN_SPEED), clear_n)
        away[CLEAR_FRAME:, 2] = _run_segment(lane_def, (0.0, RUN_SPEED), clear_n)
    else:
        home[:, 2] = _hold(lane_mate + (0.0, 16.0), n)
        away[:, 2] = _hold(lane_def + (0.0, 16.0), n)

    # a flank sitter contests the short underneath space in both variants;
    # the spare attacker stays wide on the break side
    home[:, 3] = _hold((-12.0, 10.0), n)
    away[:, 3] = _hold((-3.0, -13.0), n)

    disc = _hold((-20.0, 0.0), n)
    times = np.arange(n) / cfg.sample_rate
    return Play(config=cfg, times=times, home=home, away=away, disc=disc,
                holder=HOLDER, t0=T0)
