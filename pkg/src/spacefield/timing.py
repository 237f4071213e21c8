"""Initiation-timing valuation: weighted Ultimate control and counterfactuals.

The chain here: UPPCF adapts pitch control to Ultimate (the thrower is
stationary during the stall and sits out of the receiving race; disc flight
is gated from the holder's position). wUPPCF downweights a receiver's control
by throw distance (w_d) and by marker obstruction of the throwing lane (w_s).
V_frame averages the receiver's weighted control over the region where
receiver and disc can arrive together; V_scenario is the best w-frame moving
average of V_frame over a play; V_timing compares the realized initiation
against the best time-shifted counterfactual of the same run.

Counterfactuals move exactly one receiver's run earlier or later; everyone
else's trajectory stays bit-identical, so differences in value are caused by
timing alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._util import params_hash
from .config import SportConfig
from .errors import FrameRangeError, InputError, ParameterError, ValidationError
from .kinematics import ball_flight_time
from .pitch_control import (
    ControlGrid,
    ControlParams,
    GridSpec,
    IntegrationParams,
    ppcf_grid,
    ppcf_grid_players,
)
from .space_data import FrameSnapshot


@dataclass(frozen=True)
class WeightParams:
    """Knobs for the wUPPCF weights, the value window and the offset range."""

    free_radius: float = 5.0  # m: throws shorter than this carry no distance penalty
    distance_scale: float = 20.0  # m: e-folding of w_d beyond the free radius
    cone_half_angle: float = 0.15  # rad: full-obstruction half angle of the lane shadow
    cone_smooth: float = 0.5  # obstruction fades linearly out to (1 + this) * half angle
    cone_depth: float | None = None  # m: shadow depth; None = the whole throw
    meet_tolerance: float = 0.3  # s: |receiver arrival - disc flight| for a meet
    horizon: float = 4.0  # s: latest receiver arrival considered
    window: int = 10  # frames: moving-average width for the scenario value
    xi_range: tuple[int, ...] = (-20, -15, -10, -5, 0, 5, 10, 15, 20)

    def __post_init__(self):
        if self.free_radius < 0 or self.distance_scale <= 0:
            raise ParameterError("distance weight scales must be positive")
        if self.cone_half_angle <= 0 or self.cone_smooth < 0:
            raise ParameterError("cone parameters must be positive")
        if self.window < 1:
            raise ParameterError("window must be >= 1 frame")
        if 0 not in self.xi_range:
            raise ParameterError("xi_range must contain the realized offset 0")


@dataclass
class Play:
    """A possession segment with a known holder and run-initiation frame.

    Arrays are (n, K, 2) for the teams and (n, 2) for the disc. ``t0`` is the
    frame (0-based, within the play) where the receiver's run starts.
    """

    config: SportConfig
    times: np.ndarray
    home: np.ndarray
    away: np.ndarray
    disc: np.ndarray
    holder: tuple[str, int]
    t0: int

    def __post_init__(self):
        n = len(self.times)
        if not (self.home.shape[0] == self.away.shape[0] == self.disc.shape[0] == n):
            raise ValidationError("play arrays disagree on the number of frames")
        if not 0 <= self.t0 < n:
            raise FrameRangeError(f"initiation frame {self.t0} outside play of {n} frames")

    @property
    def n_frames(self) -> int:
        return len(self.times)

    def trajectory(self, player: tuple[str, int]) -> np.ndarray:
        side, idx = player
        return (self.home if side == "Home" else self.away)[:, idx, :]

    def snapshot(self, i: int, period: int = 1) -> FrameSnapshot:
        """Frame view with velocities differenced from the play's own arrays."""
        rate = self.config.sample_rate
        return FrameSnapshot(
            period=period,
            time=float(self.times[i]),
            home=self.home[i],
            away=self.away[i],
            ball=self.disc[i],
            home_velocity=_frame_velocity(self.home, i, rate),
            away_velocity=_frame_velocity(self.away, i, rate),
        )

    @classmethod
    def from_dataset(cls, dataset, start: int, end: int, holder: tuple[str, int],
                     t0: int) -> "Play":
        """Cut frames [start, end) of a dataset into a Play; t0 is dataset-indexed."""
        frames = dataset.frames[start:end]
        if not frames:
            raise FrameRangeError(f"empty play range [{start}, {end})")
        if not start <= t0 < end:
            raise FrameRangeError(f"initiation frame {t0} outside play range [{start}, {end})")
        return cls(
            config=dataset.config,
            times=np.array([f.time for f in frames]),
            home=np.stack([f.home for f in frames]),
            away=np.stack([f.away for f in frames]),
            disc=np.stack([f.ball for f in frames]),
            holder=holder,
            t0=t0 - start,
        )


def _frame_velocity(arr: np.ndarray, i: int, rate: float) -> np.ndarray:
    n = arr.shape[0]
    if n == 1:
        return np.zeros_like(arr[0])
    if 0 < i < n - 1:
        return (arr[i + 1] - arr[i - 1]) * (rate / 2.0)
    if i == 0:
        return (arr[1] - arr[0]) * rate
    return (arr[i] - arr[i - 1]) * rate


@dataclass
class CounterfactualPlay:
    """One receiver's run shifted by ``offset`` frames; everyone else untouched."""

    base: Play
    receiver: tuple[str, int]
    offset: int
    play: Play  # the shifted trajectories, same shape as base
    velocity_fallback: bool = False  # bridge velocity fell back to zero

    @property
    def t0(self) -> int:
        return self.play.t0


@dataclass
class ReachRegion:
    """Grid cells where the receiver and the disc can arrive together."""

    spec: GridSpec
    member: np.ndarray  # (ny, nx) bool
    arrival: np.ndarray  # (ny, nx) receiver meet times (committed cut, no reaction)

    @property
    def size(self) -> int:
        return int(self.member.sum())


def uppcf_grid(frame: FrameSnapshot, holder: tuple[str, int] | None, grid_spec: GridSpec,
               params: ControlParams, integration: IntegrationParams | None = None,
               exclude_holder: bool = True) -> ControlGrid:
    """Pitch control under Ultimate rules.

    The disc holder is pinned during the stall: they are removed from the
    receiving race, and flight times are measured from their position. With
    ``exclude_holder=False`` this reduces to plain :func:`ppcf_grid`.
    """
    grid, _ = uppcf_grid_players(frame, holder, grid_spec, params, integration,
                                 exclude_holder=exclude_holder)
    return grid


def uppcf_grid_players(frame: FrameSnapshot, holder: tuple[str, int] | None,
                       grid_spec: GridSpec, params: ControlParams,
                       integration: IntegrationParams | None = None,
                       exclude_holder: bool = True):
    if not exclude_holder:
        return ppcf_grid_players(frame, grid_spec, params, integration, model_id="uppcf")
    if holder is None:
        raise InputError("UPPCF needs the disc holder for this frame")
    side, idx = holder
    origin = frame.positions(side)[idx]
    if np.isnan(origin).any():
        raise InputError(f"holder {holder} has no position in this frame")
    return ppcf_grid_players(frame, grid_spec, params, integration,
                             exclude=holder, flight_origin=origin, model_id="uppcf")


def lane_weights(frame: FrameSnapshot, origin: np.ndarray, grid_spec: GridSpec,
                 weights: WeightParams, defender_side: str) -> np.ndarray:
    """Per-cell product w_d * w_s for throws from ``origin``.

    w_d = exp(-max(0, throw_dist - free_radius) / distance_scale).
    w_s = 1 - obstruction, where a defender inside the shadow cone from the
    origin toward the cell (within the cone depth) obstructs fully, fading
    linearly to zero at ``(1 + cone_smooth) * cone_half_angle`` off-axis.
    """
    cells = grid_spec.cells()
    rel = cells - origin[None, :]
    throw_dist = np.linalg.norm(rel, axis=1)

    w_d = np.exp(-np.maximum(0.0, throw_dist - weights.free_radius) / weights.distance_scale)

    defenders = frame.positions(defender_side)
    obstruction = np.zeros(len(cells))
    width = weights.cone_half_angle * max(weights.cone_smooth, 1e-12)
    outer = weights.cone_half_angle + width
    safe_dist = np.maximum(throw_dist, 1e-12)
    for d in defenders:
        if np.isnan(d).any():
            continue
        v = d - origin
        proj = (rel @ v) / safe_dist  # defender distance along each throw axis
        v_norm = float(np.hypot(v[0], v[1]))
        if v_norm < 1e-9:
            # defender on top of the disc shadows every lane
            obstruction[:] = 1.0
            break
        depth = throw_dist if weights.cone_depth is None else np.minimum(throw_dist, weights.cone_depth)
        in_front = (proj > 0) & (proj <= depth)
        cos_angle = np.clip((rel @ v) / (safe_dist * v_norm), -1.0, 1.0)
        angle = np.arccos(cos_angle)
        level = np.clip((outer - angle) / width, 0.0, 1.0)
        obstruction = np.maximum(obstruction, np.where(in_front, level, 0.0))

    w_s = 1.0 - obstruction
    return (w_d * w_s).reshape(grid_spec.ny, grid_spec.nx)


def wuppcf_grid(frame: FrameSnapshot, holder: tuple[str, int] | None, grid_spec: GridSpec,
                params: ControlParams, weights: WeightParams,
                integration: IntegrationParams | None = None,
                receiver: tuple[str, int] | None = None,
                exclude_holder: bool = True) -> ControlGrid:
    """Weighted Ultimate control: UPPCF scaled by the throw-lane weights.

    With ``receiver`` given, the attack surface is that player's own weighted
    control; otherwise it is the team's. The defender surface is unweighted.
    """
    grid, per_player = uppcf_grid_players(frame, holder, grid_spec, params, integration,
                                          exclude_holder=exclude_holder)
    if exclude_holder and holder is not None:
        origin = frame.positions(holder[0])[holder[1]]
    else:
        origin = np.asarray(frame.ball, dtype=float)
    if np.isnan(origin).any():
        raise InputError("weighted control needs a disc origin")

    defender_side = "Away" if params.attacking_team == "Home" else "Home"
    w = lane_weights(frame, np.asarray(origin, dtype=float), grid_spec, weights, defender_side)

    if receiver is None:
        attack = grid.attack * w
    else:
        if receiver not in per_player:
            raise InputError(f"receiver {receiver} not in the attacking race")
        attack = per_player[receiver] * w

    metadata = dict(grid.metadata)
    metadata.update(model="wuppcf", params=params_hash(params, weights),
                    receiver=None if receiver is None else f"{receiver[0]}_{receiver[1] + 1}")
    return ControlGrid(spec=grid_spec, attack=attack, defend=grid.defend,
                       converged=grid.converged, metadata=metadata)


def reach_region(frame: FrameSnapshot, receiver: tuple[str, int], grid_spec: GridSpec,
                 params: ControlParams, weights: WeightParams,
                 motion=None) -> ReachRegion:
    """Cells where the receiver and the disc can meet.

    A cell is in the region when |tau_receiver - T_flight| <= meet_tolerance
    and both times are within the horizon. The region may be empty.

    The meet prediction models a receiver already committed to their cut:
    momentum still drifts the start point, but no reaction delay is charged,
    so a receiver standing on the disc meets it immediately.
    """
    side, idx = receiver
    pos = frame.positions(side)[idx]
    vel = frame.velocities(side)[idx]
    disc = np.asarray(frame.ball, dtype=float)
    if np.isnan(pos).any() or np.isnan(disc).any():
        raise InputError("reach region needs receiver and disc positions")

    motion = motion or (params.attacker_motion if side == params.attacking_team
                        else params.defender_motion)
    cells = grid_spec.cells()
    start = pos + np.nan_to_num(vel) * motion.reaction_time
    tau = np.linalg.norm(cells - start[None, :], axis=1) / motion.v_max
    t_flight = ball_flight_time(disc, cells, params.ball)
    member = (np.abs(tau - t_flight) <= weights.meet_tolerance)
    member &= (tau <= weights.horizon) & (t_flight <= weights.horizon)
    member &= ~grid_spec.flat_mask()
    shape = (grid_spec.ny, grid_spec.nx)
    return ReachRegion(spec=grid_spec, member=member.reshape(shape), arrival=tau.reshape(shape))


def v_frame(frame: FrameSnapshot, holder: tuple[str, int] | None, receiver: tuple[str, int],
            grid_spec: GridSpec, params: ControlParams, weights: WeightParams,
            integration: IntegrationParams | None = None) -> float:
    """Mean of the receiver's weighted control over the simultaneous-arrival
    region; 0 when the region is empty."""
    region = reach_region(frame, receiver, grid_spec, params, weights)
    if region.size == 0:
        return 0.0
    grid = wuppcf_grid(frame, holder, grid_spec, params, weights, integration,
                       receiver=receiver)
    return float(grid.attack[region.member].mean())


def shift_trajectory(play: Play, receiver: tuple[str, int], offset: int,
                     params: ControlParams) -> CounterfactualPlay:
    """Replay the receiver's run ``offset`` frames earlier (<0) or later (>0).

    Earlier: the post-initiation movement is replayed |offset| frames sooner
    and translated so the path is continuous at the new start; the vacated
    tail is extended at the run's mean closing velocity. Later: a bridge of
    ``offset`` frames continues from the position at t0 at the mean velocity
    over the preceding second, then the original run follows, translated for
    continuity. Every other trajectory is copied bit-for-bit.
    """
    n = play.n_frames
    t0 = play.t0
    new_t0 = t0 + offset
    if not 0 <= new_t0 < n:
        raise FrameRangeError(
            f"offset {offset} moves initiation to frame {new_t0}, outside the play of {n} frames")

    rate = play.config.sample_rate
    home = play.home.copy()
    away = play.away.copy()
    side, idx = receiver
    team = home if side == "Home" else away
    base_traj = play.trajectory(receiver)
    traj = team[:, idx, :]
    fallback = False

    if offset < 0:
        # replay the run |offset| frames earlier, glued at the new start
        shift = -offset
        correction = base_traj[new_t0] - base_traj[t0]
        last_sourced = n - 1 - shift  # beyond this the recorded run is exhausted
        for t in range(new_t0, last_sourced + 1):
            traj[t] = base_traj[t + shift] + correction
        tail_v = _mean_velocity(base_traj, n - 1, rate, window=int(rate))
        if tail_v is None:
            tail_v = np.zeros(2)
            fallback = True
        for t in range(last_sourced + 1, n):
            traj[t] = traj[t - 1] + tail_v / rate
    elif offset > 0:
        v_bridge = _mean_velocity(base_traj, t0, rate, window=int(rate))
        if v_bridge is None:
            v_bridge = np.zeros(2)
            fallback = True
        for i in range(1, offset + 1):
            traj[t0 + i] = base_traj[t0] + v_bridge * (i / rate)
        correction = traj[new_t0] - base_traj[t0]
        for t in range(new_t0 + 1, n):
            src = t - offset
            traj[t] = base_traj[src] + correction

    shifted = Play(
        config=play.config, times=play.times.copy(),
        home=home, away=away, disc=play.disc.copy(),
        holder=play.holder, t0=new_t0,
    )
    return CounterfactualPlay(base=play, receiver=receiver, offset=offset,
                              play=shifted, velocity_fallback=fallback)


def _mean_velocity(traj: np.ndarray, t: int, rate: float, window: int):
    """Mean velocity over the ``window`` frames before ``t``; None if empty."""
    lo = max(0, t - window)
    if t - lo < 1:
        return None
    disp = traj[lo + 1: t + 1] - traj[lo: t]
    return disp.mean(axis=0) * rate


def continuity_violations(play: Play, receiver: tuple[str, int], params: ControlParams) -> np.ndarray:
    """Frame indices where the receiver moves farther than v_max allows."""
    traj = play.trajectory(receiver)
    step = np.linalg.norm(np.diff(traj, axis=0), axis=1)
    bound = params.attacker_motion.v_max / play.config.sample_rate + 1e-6
    return np.where(step > bound)[0]


@dataclass
class ScenarioValue:
    """V_scenario with its provenance: the V_frame series and the argmax window."""

    value: float
    argmax_frame: int  # play frame index where the best window starts
    series: np.ndarray  # V_frame from the initiation frame to the end
    offset: int = 0
    velocity_fallback: bool = False


def scenario_value(play_or_cf, receiver: tuple[str, int], grid_spec: GridSpec,
                   params: ControlParams, weights: WeightParams,
                   integration: IntegrationParams | None = None) -> ScenarioValue:
    """V_frame series from initiation onward and its best w-frame moving average."""
    if isinstance(play_or_cf, CounterfactualPlay):
        play = play_or_cf.play
        offset = play_or_cf.offset
        fallback = play_or_cf.velocity_fallback
    else:
        play = play_or_cf
        offset = 0
        fallback = False

    start = play.t0
    n = play.n_frames
    w = weights.window
    if n - start < w:
        raise FrameRangeError(
            f"need at least {w} frames after initiation, play has {n - start}")

    series = np.array([
        v_frame(play.snapshot(i), play.holder, receiver, grid_spec, params, weights, integration)
        for i in range(start, n)
    ])
    windows = np.convolve(series, np.ones(w) / w, mode="valid")
    best = int(np.argmax(windows))
    return ScenarioValue(value=float(windows[best]), argmax_frame=start + best,
                         series=series, offset=offset, velocity_fallback=fallback)


def v_scenario(play_or_cf, receiver: tuple[str, int], grid_spec: GridSpec,
               params: ControlParams, weights: WeightParams,
               integration: IntegrationParams | None = None) -> float:
    return scenario_value(play_or_cf, receiver, grid_spec, params, weights, integration).value


def timing_gap(scenario_values: dict[int, float]) -> float:
    """Realized minus best-counterfactual scenario value.

    ``scenario_values`` maps each offset to its V_scenario and must contain
    the realized offset 0 plus at least one alternative.
    """
    if 0 not in scenario_values:
        raise ParameterError("scenario values must include the realized offset 0")
    others = [v for xi, v in scenario_values.items() if xi != 0]
    if not others:
        raise ParameterError("timing gap needs at least one nonzero offset")
    return scenario_values[0] - max(others)


def v_timing(play: Play, receiver: tuple[str, int], grid_spec: GridSpec,
             params: ControlParams, weights: WeightParams,
             integration: IntegrationParams | None = None,
             xi_range=None) -> float:
    """Timing effectiveness of the realized initiation against shifted runs.

    Offsets that fall outside the play's frame range are skipped; at least
    one alternative must survive.
    """
    table = v_timing_table(play, receiver, grid_spec, params, weights, integration, xi_range)
    return timing_gap({xi: sv.value for xi, sv in table.items()})


def v_timing_table(play: Play, receiver: tuple[str, int], grid_spec: GridSpec,
                   params: ControlParams, weights: WeightParams,
                   integration: IntegrationParams | None = None,
                   xi_range=None) -> dict[int, ScenarioValue]:
    """Scenario values for every feasible offset in the range (0 included)."""
    offsets = tuple(xi_range) if xi_range is not None else weights.xi_range
    if 0 not in offsets:
        raise ParameterError("xi_range must contain the realized offset 0")
    table: dict[int, ScenarioValue] = {}
    for xi in sorted(offsets):
        try:
            cf = shift_trajectory(play, receiver, xi, params)
            table[xi] = scenario_value(cf, receiver, grid_spec, params, weights, integration)
        except FrameRangeError:
            if xi == 0:
                raise
    if len(table) < 2:
        raise FrameRangeError("no feasible nonzero offsets for this play")
    return table
