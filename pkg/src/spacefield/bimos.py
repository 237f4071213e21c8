"""Ball-delivery-aware control (PBCF) and the BIMOS opportunity composition.

PBCF re-runs the control race against the *moving* ball: the target of every
player's pursuit at time T is the ball's position T seconds into its straight
constant-speed delivery, and the integration runs only while the ball is in
flight (0 <= T <= T_flight). A defender parked on the delivery path therefore
gets its interception chance counted, which a fixed-target race misses.

BIMOS composes a score surface with PBCF for a pass and for a dribble
(slower ball, attacker set reduced to the carrier, limited range), combined
by fixed weights or by the per-cell maximum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ._util import params_hash
from .config import SportConfig
from .errors import InputError, ParameterError
from .kinematics import SQRT3, _EXP_CLIP
from .obso import ObsoParams, ScoreSurface, score_surface
from .pitch_control import (
    ControlGrid,
    ControlParams,
    GridSpec,
    IntegrationParams,
    _side_arrays,
)
from .space_data import FrameSnapshot


@dataclass(frozen=True)
class PBCFParams:
    """Delivery speeds, the dribble variant and how the two are combined."""

    pass_speed: float | None = None  # m/s; None = the sport's ball speed
    dribble_speed: float = 7.0  # m/s
    dribble_attackers: str = "carrier"  # "carrier" or "all"
    dribble_radius: float = 15.0  # m: farthest dribble target from the carrier
    pass_weight: float = 0.8
    dribble_weight: float = 0.2
    combine: str = "mix"  # "mix" (weighted sum) or "max"

    def __post_init__(self):
        if self.pass_speed is not None and not (self.pass_speed > 0):
            raise ParameterError("pass_speed must be > 0")
        if not (self.dribble_speed > 0):
            raise ParameterError("dribble_speed must be > 0")
        if self.dribble_attackers not in ("carrier", "all"):
            raise ParameterError("dribble_attackers must be 'carrier' or 'all'")
        if not (self.dribble_radius > 0):
            raise ParameterError("dribble_radius must be > 0")
        if self.combine not in ("mix", "max"):
            raise ParameterError("combine must be 'mix' or 'max'")
        if self.combine == "mix":
            if self.pass_weight < 0 or self.dribble_weight < 0:
                raise ParameterError("mixture weights must be nonnegative")
            if abs(self.pass_weight + self.dribble_weight - 1.0) > 1e-9:
                raise ParameterError("mixture weights must sum to 1")


@dataclass
class DeliveryControl:
    """Per-team interception/reception probabilities for one delivery."""

    attack: np.ndarray  # per attacking player in the race
    defend: np.ndarray  # per defending player
    t_flight: float
    degenerate: bool  # True when the target coincides with the ball

    @property
    def attack_total(self) -> float:
        return float(self.attack.sum())

    @property
    def defend_total(self) -> float:
        return float(self.defend.sum())


def _moving_ball_race(start, lam, sig, v_max, reaction, is_attacker, origin, cells,
                      ball_speed, integration: IntegrationParams, skip_cells=None):
    """Race every cell's delivery simultaneously against the moving ball.

    ``start`` holds each player's post-reaction position; expected arrival is
    re-evaluated every step against the ball's current flight position.
    """
    n_players = len(start)
    n_cells = len(cells)
    delta = cells - origin[None, :]
    dist = np.linalg.norm(delta, axis=1)
    t_flight = dist / ball_speed
    with np.errstate(invalid="ignore", divide="ignore"):
        dirs = np.where(dist[:, None] > 0, delta / np.maximum(dist, 1e-300)[:, None], 0.0)

    accum = np.zeros((n_players, n_cells))
    total = np.zeros(n_cells)
    dt = integration.dt
    alive = t_flight > 0
    if skip_cells is not None:
        alive &= ~skip_cells
    degenerate = t_flight <= 0

    lam_col = lam[:, None]
    sig_col = sig[:, None]
    vmax_col = v_max[:, None]
    n_steps = int(math.ceil(float(t_flight.max(initial=0.0)) / dt)) + 1

    for k in range(n_steps):
        if not alive.any():
            break
        idx = np.where(alive)[0]
        T = k * dt
        step = np.minimum(dt, t_flight[idx] - T)
        done = step <= 0
        if done.any():
            alive[idx[done]] = False
            idx = idx[~done]
            if idx.size == 0:
                continue
            step = step[~done]

        # midpoint forcing against the ball's mid-step flight position,
        # exact integration of the shared saturation factor (as in _race)
        t_mid = T + step / 2.0
        ball_now = origin[None, :] + dirs[idx] * (ball_speed * t_mid[:, None])
        gap = np.linalg.norm(ball_now[None, :, :] - start[:, None, :], axis=-1)
        tau = reaction[:, None] + gap / vmax_col
        x = np.clip(np.pi * (t_mid[None, :] - tau) / (SQRT3 * sig_col), -_EXP_CLIP, _EXP_CLIP)
        f = 1.0 / (1.0 + np.exp(-x))
        rates = f * lam_col
        g = rates.sum(axis=0)
        gain = -np.expm1(-g * step)
        with np.errstate(divide="ignore", invalid="ignore"):
            share = np.where(g > 0, rates / np.maximum(g, 1e-300), 0.0)
        delta = (1.0 - total[idx])[None, :] * gain[None, :] * share
        accum[:, idx] += delta
        total[idx] += delta.sum(axis=0)

        saturated = total[idx] >= integration.early_exit
        if saturated.any():
            alive[idx[saturated]] = False

    return accum, total, t_flight, degenerate


def _stacked_players(frame: FrameSnapshot, params: ControlParams, attacker_subset=None):
    pos, vel, lam, sig, is_attacker, att_motion, def_motion, att_idx, def_idx = _side_arrays(
        frame, params)
    v_max = np.where(is_attacker, att_motion.v_max, def_motion.v_max)
    reaction = np.where(is_attacker, att_motion.reaction_time, def_motion.reaction_time)
    start = pos + vel * reaction[:, None]
    if attacker_subset is not None:
        keep = ~is_attacker
        att_rows = np.where(is_attacker)[0]
        slot_to_row = {int(s): int(r) for s, r in zip(att_idx, att_rows)}
        for slot in attacker_subset:
            keep[slot_to_row[int(slot)]] = True
        start, lam, sig = start[keep], lam[keep], sig[keep]
        v_max, reaction = v_max[keep], reaction[keep]
        is_attacker = is_attacker[keep]
    return start, lam, sig, v_max, reaction, is_attacker


def find_carrier(frame: FrameSnapshot, attacking_team: str) -> int:
    """Index of the attacker nearest the ball: the presumed carrier."""
    ball = np.asarray(frame.ball, dtype=float)
    if np.isnan(ball).any():
        raise InputError("cannot identify a carrier without a ball position")
    pos = frame.positions(attacking_team)
    d = np.linalg.norm(pos - ball[None, :], axis=1)
    if np.isnan(d).all():
        raise InputError("no attacker positions available to pick a carrier")
    return int(np.nanargmin(d))


def pbcf_at(frame: FrameSnapshot, target, params: ControlParams,
            integration: IntegrationParams | None = None,
            ball_speed: float | None = None,
            attacker_subset=None) -> DeliveryControl:
    """Control of a single delivery from the ball's position to ``target``.

    Integration covers only the flight window; a target equal to the ball
    position yields a degenerate zero-length delivery with zero control.
    """
    integration = integration or IntegrationParams()
    origin = np.asarray(frame.ball, dtype=float)
    if np.isnan(origin).any():
        raise InputError("missing ball position for the delivery computation")
    cells = np.asarray(target, dtype=float).reshape(1, 2)
    start, lam, sig, v_max, reaction, is_attacker = _stacked_players(frame, params, attacker_subset)
    accum, _, t_flight, degenerate = _moving_ball_race(
        start, lam, sig, v_max, reaction, is_attacker, origin, cells,
        ball_speed or params.ball.speed, integration)
    return DeliveryControl(
        attack=accum[is_attacker, 0].copy(),
        defend=accum[~is_attacker, 0].copy(),
        t_flight=float(t_flight[0]),
        degenerate=bool(degenerate[0]),
    )


def pbcf_surface(frame: FrameSnapshot, grid_spec: GridSpec, params: ControlParams,
                 integration: IntegrationParams | None = None,
                 ball_speed: float | None = None,
                 attacker_subset=None,
                 extra_mask: np.ndarray | None = None,
                 model_id: str = "pbcf") -> ControlGrid:
    """Delivery control for every grid cell as the target."""
    integration = integration or IntegrationParams()
    origin = np.asarray(frame.ball, dtype=float)
    if np.isnan(origin).any():
        raise InputError("missing ball position for the delivery computation")

    cells = grid_spec.cells()
    skip = grid_spec.flat_mask()
    if extra_mask is not None:
        skip = skip | extra_mask.ravel()
    start, lam, sig, v_max, reaction, is_attacker = _stacked_players(frame, params, attacker_subset)
    accum, _, t_flight, degenerate = _moving_ball_race(
        start, lam, sig, v_max, reaction, is_attacker, origin, cells,
        ball_speed or params.ball.speed, integration, skip_cells=skip)

    shape = (grid_spec.ny, grid_spec.nx)
    ok = (~degenerate) & (~skip)
    return ControlGrid(
        spec=grid_spec,
        attack=accum[is_attacker].sum(axis=0).reshape(shape),
        defend=accum[~is_attacker].sum(axis=0).reshape(shape),
        converged=ok.reshape(shape),
        metadata={
            "model": model_id,
            "params": params_hash(params, integration),
            "frame_time": frame.time,
            "attacking_team": params.attacking_team,
        },
    )


@dataclass
class BimosResult:
    """Combined pass/dribble opportunity field and its per-cell-mean scalar."""

    spec: GridSpec
    values: np.ndarray
    total: float  # mean over unmasked cells (a continuum sum, discretized)
    pass_component: np.ndarray
    dribble_component: np.ndarray
    metadata: dict = field(default_factory=dict)


def bimos_surface(frame: FrameSnapshot, grid_spec: GridSpec, sport_config: SportConfig,
                  params: ControlParams | None = None,
                  pbcf_params: PBCFParams | None = None,
                  integration: IntegrationParams | None = None,
                  obso_params: ObsoParams | None = None,
                  score: ScoreSurface | None = None,
                  carrier: int | None = None) -> BimosResult:
    """Score x delivery-control opportunity with pass and dribble routes.

    The dribble route uses the slower dribble speed, restricts targets to
    ``dribble_radius`` around the carrier, and (by default) lets only the
    carrier contest the reception. Components combine by the configured
    mixture weights or per-cell maximum.
    """
    params = params or ControlParams.from_sport(sport_config)
    pbcf_params = pbcf_params or PBCFParams()
    obso_params = obso_params or ObsoParams.from_sport(sport_config)
    if score is None:
        score = score_surface(sport_config, grid_spec, obso_params)
    if carrier is None:
        carrier = find_carrier(frame, params.attacking_team)

    pass_speed = pbcf_params.pass_speed or params.ball.speed
    pass_grid = pbcf_surface(frame, grid_spec, params, integration, ball_speed=pass_speed,
                             model_id="pbcf_pass")

    cells = grid_spec.cells()
    carrier_pos = frame.positions(params.attacking_team)[carrier]
    too_far = (np.linalg.norm(cells - carrier_pos[None, :], axis=1)
               > pbcf_params.dribble_radius)
    subset = [carrier] if pbcf_params.dribble_attackers == "carrier" else None
    dribble_grid = pbcf_surface(
        frame, grid_spec, params, integration,
        ball_speed=pbcf_params.dribble_speed,
        attacker_subset=subset,
        extra_mask=too_far.reshape(grid_spec.ny, grid_spec.nx),
        model_id="pbcf_dribble",
    )

    pass_component = score.values * pass_grid.attack
    dribble_component = score.values * dribble_grid.attack
    if pbcf_params.combine == "mix":
        values = pbcf_params.pass_weight * pass_component + pbcf_params.dribble_weight * dribble_component
    else:
        values = np.maximum(pass_component, dribble_component)

    unmasked = ~grid_spec.flat_mask().reshape(grid_spec.ny, grid_spec.nx)
    total = float(values[unmasked].mean()) if unmasked.any() else 0.0
    return BimosResult(
        spec=grid_spec,
        values=values,
        total=total,
        pass_component=pass_component,
        dribble_component=dribble_component,
        metadata={
            "model": "bimos",
            "params": params_hash(params, pbcf_params, obso_params),
            "frame_time": frame.time,
            "combine": pbcf_params.combine,
            "scalar_convention": "per-cell mean of the combined field",
        },
    )
