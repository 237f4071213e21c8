"""Off-ball scoring opportunity: score x control x transition over the field.

The scalar opportunity for a frame is the sum over grid cells of three
independent per-cell factors: the probability the next on-ball event happens
there (transition), the probability the attack would control the ball there
(pitch control), and the probability of scoring from there (score model).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._util import params_hash
from .config import SportConfig
from .errors import DegenerateFrameError, InputError
from .pitch_control import ControlGrid, ControlParams, GridSpec, IntegrationParams, ppcf_grid
from .space_data import FrameSnapshot


@dataclass(frozen=True)
class ObsoParams:
    """Transition-kernel and score-model parameters (attack toward +x)."""

    transition_scale: float = 14.0  # m: exponential range of the next event
    score_midpoint: float = 18.0  # m: goal distance where scoring odds hit 0.5
    score_steepness: float = 4.0  # m: logistic width of the score falloff
    endzone_decay: float = 25.0  # m: score decay outside an end zone

    @classmethod
    def from_sport(cls, cfg: SportConfig) -> "ObsoParams":
        if cfg.sport == "ultimate":
            return cls(transition_scale=18.0)
        if cfg.sport == "basketball":
            return cls(transition_scale=8.0, score_midpoint=6.75, score_steepness=2.0)
        return cls()


@dataclass
class TransitionSurface:
    """Normalized probability that the next on-ball event lands in each cell."""

    spec: GridSpec
    values: np.ndarray  # (ny, nx), sums to 1 over unmasked cells
    norm_const: float


@dataclass
class ScoreSurface:
    """Probability of scoring from each cell, for the +x attacking direction."""

    spec: GridSpec
    values: np.ndarray
    sport: str


def transition_surface(frame: FrameSnapshot, grid_spec: GridSpec, params: ObsoParams,
                       control: ControlGrid | None = None,
                       control_params: ControlParams | None = None,
                       integration: IntegrationParams | None = None) -> TransitionSurface:
    """Exponential distance kernel from the ball, shaped by attacker control.

    ``control`` may be passed to reuse an already computed surface; otherwise
    a PPCF grid is solved with ``control_params``.
    """
    if np.isnan(np.asarray(frame.ball, dtype=float)).any():
        raise InputError("transition surface needs a ball position")
    if control is None:
        control = ppcf_grid(frame, grid_spec, control_params or ControlParams(), integration)

    cells = grid_spec.cells()
    dist = np.linalg.norm(cells - np.asarray(frame.ball)[None, :], axis=1)
    density = np.exp(-dist / params.transition_scale).reshape(grid_spec.ny, grid_spec.nx)
    density = density * control.attack
    masked = grid_spec.mask
    if masked is not None:
        density = np.where(masked, 0.0, density)
    total = float(density.sum())
    if total <= 0.0:
        raise DegenerateFrameError("transition density is zero everywhere (no attacker control)")
    return TransitionSurface(spec=grid_spec, values=density / total, norm_const=total)


def score_surface(sport_config: SportConfig, grid_spec: GridSpec, params: ObsoParams) -> ScoreSurface:
    """Fixed parametric scoring probability per cell.

    Soccer/basketball: logistic falloff with distance to the goal center on
    the +x end line. Ultimate: 1 inside the attacking end zone, exponential
    decay with distance to the end-zone front line outside it.
    """
    cells = grid_spec.cells()
    if sport_config.endzone_depth > 0:
        front_x = sport_config.half_length - sport_config.endzone_depth
        d = np.maximum(0.0, front_x - cells[:, 0])
        values = np.where(cells[:, 0] >= front_x, 1.0, np.exp(-d / params.endzone_decay))
    else:
        goal = np.array(sport_config.attack_target)
        d = np.linalg.norm(cells - goal[None, :], axis=1)
        values = 1.0 / (1.0 + np.exp((d - params.score_midpoint) / params.score_steepness))
    return ScoreSurface(
        spec=grid_spec,
        values=values.reshape(grid_spec.ny, grid_spec.nx),
        sport=sport_config.sport,
    )


@dataclass
class ObsoResult:
    """Per-cell opportunity field plus its scalar total for the frame."""

    spec: GridSpec
    values: np.ndarray  # (ny, nx)
    total: float
    metadata: dict = field(default_factory=dict)


def obso_surface(frame: FrameSnapshot, grid_spec: GridSpec, sport_config: SportConfig,
                 params: ObsoParams | None = None,
                 control_params: ControlParams | None = None,
                 integration: IntegrationParams | None = None,
                 control: ControlGrid | None = None,
                 transition: TransitionSurface | None = None,
                 score: ScoreSurface | None = None) -> ObsoResult:
    """Compose score, control and transition into the opportunity field.

    Any component may be supplied precomputed; missing ones are built from
    the frame with the given parameters.
    """
    params = params or ObsoParams.from_sport(sport_config)
    control_params = control_params or ControlParams.from_sport(sport_config)
    if control is None:
        control = ppcf_grid(frame, grid_spec, control_params, integration)
    if transition is None:
        transition = transition_surface(frame, grid_spec, params, control=control)
    if score is None:
        score = score_surface(sport_config, grid_spec, params)

    values = score.values * control.attack * transition.values
    masked = grid_spec.mask
    if masked is not None:
        values = np.where(masked, 0.0, values)
    return ObsoResult(
        spec=grid_spec,
        values=values,
        total=float(values.sum()),
        metadata={
            "model": "obso",
            "params": params_hash(params, control_params),
            "frame_time": frame.time,
        },
    )
