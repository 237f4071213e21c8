import numpy as np
import pytest

from conftest import random_frame, swap_mirror
from spacefield.config import sport_config
from spacefield.errors import DegenerateFrameError, InputError
from spacefield.obso import (
    ObsoParams,
    ScoreSurface,
    TransitionSurface,
    obso_surface,
    score_surface,
    transition_surface,
)
from spacefield.pitch_control import ControlGrid, ControlParams, GridSpec, ppcf_grid
from spacefield.space_data import FrameSnapshot


def full_control_grid(spec, value=1.0):
    shape = (spec.ny, spec.nx)
    return ControlGrid(spec=spec, attack=np.full(shape, value),
                       defend=np.zeros(shape),
                       converged=np.ones(shape, dtype=bool))


class TestTransition:
    def test_uniform_control_reduces_to_distance_kernel(self, soccer_cfg, small_grid):
        frame = FrameSnapshot(period=1, time=0.0,
                              home=np.zeros((11, 2)), away=np.zeros((11, 2)),
                              ball=np.array([5.0, -3.0]))
        params = ObsoParams(transition_scale=14.0)
        surf = transition_surface(frame, small_grid, params,
                                  control=full_control_grid(small_grid))
        cells = small_grid.cells()
        kernel = np.exp(-np.linalg.norm(cells - np.array([5.0, -3.0]), axis=1) / 14.0)
        kernel = (kernel / kernel.sum()).reshape(small_grid.ny, small_grid.nx)
        np.testing.assert_allclose(surf.values, kernel, atol=1e-12)

    def test_normalized_on_random_frames(self, soccer_cfg, soccer_params, rng, small_grid):
        for _ in range(3):
            frame = random_frame(rng, soccer_cfg)
            surf = transition_surface(frame, small_grid, ObsoParams(),
                                      control_params=soccer_params)
            assert surf.values.sum() == pytest.approx(1.0, abs=1e-9)
            assert np.all(surf.values >= 0)

    def test_argmax_near_ball_under_uniform_control(self, soccer_cfg, small_grid, rng):
        ball = rng.uniform((-30, -20), (30, 20))
        frame = FrameSnapshot(period=1, time=0.0,
                              home=np.zeros((11, 2)), away=np.zeros((11, 2)),
                              ball=np.asarray(ball))
        surf = transition_surface(frame, small_grid, ObsoParams(transition_scale=14.0),
                                  control=full_control_grid(small_grid))
        # brute force: the hottest cell is the one nearest the ball
        cells = small_grid.cells()
        flat = surf.values.ravel()
        assert np.argmax(flat) == np.argmin(np.linalg.norm(cells - ball, axis=1))
        best = cells[np.argmax(flat)]
        assert np.linalg.norm(best - ball) <= 14.0

    def test_zero_density_is_degenerate(self, soccer_cfg, small_grid):
        frame = FrameSnapshot(period=1, time=0.0,
                              home=np.zeros((11, 2)), away=np.zeros((11, 2)),
                              ball=np.array([0.0, 0.0]))
        with pytest.raises(DegenerateFrameError):
            transition_surface(frame, small_grid, ObsoParams(),
                               control=full_control_grid(small_grid, value=0.0))

    def test_missing_ball(self, soccer_cfg, small_grid):
        frame = FrameSnapshot(period=1, time=0.0,
                              home=np.zeros((11, 2)), away=np.zeros((11, 2)),
                              ball=np.array([np.nan, np.nan]))
        with pytest.raises(InputError):
            transition_surface(frame, small_grid, ObsoParams(),
                               control=full_control_grid(small_grid))


class TestScore:
    def test_endzone_cells_score_certainly(self, ultimate_cfg):
        spec = GridSpec.from_sport(ultimate_cfg)
        surf = score_surface(ultimate_cfg, spec, ObsoParams.from_sport(ultimate_cfg))
        cells = spec.cells().reshape(spec.ny, spec.nx, 2)
        front = ultimate_cfg.half_length - ultimate_cfg.endzone_depth
        inside = cells[..., 0] >= front
        assert inside.any()
        assert np.all(surf.values[inside] == 1.0)

    def test_decay_outside_endzone(self, ultimate_cfg):
        spec = GridSpec.from_sport(ultimate_cfg)
        params = ObsoParams.from_sport(ultimate_cfg)
        surf = score_surface(ultimate_cfg, spec, params)
        cells = spec.cells().reshape(spec.ny, spec.nx, 2)
        front = ultimate_cfg.half_length - ultimate_cfg.endzone_depth
        outside = cells[..., 0] < front
        d = front - cells[..., 0][outside]
        np.testing.assert_allclose(surf.values[outside], np.exp(-d / params.endzone_decay),
                                   atol=1e-12)

    def test_soccer_midpoint_distance_scores_half(self):
        cfg = sport_config("soccer", field_length=36.0, field_width=20.0)
        spec = GridSpec(nx=1, ny=1, field_length=36.0, field_width=20.0)
        surf = score_surface(cfg, spec, ObsoParams(score_midpoint=18.0))
        # the lone cell center sits exactly 18 m from the goal center
        assert surf.values[0, 0] == pytest.approx(0.5, abs=1e-12)

    def test_symmetric_about_long_axis(self, soccer_cfg):
        spec = GridSpec.from_sport(soccer_cfg)
        surf = score_surface(soccer_cfg, spec, ObsoParams())
        np.testing.assert_allclose(surf.values, surf.values[::-1, :], atol=1e-12)

    def test_nonincreasing_along_rays_from_goal(self, soccer_cfg):
        spec = GridSpec.from_sport(soccer_cfg)
        surf = score_surface(soccer_cfg, spec, ObsoParams())
        # along each grid row, moving away from the goal never increases the score
        row = surf.values[spec.ny // 2]
        assert np.all(np.diff(row) >= -1e-15)  # goal is at +x: increasing toward it


class TestObso:
    def test_zero_score_annihilates(self, soccer_cfg, soccer_params, rng, small_grid):
        frame = random_frame(rng, soccer_cfg)
        zero_score = ScoreSurface(spec=small_grid,
                                  values=np.zeros((small_grid.ny, small_grid.nx)),
                                  sport="soccer")
        result = obso_surface(frame, small_grid, soccer_cfg, control_params=soccer_params,
                              score=zero_score)
        assert result.total == 0.0
        assert np.all(result.values == 0.0)

    def test_uniform_score_and_transition_identity(self, soccer_cfg, soccer_params, rng,
                                                   small_grid):
        frame = random_frame(rng, soccer_cfg)
        control = ppcf_grid(frame, small_grid, soccer_params)
        n = small_grid.n_cells
        c = 0.37
        uniform_score = ScoreSurface(spec=small_grid,
                                     values=np.full((small_grid.ny, small_grid.nx), c),
                                     sport="soccer")
        uniform_tr = TransitionSurface(spec=small_grid,
                                       values=np.full((small_grid.ny, small_grid.nx), 1.0 / n),
                                       norm_const=1.0)
        result = obso_surface(frame, small_grid, soccer_cfg, control=control,
                              transition=uniform_tr, score=uniform_score)
        brute = sum(c * control.attack[iy, ix] / n
                    for iy in range(small_grid.ny) for ix in range(small_grid.nx))
        assert result.total == pytest.approx(brute, abs=1e-12)
        assert result.total == pytest.approx(c * control.attack.mean(), abs=1e-12)

    def test_total_is_probability(self, soccer_cfg, soccer_params, rng, small_grid):
        for _ in range(3):
            frame = random_frame(rng, soccer_cfg)
            result = obso_surface(frame, small_grid, soccer_cfg, control_params=soccer_params)
            assert 0.0 <= result.total <= 1.0

    def test_total_bounded_by_max_score(self, soccer_cfg, soccer_params, rng, small_grid):
        frame = random_frame(rng, soccer_cfg)
        score = score_surface(soccer_cfg, small_grid, ObsoParams())
        result = obso_surface(frame, small_grid, soccer_cfg, control_params=soccer_params,
                              score=score)
        assert result.total <= score.values.max() + 1e-12

    def test_boosting_control_never_hurts(self, soccer_cfg, soccer_params, rng, small_grid):
        frame = random_frame(rng, soccer_cfg)
        control = ppcf_grid(frame, small_grid, soccer_params)
        transition = transition_surface(frame, small_grid, ObsoParams(), control=control)
        score = score_surface(soccer_cfg, small_grid, ObsoParams())
        base = obso_surface(frame, small_grid, soccer_cfg, control=control,
                            transition=transition, score=score)
        boosted_grid = ControlGrid(spec=small_grid,
                                   attack=np.minimum(1.0, control.attack + 0.05),
                                   defend=np.zeros_like(control.defend),
                                   converged=control.converged)
        boosted = obso_surface(frame, small_grid, soccer_cfg, control=boosted_grid,
                               transition=transition, score=score)
        assert boosted.total >= base.total - 1e-12

    def test_possession_flip_consistency(self, soccer_cfg, rng, small_grid):
        # attacking the -x goal with the original frame must value the same as
        # attacking +x with the mirrored frame
        frame = random_frame(rng, soccer_cfg)
        score_px = score_surface(soccer_cfg, small_grid, ObsoParams())
        score_mx = ScoreSurface(spec=small_grid, values=score_px.values[::-1, ::-1].copy(),
                                sport="soccer")
        params_home = ControlParams.from_sport(soccer_cfg)
        direct = obso_surface(frame, small_grid, soccer_cfg, control_params=params_home,
                              score=score_mx)
        params_away = ControlParams.from_sport(soccer_cfg, attacking_team="Away")
        mirrored = obso_surface(swap_mirror(frame), small_grid, soccer_cfg,
                                control_params=params_away, score=score_px)
        assert direct.total == pytest.approx(mirrored.total, abs=1e-9)
