import numpy as np
import pytest

from conftest import duel_frame, random_frame, swap_mirror
from oracles import rk4_delivery_race
from spacefield.bimos import (
    PBCFParams,
    bimos_surface,
    find_carrier,
    pbcf_at,
    pbcf_surface,
)
from spacefield.errors import InputError, ParameterError
from spacefield.obso import ObsoParams, score_surface
from spacefield.pitch_control import ControlParams, GridSpec, IntegrationParams
from spacefield.space_data import FrameSnapshot


class TestPbcfPoint:
    def test_degenerate_target_at_ball(self, soccer_cfg, soccer_params):
        frame = duel_frame(soccer_cfg, (5.0, 0.0), (8.0, 3.0), ball=(2.0, 2.0))
        d = pbcf_at(frame, (2.0, 2.0), soccer_params)
        assert d.degenerate
        assert d.attack_total == 0.0 and d.defend_total == 0.0

    def test_open_receiver_on_long_flight_wins(self, soccer_cfg, soccer_params):
        # defender parked far away; receiver waits at the end of a ~100 m pass
        frame = duel_frame(soccer_cfg, attacker=(50.0, 30.0), defender=(-50.0, 30.0),
                           ball=(-50.0, -32.0))
        d = pbcf_at(frame, (50.0, 30.0), soccer_params)
        assert d.attack_total >= 0.95
        oracle = rk4_delivery_race(frame, np.array([[50.0, 30.0]]), soccer_params,
                                   soccer_params.ball.speed)
        got = np.concatenate([d.attack, d.defend])
        assert np.abs(got - oracle[:, 0]).max() < 1e-3

    def test_on_path_defender_beats_far_receiver(self, soccer_cfg, soccer_params):
        # the ball must travel through the defender to reach the receiver
        frame = duel_frame(soccer_cfg, attacker=(40.0, 0.0), defender=(15.0, 0.0),
                           ball=(-10.0, 0.0))
        d = pbcf_at(frame, (40.0, 0.0), soccer_params)
        assert d.defend_total > d.attack_total
        oracle = rk4_delivery_race(frame, np.array([[40.0, 0.0]]), soccer_params,
                                   soccer_params.ball.speed)
        got = np.concatenate([d.attack, d.defend])
        assert np.abs(got - oracle[:, 0]).max() < 1e-3

    def test_missing_ball(self, soccer_cfg, soccer_params):
        frame = duel_frame(soccer_cfg, (0.0, 0.0), (5.0, 5.0), (np.nan, np.nan))
        with pytest.raises(InputError):
            pbcf_at(frame, (3.0, 3.0), soccer_params)


class TestPbcfSurface:
    def test_mirror_symmetry(self, soccer_cfg, rng, small_grid):
        frame = random_frame(rng, soccer_cfg)
        grid = pbcf_surface(frame, small_grid, ControlParams.from_sport(soccer_cfg))
        m_params = ControlParams.from_sport(soccer_cfg, attacking_team="Away")
        m_grid = pbcf_surface(swap_mirror(frame), small_grid, m_params)
        np.testing.assert_allclose(m_grid.mirrored().attack, grid.attack, atol=1e-9)
        np.testing.assert_allclose(m_grid.mirrored().defend, grid.defend, atol=1e-9)

    def test_race_exhaustiveness_bound(self, soccer_cfg, soccer_params, rng, small_grid):
        frame = random_frame(rng, soccer_cfg)
        grid = pbcf_surface(frame, small_grid, soccer_params)
        assert np.all(grid.attack + grid.defend <= 1 + 1e-6)
        assert np.all(grid.attack >= 0) and np.all(grid.defend >= 0)

    def test_coarse_vs_fine_steps(self, soccer_cfg, soccer_params, rng):
        frame = random_frame(rng, soccer_cfg)
        targets = rng.uniform((-45, -28), (45, 28), (8, 2))
        oracle = rk4_delivery_race(frame, targets, soccer_params, soccer_params.ball.speed)
        for c, target in enumerate(targets):
            d = pbcf_at(frame, target, soccer_params, IntegrationParams(early_exit=1.0))
            got = np.concatenate([d.attack, d.defend])
            assert np.abs(got - oracle[:, c]).max() < 1e-3

    def test_ball_at_cell_center_flagged_degenerate(self, soccer_cfg, soccer_params):
        spec = GridSpec(nx=5, ny=3, field_length=soccer_cfg.field_length,
                        field_width=soccer_cfg.field_width)
        center = spec.cells().reshape(3, 5, 2)[1, 2]
        frame = duel_frame(soccer_cfg, (10.0, 5.0), (-10.0, -5.0), ball=center)
        grid = pbcf_surface(frame, spec, soccer_params)
        assert not grid.converged[1, 2]
        assert grid.attack[1, 2] == 0.0

    def test_inserting_on_path_defender_never_helps_attack(self, soccer_cfg, rng):
        # the BIMOS interception property, randomized along the path
        params = ControlParams.from_sport(soccer_cfg)
        ball = np.array([-20.0, -10.0])
        target = np.array([25.0, 15.0])
        K = soccer_cfg.players_per_side
        for _ in range(20):
            home = rng.uniform((-50, -32), (50, 32), (K, 2))
            away = np.tile(np.array([400.0, 0.0]), (K, 1)) + np.arange(K)[:, None] * (0.0, 3.0)
            base_frame = FrameSnapshot(period=1, time=0.0, home=home, away=away.copy(),
                                       ball=ball)
            base = pbcf_at(base_frame, target, params).attack_total
            t = rng.uniform(0.05, 0.95)
            away2 = away.copy()
            away2[0] = ball + t * (target - ball)  # exactly on the delivery segment
            frame2 = FrameSnapshot(period=1, time=0.0, home=home, away=away2, ball=ball)
            withdef = pbcf_at(frame2, target, params).attack_total
            assert withdef <= base + 1e-9

    def test_attacker_control_monotone_in_defender_distance(self, soccer_cfg, soccer_params):
        ball = (0.0, 0.0)
        target = (30.0, 0.0)
        values = []
        for off in (0.0, 3.0, 8.0, 20.0):
            frame = duel_frame(soccer_cfg, attacker=(30.0, 0.0), defender=(15.0, off),
                               ball=ball)
            values.append(pbcf_at(frame, target, soccer_params).attack_total)
        assert all(b >= a - 1e-9 for a, b in zip(values, values[1:]))
        assert all(0 <= v <= 1 for v in values)


class TestBimos:
    def test_zero_dribble_weight_equals_pass_component(self, soccer_cfg, rng, small_grid):
        frame = random_frame(rng, soccer_cfg)
        pb = PBCFParams(pass_weight=1.0, dribble_weight=0.0)
        result = bimos_surface(frame, small_grid, soccer_cfg, pbcf_params=pb)
        np.testing.assert_array_equal(result.values, result.pass_component)

    def test_mixture_recombination_is_exact(self, soccer_cfg, rng, small_grid):
        frame = random_frame(rng, soccer_cfg)
        pb = PBCFParams(pass_weight=0.8, dribble_weight=0.2)
        result = bimos_surface(frame, small_grid, soccer_cfg, pbcf_params=pb)
        recombined = 0.8 * result.pass_component + 0.2 * result.dribble_component
        np.testing.assert_array_equal(result.values, recombined)

    def test_equal_weights_is_cellwise_mean(self, soccer_cfg, rng, small_grid):
        frame = random_frame(rng, soccer_cfg)
        pb = PBCFParams(pass_weight=0.5, dribble_weight=0.5)
        result = bimos_surface(frame, small_grid, soccer_cfg, pbcf_params=pb)
        mean = (result.pass_component + result.dribble_component) / 2.0
        np.testing.assert_allclose(result.values, mean, atol=1e-15)

    def test_max_mode_with_identical_components(self, soccer_cfg, rng, small_grid):
        frame = random_frame(rng, soccer_cfg)
        # dribble configured to coincide with the pass: same speed, all
        # attackers, unlimited range
        pb = PBCFParams(dribble_speed=soccer_cfg.ball.speed, dribble_attackers="all",
                        dribble_radius=500.0, combine="max")
        result = bimos_surface(frame, small_grid, soccer_cfg, pbcf_params=pb)
        np.testing.assert_allclose(result.values, result.pass_component, atol=1e-12)
        np.testing.assert_allclose(result.pass_component, result.dribble_component,
                                   atol=1e-12)

    def test_max_mode_takes_cellwise_max(self, soccer_cfg, rng, small_grid):
        frame = random_frame(rng, soccer_cfg)
        pb = PBCFParams(combine="max")
        result = bimos_surface(frame, small_grid, soccer_cfg, pbcf_params=pb)
        np.testing.assert_array_equal(
            result.values, np.maximum(result.pass_component, result.dribble_component))

    def test_scalar_is_mean_over_cells(self, soccer_cfg, rng, small_grid):
        frame = random_frame(rng, soccer_cfg)
        result = bimos_surface(frame, small_grid, soccer_cfg)
        assert result.total == pytest.approx(result.values.mean(), abs=1e-15)

    def test_dribble_radius_masks_far_cells(self, soccer_cfg, rng, small_grid):
        frame = random_frame(rng, soccer_cfg)
        params = ControlParams.from_sport(soccer_cfg)
        carrier = find_carrier(frame, "Home")
        pb = PBCFParams(dribble_radius=10.0)
        result = bimos_surface(frame, small_grid, soccer_cfg, params=params, pbcf_params=pb,
                               carrier=carrier)
        cells = small_grid.cells().reshape(small_grid.ny, small_grid.nx, 2)
        far = np.linalg.norm(cells - frame.home[carrier][None, None, :], axis=-1) > 10.0
        assert np.all(result.dribble_component[far] == 0.0)

    def test_score_shared_with_obso(self, soccer_cfg, rng, small_grid):
        frame = random_frame(rng, soccer_cfg)
        score = score_surface(soccer_cfg, small_grid, ObsoParams())
        result = bimos_surface(frame, small_grid, soccer_cfg, score=score)
        assert np.all(result.pass_component <= score.values + 1e-12)

    def test_param_validation(self):
        with pytest.raises(ParameterError):
            PBCFParams(pass_weight=0.5, dribble_weight=0.2)  # must sum to 1
        with pytest.raises(ParameterError):
            PBCFParams(dribble_speed=0.0)
        with pytest.raises(ParameterError):
            PBCFParams(combine="average")
        with pytest.raises(ParameterError):
            PBCFParams(dribble_attackers="everyone")
