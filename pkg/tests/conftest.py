import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from spacefield.config import sport_config
from spacefield.pitch_control import ControlParams, GridSpec
from spacefield.space_data import FrameSnapshot

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture
def soccer_cfg():
    return sport_config("soccer")


@pytest.fixture
def ultimate_cfg():
    return sport_config("ultimate")


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_frame(rng, cfg, margin=2.0, ball=None):
    """Uniformly scattered full frame inside the field bounds."""
    lo = (-cfg.half_length + margin, -cfg.half_width + margin)
    hi = (cfg.half_length - margin, cfg.half_width - margin)
    K = cfg.players_per_side
    return FrameSnapshot(
        period=1,
        time=0.0,
        home=rng.uniform(lo, hi, (K, 2)),
        away=rng.uniform(lo, hi, (K, 2)),
        ball=np.asarray(ball if ball is not None else rng.uniform(lo, hi), dtype=float),
    )


def swap_mirror(frame: FrameSnapshot) -> FrameSnapshot:
    """Point-mirror every position and swap the teams."""
    m = frame.mirrored()
    return FrameSnapshot(period=m.period, time=m.time,
                         home=m.away, away=m.home, ball=m.ball,
                         home_velocity=m.away_velocity, away_velocity=m.home_velocity)


def duel_frame(cfg, attacker, defender, ball, K=None):
    """Frame where one attacker and one defender matter; the rest are parked
    far behind their own end line (outside any reachable horizon)."""
    K = K or cfg.players_per_side
    home = np.tile(np.array([-400.0, 0.0]), (K, 1)) + np.arange(K)[:, None] * (0.0, 3.0)
    away = np.tile(np.array([400.0, 0.0]), (K, 1)) + np.arange(K)[:, None] * (0.0, 3.0)
    home[0] = attacker
    away[0] = defender
    return FrameSnapshot(period=1, time=0.0, home=home, away=away,
                         ball=np.asarray(ball, dtype=float))


@pytest.fixture
def small_grid(soccer_cfg):
    return GridSpec(nx=15, ny=10, field_length=soccer_cfg.field_length,
                    field_width=soccer_cfg.field_width)


@pytest.fixture
def soccer_params(soccer_cfg):
    return ControlParams.from_sport(soccer_cfg)
