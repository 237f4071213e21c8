import numpy as np
import pytest
from PIL import Image

from conftest import DATA_DIR
from spacefield.errors import ValidationError
from spacefield.pitch_control import ControlGrid, GridSpec
from spacefield.render import RenderStyle, render_array, render_heatmap
from spacefield.space_data import FrameSnapshot


def toy_grid():
    spec = GridSpec(nx=10, ny=6, field_length=50.0, field_width=30.0)
    iy, ix = np.mgrid[0:6, 0:10]
    attack = (ix / 9.0) * 0.8
    defend = (1 - ix / 9.0) * 0.5
    return ControlGrid(spec=spec, attack=attack, defend=defend,
                       converged=np.ones((6, 10), dtype=bool),
                       metadata={"model": "ppcf", "params": "feedbeefcafe",
                                 "frame_time": 1.5})


def toy_frame():
    home = np.array([[-15.0, -5.0], [-5.0, 8.0], [2.0, -9.0]])
    away = np.array([[10.0, 3.0], [18.0, -6.0], [-2.0, 1.0]])
    return FrameSnapshot(period=1, time=1.5, home=home, away=away,
                         ball=np.array([0.0, 0.0]))


def empty_frame():
    nan2 = np.full((3, 2), np.nan)
    return FrameSnapshot(period=1, time=0.0, home=nan2.copy(), away=nan2.copy(),
                         ball=np.array([np.nan, np.nan]))


class TestRenderArray:
    def test_uniform_grid_single_color_interior(self):
        spec = GridSpec(nx=10, ny=6, field_length=50.0, field_width=30.0)
        half = np.full((6, 10), 0.5)
        grid = ControlGrid(spec=spec, attack=half, defend=half,
                           converged=np.ones((6, 10), dtype=bool))
        style = RenderStyle()
        img = render_array(grid, empty_frame(), style)
        m, s = style.margin_px, style.cell_px
        interior = img[m:m + 6 * s, m:m + 10 * s]
        # the midline is drawn over the surface; everything else is one color
        colors = np.unique(interior.reshape(-1, 3), axis=0)
        assert len(colors) == 2
        off_line = interior[:, : 4 * s]
        assert len(np.unique(off_line.reshape(-1, 3), axis=0)) == 1

    def test_mirrored_inputs_mirror_pixels(self, rng):
        spec = GridSpec(nx=12, ny=8, field_length=60.0, field_width=40.0)
        attack = rng.uniform(0, 0.6, (8, 12))
        defend = (1 - attack) * rng.uniform(0, 0.6, (8, 12))
        grid = ControlGrid(spec=spec, attack=attack, defend=defend,
                           converged=np.ones((8, 12), dtype=bool))
        frame = FrameSnapshot(
            period=1, time=0.0,
            home=rng.uniform((-28, -18), (28, 18), (4, 2)),
            away=rng.uniform((-28, -18), (28, 18), (4, 2)),
            ball=np.array([3.0, -2.0]))
        img = render_array(grid, frame)
        mirrored = render_array(grid.mirrored(), frame.mirrored())
        np.testing.assert_array_equal(mirrored, img[::-1, ::-1])

    def test_players_paint_team_colors(self):
        img = render_array(toy_grid(), toy_frame(), RenderStyle())
        flat = img.reshape(-1, 3)
        assert (flat == np.array(RenderStyle().home_color)).all(axis=1).any()
        assert (flat == np.array(RenderStyle().away_color)).all(axis=1).any()
        assert (flat == np.array(RenderStyle().ball_color)).all(axis=1).any()

    def test_geometry_mismatch_rejected(self):
        frame = toy_frame()
        frame.home[0] = (300.0, 0.0)
        with pytest.raises(ValidationError):
            render_array(toy_grid(), frame)


class TestRenderFile:
    def test_matches_committed_golden(self, tmp_path):
        out = tmp_path / "heatmap.png"
        render_heatmap(toy_grid(), toy_frame(), out, RenderStyle())
        assert out.read_bytes() == (DATA_DIR / "golden_heatmap.png").read_bytes()

    def test_rerender_is_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.png", tmp_path / "b.png"
        render_heatmap(toy_grid(), toy_frame(), a)
        render_heatmap(toy_grid(), toy_frame(), b)
        assert a.read_bytes() == b.read_bytes()

    def test_metadata_embedded(self, tmp_path):
        out = tmp_path / "meta.png"
        render_heatmap(toy_grid(), toy_frame(), out)
        with Image.open(out) as img:
            assert img.text["spacefield:model"] == "ppcf"
            assert img.text["spacefield:params"] == "feedbeefcafe"
            assert img.text["spacefield:frame_time"] == "1.5"

    def test_unwritable_path_raises_oserror(self, tmp_path):
        with pytest.raises(OSError):
            render_heatmap(toy_grid(), toy_frame(), tmp_path / "nope" / "x.png")
