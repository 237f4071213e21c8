"""Deterministic raster rendering of control surfaces and frames.

The renderer is hand-rolled on numpy + Pillow rather than a plotting library
so that identical inputs produce byte-identical PNGs: pixels are computed
from cell values and marker geometry with no timestamps, font hinting or
backend state involved. Images carry text metadata (model, frame time,
parameter hash) in the PNG header.

Pixel layout: an integer number of pixels per grid cell plus a symmetric
margin, so mirroring the inputs mirrors the image exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from PIL import Image
from PIL.PngImagePlugin import PngInfo

from .errors import ValidationError
from .pitch_control import ControlGrid
from .space_data import FrameSnapshot

WHITE = np.array([247, 247, 247], dtype=float)
RED = np.array([178, 24, 43], dtype=float)
BLUE = np.array([33, 102, 172], dtype=float)

GEOMETRY_SLACK = 2.0  # m beyond the lines before a frame/grid mismatch is declared


@dataclass(frozen=True)
class RenderStyle:
    cell_px: int = 12  # pixels per grid cell (both axes)
    margin_px: int = 24
    line_px: int = 2
    marker_px: int = 6  # player marker radius
    ball_px: int = 3
    background: tuple = (255, 255, 255)
    line_color: tuple = (60, 60, 60)
    home_color: tuple = (15, 80, 180)
    away_color: tuple = (190, 30, 30)
    ball_color: tuple = (10, 10, 10)

    def __post_init__(self):
        if self.cell_px < 1 or self.margin_px < 0:
            raise ValidationError("cell_px must be >= 1 and margin_px >= 0")


def _diverging(values: np.ndarray) -> np.ndarray:
    """Map values in [-1, 1] to a blue-white-red ramp (attacker positive)."""
    v = np.clip(values, -1.0, 1.0)
    out = np.empty(v.shape + (3,), dtype=float)
    pos = v >= 0
    out[pos] = WHITE + v[pos, None] * (RED - WHITE)
    out[~pos] = WHITE + (-v[~pos, None]) * (BLUE - WHITE)
    return np.round(out).astype(np.uint8)


def _disc_mask(height: int, width: int, row: float, col: float, radius: float) -> np.ndarray:
    rows = np.arange(height)[:, None] + 0.5
    cols = np.arange(width)[None, :] + 0.5
    return (rows - row) ** 2 + (cols - col) ** 2 <= radius ** 2


def render_array(grid: ControlGrid, frame: FrameSnapshot, style: RenderStyle | None = None) -> np.ndarray:
    """Render to an (H, W, 3) uint8 array. See :func:`render_heatmap`."""
    style = style or RenderStyle()
    spec = grid.spec
    _check_geometry(frame, spec)

    s = style.cell_px
    m = style.margin_px
    field_w = spec.nx * s
    field_h = spec.ny * s
    width = field_w + 2 * m
    height = field_h + 2 * m

    img = np.empty((height, width, 3), dtype=np.uint8)
    img[:, :] = np.array(style.background, dtype=np.uint8)

    # surface: diverging colormap of attack - defend, grid row 0 at the bottom
    value = grid.attack - grid.defend
    colors = _diverging(value[::-1])
    img[m:m + field_h, m:m + field_w] = np.repeat(np.repeat(colors, s, axis=0), s, axis=1)

    line = np.array(style.line_color, dtype=np.uint8)
    lp = style.line_px
    # border just outside the playing surface (symmetric under mirroring)
    img[m - lp:m, m - lp:m + field_w + lp] = line
    img[m + field_h:m + field_h + lp, m - lp:m + field_w + lp] = line
    img[m - lp:m + field_h + lp, m - lp:m] = line
    img[m - lp:m + field_h + lp, m + field_w:m + field_w + lp] = line

    def col_of(x: float) -> float:
        return m + (x / spec.field_length + 0.5) * field_w

    def row_of(y: float) -> float:
        return m + (0.5 - y / spec.field_width) * field_h

    def vertical_line(x: float) -> None:
        center = col_of(x)
        cols = np.arange(width) + 0.5
        sel = np.abs(cols - center) <= lp / 2
        img[m:m + field_h, sel] = line

    vertical_line(0.0)

    for side, color in (("Home", style.home_color), ("Away", style.away_color)):
        for xy in frame.positions(side):
            if np.isnan(xy).any():
                continue
            mask = _disc_mask(height, width, row_of(xy[1]), col_of(xy[0]), style.marker_px)
            img[mask] = np.array(color, dtype=np.uint8)

    ball = np.asarray(frame.ball, dtype=float)
    if not np.isnan(ball).any():
        mask = _disc_mask(height, width, row_of(ball[1]), col_of(ball[0]), style.ball_px)
        img[mask] = np.array(style.ball_color, dtype=np.uint8)

    return img


def _check_geometry(frame: FrameSnapshot, spec) -> None:
    half_l = spec.field_length / 2 + GEOMETRY_SLACK
    half_w = spec.field_width / 2 + GEOMETRY_SLACK
    for side in ("Home", "Away"):
        pos = frame.positions(side)
        ok = np.isnan(pos).any(axis=1)
        ok |= (np.abs(pos[:, 0]) <= half_l) & (np.abs(pos[:, 1]) <= half_w)
        if not ok.all():
            raise ValidationError(
                f"{side} positions fall outside the grid's field: frame and grid geometry disagree")


def render_heatmap(grid: ControlGrid, frame: FrameSnapshot, path,
                   style: RenderStyle | None = None) -> None:
    """Write a PNG heatmap of the grid with the frame's players and ball.

    Output is deterministic for fixed inputs; model id, frame time and the
    parameter hash ride along as PNG text metadata.
    """
    array = render_array(grid, frame, style)
    image = Image.fromarray(array, mode="RGB")
    meta = PngInfo()
    meta.add_text("spacefield:model", str(grid.metadata.get("model", "")))
    meta.add_text("spacefield:params", str(grid.metadata.get("params", "")))
    meta.add_text("spacefield:frame_time", repr(grid.metadata.get("frame_time", "")))
    image.save(path, format="PNG", pnginfo=meta)
