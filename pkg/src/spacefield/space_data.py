"""Parse, align and normalize tracking/event logs into the shared Space form.

The on-disk formats are plain UTF-8 CSV with a mandatory header. Tracking
files carry ``Period``, ``Time [s]``, ``<Side>_<i>_x`` / ``<Side>_<i>_y`` for
i = 1..K and ``ball_x`` / ``ball_y``. Event files carry the 14 standard
columns (Team, Type, Subtype, Period, Start/End Frame, Start/End Time [s],
From, To, Start/End X/Y). Blank cells are missing values. Floats are written
with ``repr`` so write -> parse round-trips are bit-exact.

Frame indices in event files refer to 0-based rows of the merged frame list.
Player ids are ``Home_<i>`` / ``Away_<i>`` with 1-based i.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace

import numpy as np

from ._util import fmt_float
from .config import ProviderSpec, SportConfig
from .errors import (
    AlignmentError,
    InputError,
    ParseError,
    SchemaError,
    ValidationError,
)

EVENT_COLUMNS = [
    "Team", "Type", "Subtype", "Period",
    "Start Frame", "Start Time [s]", "End Frame", "End Time [s]",
    "From", "To", "Start X", "Start Y", "End X", "End Y",
]

MAX_GAP_SECONDS = 0.5  # longest position gap that gets linearly interpolated
EVENT_BOUNDS_TOLERANCE = 0.5  # m beyond the lines still accepted (flagged)


@dataclass(frozen=True)
class EventRecord:
    """One row of the standardized event log."""

    team: str  # "Home" or "Away"
    type: str
    subtype: str | None
    period: int
    start_frame: int
    start_time: float
    end_frame: int
    end_time: float
    from_player: str | None
    to_player: str | None
    start_x: float
    start_y: float
    end_x: float
    end_y: float
    flagged: bool = False  # set when coordinates fall in the out-of-bounds tolerance band

    def __post_init__(self):
        if self.team not in ("Home", "Away"):
            raise ValidationError(f"event team must be Home or Away, got {self.team!r}")
        if not 1 <= self.period <= 4:
            raise ValidationError(f"event period must be in 1..4, got {self.period}")
        if self.start_frame > self.end_frame:
            raise ValidationError(f"event start frame after end frame: {self}")
        if self.start_time > self.end_time:
            raise ValidationError(f"event start time after end time: {self}")


@dataclass(frozen=True)
class FrameSnapshot:
    """All positions at one instant: the game state a model evaluates.

    Positions are (K, 2) arrays in meters with NaN rows where a player is
    missing; the ball is a (2,) array. Velocities are attached by
    :func:`build_dataset` and default to zeros when constructed by hand.
    """

    period: int
    time: float
    home: np.ndarray
    away: np.ndarray
    ball: np.ndarray
    home_velocity: np.ndarray | None = None
    away_velocity: np.ndarray | None = None

    def __post_init__(self):
        if not 1 <= self.period <= 4:
            raise ValidationError(f"period must be in 1..4, got {self.period}")
        for name in ("home", "away"):
            arr = getattr(self, name)
            if arr.ndim != 2 or arr.shape[1] != 2:
                raise ValidationError(f"{name} positions must have shape (K, 2)")
            partial = np.isnan(arr[:, 0]) != np.isnan(arr[:, 1])
            if partial.any():
                raise ValidationError(f"{name} positions must be fully present or fully missing")

    def velocities(self, side: str) -> np.ndarray:
        vel = self.home_velocity if side == "Home" else self.away_velocity
        if vel is None:
            return np.zeros_like(self.positions(side))
        return vel

    def positions(self, side: str) -> np.ndarray:
        return self.home if side == "Home" else self.away

    def mirrored(self) -> "FrameSnapshot":
        """Point reflection of every position (and velocity) about the center."""
        neg = lambda a: None if a is None else -a
        return FrameSnapshot(
            period=self.period, time=self.time,
            home=-self.home, away=-self.away, ball=-self.ball,
            home_velocity=neg(self.home_velocity), away_velocity=neg(self.away_velocity),
        )


@dataclass(frozen=True)
class TrackingTable:
    """One side's raw tracking rows, straight out of the parser."""

    side: str
    periods: np.ndarray  # (n,) int
    times: np.ndarray  # (n,) float seconds
    positions: np.ndarray  # (n, K, 2)
    ball: np.ndarray  # (n, 2)

    @property
    def n_rows(self) -> int:
        return len(self.times)


@dataclass
class SpaceDataset:
    """Aligned container for one match segment: the shared model input.

    Immutable by convention after :func:`build_dataset` returns it; safe to
    share read-only across threads.
    """

    config: SportConfig
    frames: list[FrameSnapshot]
    events: list[EventRecord]
    possession: list[str | None]

    @property
    def n_frames(self) -> int:
        return len(self.frames)

    @property
    def times(self) -> np.ndarray:
        return np.array([f.time for f in self.frames])


def player_ref(player_id: str) -> tuple[str, int]:
    """Split ``Home_3`` style ids into ("Home", 2): side plus 0-based index."""
    try:
        side, num = player_id.rsplit("_", 1)
        index = int(num) - 1
    except (ValueError, AttributeError):
        raise InputError(f"player id {player_id!r} is not of the form Side_<number>") from None
    if side not in ("Home", "Away") or index < 0:
        raise InputError(f"player id {player_id!r} is not of the form Side_<number>")
    return side, index


def _cell_float(cell: str, row: int, column: str) -> float:
    if cell is None or cell.strip() == "":
        return math.nan
    try:
        return float(cell)
    except ValueError:
        raise ParseError(f"row {row}: column {column!r} has non-numeric value {cell!r}") from None


def _cell_int(cell: str, row: int, column: str) -> int:
    try:
        return int(float(cell))
    except (ValueError, TypeError):
        raise ParseError(f"row {row}: column {column!r} has non-integer value {cell!r}") from None


def _open_text(stream):
    if isinstance(stream, (str, bytes)) or hasattr(stream, "__fspath__"):
        return open(stream, "r", encoding="utf-8", newline=""), True
    return stream, False


def parse_tracking(stream, sport_config: SportConfig, side: str) -> TrackingTable:
    """Parse one side's tracking CSV into a :class:`TrackingTable`.

    ``stream`` is a path or an open text stream. Rows come back in file
    order; blank coordinate cells become NaN.
    """
    if side not in ("Home", "Away"):
        raise ValidationError(f"side must be Home or Away, got {side!r}")
    K = sport_config.players_per_side
    fh, owned = _open_text(stream)
    try:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError("tracking file is empty: header row required") from None
        col = {name: i for i, name in enumerate(header)}
        needed = ["Period", "Time [s]"]
        for i in range(1, K + 1):
            needed += [f"{side}_{i}_x", f"{side}_{i}_y"]
        needed += ["ball_x", "ball_y"]
        for name in needed:
            if name not in col:
                raise SchemaError(f"tracking file is missing mandatory column {name!r}")

        periods, times, positions, balls = [], [], [], []
        for row_idx, row in enumerate(reader):
            if not row or all(c.strip() == "" for c in row):
                continue
            periods.append(_cell_int(row[col["Period"]], row_idx, "Period"))
            times.append(_cell_float(row[col["Time [s]"]], row_idx, "Time [s]"))
            xy = np.empty((K, 2))
            for i in range(1, K + 1):
                xy[i - 1, 0] = _cell_float(row[col[f"{side}_{i}_x"]], row_idx, f"{side}_{i}_x")
                xy[i - 1, 1] = _cell_float(row[col[f"{side}_{i}_y"]], row_idx, f"{side}_{i}_y")
            positions.append(xy)
            balls.append([
                _cell_float(row[col["ball_x"]], row_idx, "ball_x"),
                _cell_float(row[col["ball_y"]], row_idx, "ball_y"),
            ])
    finally:
        if owned:
            fh.close()

    n = len(times)
    return TrackingTable(
        side=side,
        periods=np.array(periods, dtype=int),
        times=np.array(times, dtype=float),
        positions=np.array(positions, dtype=float).reshape(n, K, 2),
        ball=np.array(balls, dtype=float).reshape(n, 2),
    )


def write_tracking(table: TrackingTable, stream) -> None:
    """Write a :class:`TrackingTable` in the canonical column order."""
    K = table.positions.shape[1]
    fh, owned = _open_text_w(stream)
    try:
        writer = csv.writer(fh, lineterminator="\n")
        header = ["Period", "Time [s]"]
        for i in range(1, K + 1):
            header += [f"{table.side}_{i}_x", f"{table.side}_{i}_y"]
        header += ["ball_x", "ball_y"]
        writer.writerow(header)
        for r in range(table.n_rows):
            row = [str(int(table.periods[r])), fmt_float(table.times[r])]
            for i in range(K):
                row += [fmt_float(table.positions[r, i, 0]), fmt_float(table.positions[r, i, 1])]
            row += [fmt_float(table.ball[r, 0]), fmt_float(table.ball[r, 1])]
            writer.writerow(row)
    finally:
        if owned:
            fh.close()


def _open_text_w(stream):
    if isinstance(stream, (str, bytes)) or hasattr(stream, "__fspath__"):
        return open(stream, "w", encoding="utf-8", newline=""), True
    return stream, False


def parse_events(stream, sport_config: SportConfig) -> list[EventRecord]:
    """Parse the 14-column event CSV; records come back sorted by start time."""
    fh, owned = _open_text(stream)
    try:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError("event file is empty: header row required") from None
        col = {name: i for i, name in enumerate(header)}
        for name in EVENT_COLUMNS:
            if name not in col:
                raise SchemaError(f"event file is missing mandatory column {name!r}")

        records = []
        for row_idx, row in enumerate(reader):
            if not row or all(c.strip() == "" for c in row):
                continue
            team = row[col["Team"]].strip()
            if team not in ("Home", "Away"):
                raise ParseError(f"row {row_idx}: unknown Team value {team!r}")
            subtype = row[col["Subtype"]].strip() or None
            to_player = row[col["To"]].strip() or None
            from_player = row[col["From"]].strip() or None
            try:
                record = EventRecord(
                    team=team,
                    type=row[col["Type"]].strip(),
                    subtype=subtype,
                    period=_cell_int(row[col["Period"]], row_idx, "Period"),
                    start_frame=_cell_int(row[col["Start Frame"]], row_idx, "Start Frame"),
                    start_time=_cell_float(row[col["Start Time [s]"]], row_idx, "Start Time [s]"),
                    end_frame=_cell_int(row[col["End Frame"]], row_idx, "End Frame"),
                    end_time=_cell_float(row[col["End Time [s]"]], row_idx, "End Time [s]"),
                    from_player=from_player,
                    to_player=to_player,
                    start_x=_cell_float(row[col["Start X"]], row_idx, "Start X"),
                    start_y=_cell_float(row[col["Start Y"]], row_idx, "Start Y"),
                    end_x=_cell_float(row[col["End X"]], row_idx, "End X"),
                    end_y=_cell_float(row[col["End Y"]], row_idx, "End Y"),
                )
            except ValidationError as exc:
                raise ValidationError(f"row {row_idx}: {exc}") from None
            records.append(record)
    finally:
        if owned:
            fh.close()

    records.sort(key=lambda r: (r.start_time, r.start_frame))
    return records


def write_events(events: list[EventRecord], stream) -> None:
    fh, owned = _open_text_w(stream)
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(EVENT_COLUMNS)
        for e in events:
            writer.writerow([
                e.team, e.type, e.subtype or "", str(e.period),
                str(e.start_frame), fmt_float(e.start_time),
                str(e.end_frame), fmt_float(e.end_time),
                e.from_player or "", e.to_player or "",
                fmt_float(e.start_x), fmt_float(e.start_y),
                fmt_float(e.end_x), fmt_float(e.end_y),
            ])
    finally:
        if owned:
            fh.close()


def tracking_to_csv_text(table: TrackingTable) -> str:
    buf = io.StringIO()
    write_tracking(table, buf)
    return buf.getvalue()


def events_to_csv_text(events: list[EventRecord]) -> str:
    buf = io.StringIO()
    write_events(events, buf)
    return buf.getvalue()


def normalize_coordinates(positions, provider: ProviderSpec, sport_config: SportConfig):
    """Map provider-frame coordinates into meters centered on the field.

    Pure affine map: scale per axis (normalized extents stretch onto the
    configured field; unit providers apply ``unit_scale``), then a shift that
    moves a corner origin to the center, then the optional y flip. NaNs pass
    through, so missing positions stay missing.
    """
    pts = np.asarray(positions, dtype=float)
    out = pts.copy()
    if provider.extent is not None:
        out[..., 0] = out[..., 0] / provider.extent[0] * sport_config.field_length
        out[..., 1] = out[..., 1] / provider.extent[1] * sport_config.field_width
    else:
        out = out * provider.unit_scale
    if provider.origin == "corner":
        out[..., 0] = out[..., 0] - sport_config.half_length
        out[..., 1] = out[..., 1] - sport_config.half_width
    if provider.flip_y:
        out[..., 1] = -out[..., 1]
    return out


def normalize_tracking(table: TrackingTable, provider: ProviderSpec, sport_config: SportConfig) -> TrackingTable:
    return replace(
        table,
        positions=normalize_coordinates(table.positions, provider, sport_config),
        ball=normalize_coordinates(table.ball, provider, sport_config),
    )


def normalize_events(events: list[EventRecord], provider: ProviderSpec, sport_config: SportConfig) -> list[EventRecord]:
    out = []
    for e in events:
        start = normalize_coordinates([e.start_x, e.start_y], provider, sport_config)
        end = normalize_coordinates([e.end_x, e.end_y], provider, sport_config)
        out.append(replace(e, start_x=start[0], start_y=start[1], end_x=end[0], end_y=end[1]))
    return out


def _snap_to_lattice(times: np.ndarray, t0: float, rate: float) -> np.ndarray:
    """Frame numbers on the 1/rate lattice anchored at t0; errors if off-lattice."""
    k = np.round((times - t0) * rate).astype(int)
    residual = np.abs(times - (t0 + k / rate))
    bad = residual > 0.5 / rate + 1e-9
    if bad.any():
        i = int(np.argmax(bad))
        raise AlignmentError(
            f"timestamp {times[i]} is {residual[i]:.4f}s off the {rate} Hz lattice"
        )
    return k


def _interpolate_gaps(series: np.ndarray, max_gap: int) -> np.ndarray:
    """Linearly fill interior NaN runs of length <= max_gap along axis 0."""
    out = series.copy()
    n = len(out)
    flat = out.reshape(n, -1)
    for c in range(flat.shape[1]):
        col = flat[:, c]
        isnan = np.isnan(col)
        if not isnan.any() or isnan.all():
            continue
        i = 0
        while i < n:
            if not isnan[i]:
                i += 1
                continue
            j = i
            while j < n and isnan[j]:
                j += 1
            # run [i, j); interior only, and short enough
            if i > 0 and j < n and (j - i) <= max_gap:
                left, right = col[i - 1], col[j]
                steps = j - i + 1
                for m in range(i, j):
                    w = (m - (i - 1)) / steps
                    col[m] = left + w * (right - left)
            i = j
    return out


def _finite_difference_velocity(pos: np.ndarray, rate: float) -> np.ndarray:
    """Central differences at interior frames, one-sided at the boundaries.

    Positions with NaN get NaN velocity; valid positions flanked by missing
    neighbors fall back to one-sided estimates or zero.
    """
    n = pos.shape[0]
    vel = np.full_like(pos, np.nan)
    if n == 1:
        vel[0] = np.where(np.isnan(pos[0]), np.nan, 0.0)
        return vel
    for i in range(n):
        if np.isnan(pos[i]).any():
            continue
        prev_ok = i > 0 and not np.isnan(pos[i - 1]).any()
        next_ok = i < n - 1 and not np.isnan(pos[i + 1]).any()
        if prev_ok and next_ok:
            vel[i] = (pos[i + 1] - pos[i - 1]) * (rate / 2.0)
        elif next_ok:
            vel[i] = (pos[i + 1] - pos[i]) * rate
        elif prev_ok:
            vel[i] = (pos[i] - pos[i - 1]) * rate
        else:
            vel[i] = 0.0
    return vel


def _smooth_velocity(vel: np.ndarray, window: int) -> np.ndarray:
    """Centered moving average, NaN-tolerant, applied along axis 0."""
    if window <= 1:
        return vel
    half = window // 2
    out = vel.copy()
    n = vel.shape[0]
    for i in range(n):
        lo, hi = max(0, i - half), min(n, i + half + 1)
        chunk = vel[lo:hi]
        with np.errstate(invalid="ignore"):
            out[i] = np.nanmean(chunk, axis=0)
    return out


def build_dataset(
    tracking_home: TrackingTable,
    tracking_away: TrackingTable,
    events: list[EventRecord],
    sport_config: SportConfig,
    smoothing_window: int = 0,
) -> SpaceDataset:
    """Merge both tracking sides and the event log into a :class:`SpaceDataset`.

    Frames are matched on (period, time) within half a sample interval; the
    merged timeline is the union lattice per period so frame spacing is
    exactly 1/sample_rate. Position gaps up to 0.5 s are linearly
    interpolated, longer gaps stay missing. Velocities are central
    differences (optionally smoothed with a moving average of
    ``smoothing_window`` frames).
    """
    rate = sport_config.sample_rate
    if tracking_home.n_rows == 0 or tracking_away.n_rows == 0:
        raise AlignmentError("cannot align: one tracking side is empty")

    home_periods = set(tracking_home.periods.tolist())
    away_periods = set(tracking_away.periods.tolist())
    if home_periods != away_periods:
        raise AlignmentError(
            f"tracking sides cover different periods: {sorted(home_periods)} vs {sorted(away_periods)}"
        )

    K = sport_config.players_per_side
    frames: list[FrameSnapshot] = []
    all_home_pos, all_away_pos, all_ball = [], [], []
    frame_periods, frame_times = [], []

    for period in sorted(home_periods):
        h_idx = np.where(tracking_home.periods == period)[0]
        a_idx = np.where(tracking_away.periods == period)[0]
        h_times = tracking_home.times[h_idx]
        a_times = tracking_away.times[a_idx]
        t0 = min(h_times.min(), a_times.min())
        h_k = _snap_to_lattice(h_times, t0, rate)
        a_k = _snap_to_lattice(a_times, t0, rate)
        for side, kvec in (("Home", h_k), ("Away", a_k)):
            values, counts = np.unique(kvec, return_counts=True)
            if (counts > 1).any():
                dup = values[counts > 1][0]
                raise ValidationError(
                    f"{side} tracking has duplicate timestamp at period {period}, "
                    f"t={t0 + dup / rate:.3f}s"
                )
        if max(h_k.min(), a_k.min()) > min(h_k.max(), a_k.max()):
            raise AlignmentError(f"tracking sides do not overlap in time within period {period}")

        k_min = int(min(h_k.min(), a_k.min()))
        k_max = int(max(h_k.max(), a_k.max()))
        n = k_max - k_min + 1
        home_pos = np.full((n, K, 2), np.nan)
        away_pos = np.full((n, K, 2), np.nan)
        ball = np.full((n, 2), np.nan)
        home_pos[h_k - k_min] = tracking_home.positions[h_idx]
        away_pos[a_k - k_min] = tracking_away.positions[a_idx]
        # home is the reference clock for the ball; fill from away where home is missing
        ball[h_k - k_min] = tracking_home.ball[h_idx]
        away_ball_rows = a_k - k_min
        missing = np.isnan(ball[away_ball_rows]).all(axis=1)
        ball[away_ball_rows[missing]] = tracking_away.ball[a_idx][missing]

        max_gap = int(round(MAX_GAP_SECONDS * rate))
        home_pos = _interpolate_gaps(home_pos, max_gap)
        away_pos = _interpolate_gaps(away_pos, max_gap)
        ball = _interpolate_gaps(ball, max_gap)

        all_home_pos.append(home_pos)
        all_away_pos.append(away_pos)
        all_ball.append(ball)
        frame_periods.extend([period] * n)
        frame_times.extend((t0 + (k_min + np.arange(n)) / rate).tolist())

    # velocities are computed per period so differences never straddle a break
    offset = 0
    home_vel_parts, away_vel_parts = [], []
    for hp, ap in zip(all_home_pos, all_away_pos):
        hv = _finite_difference_velocity(hp, rate)
        av = _finite_difference_velocity(ap, rate)
        if smoothing_window and smoothing_window > 1:
            hv = _smooth_velocity(hv, smoothing_window)
            av = _smooth_velocity(av, smoothing_window)
        home_vel_parts.append(hv)
        away_vel_parts.append(av)
        offset += len(hp)

    home_pos = np.concatenate(all_home_pos)
    away_pos = np.concatenate(all_away_pos)
    ball = np.concatenate(all_ball)
    home_vel = np.concatenate(home_vel_parts)
    away_vel = np.concatenate(away_vel_parts)

    n_frames = len(frame_times)
    _validate_events(events, n_frames, sport_config)
    events = flag_out_of_bounds(events, sport_config)

    for i in range(n_frames):
        frames.append(FrameSnapshot(
            period=frame_periods[i],
            time=frame_times[i],
            home=home_pos[i],
            away=away_pos[i],
            ball=ball[i],
            home_velocity=home_vel[i],
            away_velocity=away_vel[i],
        ))

    possession = _possession_labels(events, n_frames)
    return SpaceDataset(config=sport_config, frames=frames, events=list(events), possession=possession)


def _validate_events(events: list[EventRecord], n_frames: int, cfg: SportConfig) -> list[EventRecord]:
    half_l = cfg.half_length + EVENT_BOUNDS_TOLERANCE
    half_w = cfg.half_width + EVENT_BOUNDS_TOLERANCE
    for e in events:
        if not (0 <= e.start_frame < n_frames and 0 <= e.end_frame < n_frames):
            raise ValidationError(
                f"event frames [{e.start_frame}, {e.end_frame}] outside dataset of {n_frames} frames: {e}"
            )
        for x, y in ((e.start_x, e.start_y), (e.end_x, e.end_y)):
            if math.isnan(x) or math.isnan(y):
                continue
            if abs(x) > half_l or abs(y) > half_w:
                raise ValidationError(f"event coordinates ({x}, {y}) outside field bounds: {e}")
    return events


def flag_out_of_bounds(events: list[EventRecord], cfg: SportConfig) -> list[EventRecord]:
    """Mark events whose coordinates sit in the 0.5 m out-of-bounds band."""
    out = []
    for e in events:
        coords = [(e.start_x, e.start_y), (e.end_x, e.end_y)]
        in_band = any(
            not (math.isnan(x) or math.isnan(y))
            and (abs(x) > cfg.half_length or abs(y) > cfg.half_width)
            for x, y in coords
        )
        out.append(replace(e, flagged=in_band) if in_band != e.flagged else e)
    return out


def _possession_labels(events: list[EventRecord], n_frames: int) -> list[str | None]:
    """Team of the most recent event starting at or before each frame."""
    labels: list[str | None] = [None] * n_frames
    current: str | None = None
    ordered = sorted(events, key=lambda e: e.start_frame)
    idx = 0
    for f in range(n_frames):
        while idx < len(ordered) and ordered[idx].start_frame <= f:
            current = ordered[idx].team
            idx += 1
        labels[f] = current
    return labels


def interpolate_disc(events: list[EventRecord], frames: list[FrameSnapshot]) -> np.ndarray:
    """Per-frame disc positions anchored on possession events.

    While a player holds the disc it rides on that player's tracked position;
    during each throw (an event whose start/end coordinates differ) it moves
    linearly from the event's start point to its end point, hitting both
    exactly.
    """
    anchored = [e for e in events if e.from_player]
    if not anchored:
        raise InputError("cannot anchor the disc: no possession events with a From player")
    anchored.sort(key=lambda e: e.start_frame)

    n = len(frames)
    disc = np.full((n, 2), np.nan)

    def follow(player_id: str, lo: int, hi: int) -> None:
        side, idx = player_ref(player_id)
        for f in range(max(lo, 0), min(hi, n - 1) + 1):
            disc[f] = frames[f].positions(side)[idx]

    # held before the first event and between/after events
    follow(anchored[0].from_player, 0, anchored[0].start_frame)
    for prev, nxt in zip(anchored, anchored[1:]):
        holder = prev.to_player or nxt.from_player
        if holder:
            follow(holder, prev.end_frame, nxt.start_frame)
    last = anchored[-1]
    if last.to_player:
        follow(last.to_player, last.end_frame, n - 1)
    else:
        disc[min(last.end_frame, n - 1):] = (last.end_x, last.end_y)

    # flight segments; endpoints take the event coordinates exactly
    for e in anchored:
        s, t = e.start_frame, min(e.end_frame, n - 1)
        is_throw = t > s and (e.start_x != e.end_x or e.start_y != e.end_y)
        if not is_throw:
            follow(e.from_player, s, t)
            continue
        disc[s] = (e.start_x, e.start_y)
        disc[t] = (e.end_x, e.end_y)
        span = t - s
        for f in range(s + 1, t):
            w = (f - s) / span
            disc[f, 0] = e.start_x + w * (e.end_x - e.start_x)
            disc[f, 1] = e.start_y + w * (e.end_y - e.start_y)
    return disc


def attach_disc(dataset: SpaceDataset) -> SpaceDataset:
    """Return a dataset whose frames carry the interpolated disc as the ball."""
    disc = interpolate_disc(dataset.events, dataset.frames)
    frames = [replace(f, ball=disc[i]) for i, f in enumerate(dataset.frames)]
    return SpaceDataset(
        config=dataset.config, frames=frames,
        events=dataset.events, possession=dataset.possession,
    )
