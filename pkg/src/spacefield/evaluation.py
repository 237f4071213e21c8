"""Match- and dataset-level metrics: area ratios, lag correlations, log-loss."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, ValidationError
from .pitch_control import ControlGrid

INDICATORS = ("obso", "bimos", "shots", "goals")
LOGLOSS_EPS = 1e-12


def high_control_ratio(grid: ControlGrid, tau: float, surface: str = "attack") -> float:
    """Fraction of unmasked cells whose control reaches the threshold ``tau``."""
    if not 0.0 <= tau <= 1.0:
        raise ParameterError(f"tau must be in [0, 1], got {tau}")
    values = grid.unmasked(surface)
    if values.size == 0:
        raise ValidationError("cannot compute a ratio on a grid with no unmasked cells")
    return float((values >= tau).sum() / values.size)


@dataclass
class RatioSeries:
    """High-control area ratio of one possession, bucketed every delta seconds."""

    possession_id: str
    timestamps: np.ndarray  # bucket start times, seconds
    values: np.ndarray  # bucket means of the per-frame ratio
    frame_times: np.ndarray
    frame_ratios: np.ndarray
    tau: float
    delta: float
    peak: float
    time_above: float  # seconds the per-frame ratio spends at or above `level`
    level: float
    partial_last: bool  # final bucket spans less than delta


def ratio_series(frame_times, frame_ratios, tau: float, delta: float = 5.0,
                 possession_id: str = "", level: float = 0.4) -> RatioSeries:
    """Average a per-frame ratio series into consecutive delta-second buckets.

    ``peak`` and ``time_above`` are measured on the raw per-frame series, not
    on the bucket means; ``level`` sets the time-above threshold. A trailing
    bucket shorter than delta is kept and flagged.
    """
    times = np.asarray(frame_times, dtype=float)
    ratios = np.asarray(frame_ratios, dtype=float)
    if times.size == 0 or times.size != ratios.size:
        raise ValidationError("ratio series needs matching, nonempty times and values")
    if delta <= 0:
        raise ParameterError(f"delta must be > 0, got {delta}")

    rel = times - times[0]
    bucket_of = np.floor(rel / delta + 1e-12).astype(int)
    n_buckets = int(bucket_of.max()) + 1
    values = np.empty(n_buckets)
    stamps = np.empty(n_buckets)
    for b in range(n_buckets):
        members = ratios[bucket_of == b]
        values[b] = members.mean() if members.size else math.nan
        stamps[b] = times[0] + b * delta

    if times.size >= 2:
        dt = float(np.median(np.diff(times)))
    else:
        dt = delta
    duration = rel[-1] + dt
    partial = (duration / delta) % 1.0 > 1e-9 and duration < n_buckets * delta

    return RatioSeries(
        possession_id=possession_id,
        timestamps=stamps,
        values=values,
        frame_times=times,
        frame_ratios=ratios,
        tau=tau,
        delta=delta,
        peak=float(ratios.max()),
        time_above=float((ratios >= level).sum() * dt),
        level=level,
        partial_last=bool(partial),
    )


def ratio_series_csv(series: RatioSeries) -> str:
    """Bucketed ratio series as CSV: one row per delta-second bucket."""
    from ._util import fmt_float

    lines = ["possession,bucket_start,ratio"]
    for t, v in zip(series.timestamps, series.values):
        lines.append(f"{series.possession_id},{fmt_float(float(t))},{fmt_float(float(v))}")
    return "\n".join(lines) + "\n"


@dataclass
class TeamMatchSeries:
    """One team's per-match indicator values, in chronological order."""

    team: str
    obso: list[float]
    bimos: list[float]
    shots: list[float]
    goals: list[float]

    def __post_init__(self):
        lengths = {len(self.obso), len(self.bimos), len(self.shots), len(self.goals)}
        if len(lengths) != 1:
            raise ValidationError(f"team {self.team}: indicator series lengths differ")
        if len(self.obso) < 2:
            raise ValidationError(f"team {self.team}: need >= 2 matches for lag correlation")

    def indicator(self, name: str) -> np.ndarray:
        return np.asarray(getattr(self, name), dtype=float)


def pearson(x, y) -> float:
    """Pearson r; NaN when either vector has zero variance."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.size != y.size:
        raise ValidationError("pearson needs equal-length vectors")
    if x.size < 2:
        return math.nan
    xc = x - x.mean()
    yc = y - y.mean()
    sx = math.sqrt(float(xc @ xc))
    sy = math.sqrt(float(yc @ yc))
    if sx == 0.0 or sy == 0.0:
        return math.nan
    return float((xc @ yc) / (sx * sy))


def lag_correlation_table(series: list[TeamMatchSeries], mode: str = "pooled") -> np.ndarray:
    """Upper-triangular table of r(indicator A at match i, B at match i+1).

    Rows/columns follow :data:`INDICATORS`. ``pooled`` concatenates every
    team's consecutive-match pairs before correlating; ``per_team`` averages
    each team's own correlation. Undefined entries (zero variance) are NaN.
    """
    if mode not in ("pooled", "per_team"):
        raise ParameterError(f"mode must be 'pooled' or 'per_team', got {mode!r}")
    if not series:
        raise ValidationError("lag correlation needs at least one team series")

    table = np.full((len(INDICATORS), len(INDICATORS)), np.nan)
    for i, a in enumerate(INDICATORS):
        for j, b in enumerate(INDICATORS):
            if j < i:
                continue
            if mode == "pooled":
                xs, ys = [], []
                for team in series:
                    va, vb = team.indicator(a), team.indicator(b)
                    xs.extend(va[:-1])
                    ys.extend(vb[1:])
                table[i, j] = pearson(xs, ys)
            else:
                rs = []
                for team in series:
                    va, vb = team.indicator(a), team.indicator(b)
                    r = pearson(va[:-1], vb[1:])
                    if not math.isnan(r):
                        rs.append(r)
                table[i, j] = float(np.mean(rs)) if rs else math.nan
    return table


def format_correlation_table(table: np.ndarray) -> str:
    """Render the lag table in the conventional i \\ i+1 layout."""
    names = [n.upper() for n in INDICATORS]
    width = max(len(n) for n in names) + 2
    header = "i\\i+1".ljust(width) + "".join(n.rjust(width) for n in names)
    lines = [header]
    for i, name in enumerate(names):
        cells = []
        for j in range(len(names)):
            if j < i or math.isnan(table[i, j]):
                cells.append(("-" if j < i else "nan").rjust(width))
            else:
                cells.append(f"{table[i, j]:.2f}".rjust(width))
        lines.append(name.ljust(width) + "".join(cells))
    return "\n".join(lines)


def log_loss(predicted, outcomes) -> float:
    """Mean negative log-likelihood of binary outcomes under the predictions.

    Predictions are clipped to [1e-12, 1 - 1e-12] before taking logs.
    """
    p = np.asarray(predicted, dtype=float)
    y = np.asarray(outcomes, dtype=float)
    if p.size == 0:
        raise ValidationError("log loss needs at least one prediction")
    if p.shape != y.shape:
        raise ValidationError(f"length mismatch: {p.shape} predictions vs {y.shape} outcomes")
    if np.any((y != 0) & (y != 1)):
        raise ValidationError("outcomes must be 0 or 1")
    p = np.clip(p, LOGLOSS_EPS, 1.0 - LOGLOSS_EPS)
    return float(-np.mean(y * np.log(p) + (1.0 - y) * np.log(1.0 - p)))


def max_vframe_per_sequence(vframe_series: list) -> list[float]:
    """Per-sequence maximum of each V_frame series (histogram-ready)."""
    maxima = []
    for series in vframe_series:
        arr = np.asarray(series, dtype=float)
        if arr.size == 0:
            raise ValidationError("every sequence needs at least one V_frame value")
        maxima.append(float(arr.max()))
    return maxima


@dataclass
class EvaluationReport:
    """Scalar and tabular metric values with provenance for export."""

    model: str
    params_hash: str
    scalars: dict = field(default_factory=dict)  # name -> float
    tables: dict = field(default_factory=dict)  # name -> (columns, rows)

    def __eq__(self, other):
        if not isinstance(other, EvaluationReport):
            return NotImplemented
        return (self.model == other.model
                and self.params_hash == other.params_hash
                and self.scalars == other.scalars
                and self.tables == other.tables)
