"""Batch orchestration: load inputs, run a space model, export artifacts.

Every run writes grid exports (CSV + binary, optionally PNG) and a report
per input, then a manifest with one line per artifact:

    <input id>\t<model>\t<relative path>\t<sha256>

Outputs are deterministic: rerunning an identical config reproduces every
byte, including the manifest. Items that fail are logged and skipped; the
run only fails as a whole when nothing succeeds.
"""

from __future__ import annotations

import hashlib
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from ._util import fmt_float, params_hash
from .bimos import PBCFParams, bimos_surface
from .config import (
    SportConfig,
    model_params_from_tree,
    provider_from_tree,
    sport_config_from_tree,
)
from .errors import ConfigurationError, InputError, SpacefieldError
from .evaluation import (
    EvaluationReport,
    high_control_ratio,
    ratio_series,
    ratio_series_csv,
)
from .obso import ObsoParams, obso_surface
from .pitch_control import (
    ControlGrid,
    ControlParams,
    GridSpec,
    IntegrationParams,
    ppcf_grid,
    team_control_summary,
    write_grid_binary,
    write_grid_csv,
)
from .render import RenderStyle, render_heatmap
from .space_data import (
    SpaceDataset,
    attach_disc,
    build_dataset,
    normalize_events,
    normalize_tracking,
    parse_events,
    parse_tracking,
    player_ref,
)
from .timing import Play, WeightParams, timing_gap, v_timing_table, wuppcf_grid

KNOWN_MODELS = ("ppcf", "obso", "wuppcf", "bimos")

RATIO_TAU = 0.7  # high-control threshold for the possession ratio series
RATIO_DELTA = 5.0  # s per ratio bucket


@dataclass
class RunConfig:
    """Everything one batch run needs; flags override the config-file tree."""

    model: str
    sport: str
    provider: str
    event_data: str
    tracking_home: str
    tracking_away: str
    out_path: str
    grid_nx: int | None = None
    grid_ny: int | None = None
    frames: tuple[int, int] | None = None  # half-open [a, b)
    receiver: str | None = None
    initiation_frame: int | None = None
    xi_range: tuple[int, ...] | None = None
    jobs: int = 0  # 0 = available cores
    render: bool = False
    bimos_combine: str | None = None
    pass_speed: float | None = None
    dribble_speed: float | None = None
    config_tree: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.model not in KNOWN_MODELS:
            raise ConfigurationError(f"unknown space model {self.model!r}; expected one of {KNOWN_MODELS}")
        for name in ("event_data", "tracking_home", "tracking_away", "out_path"):
            if not getattr(self, name):
                raise ConfigurationError(f"{name} path must be nonempty")


@dataclass
class ManifestEntry:
    input_id: str
    model: str
    path: str  # relative to the output directory
    sha256: str

    def line(self) -> str:
        return f"{self.input_id}\t{self.model}\t{self.path}\t{self.sha256}"


@dataclass
class BatchResult:
    entries: list[ManifestEntry]
    failures: list[tuple[str, str]]  # (input id, message)
    manifest_path: str

    @property
    def ok(self) -> bool:
        return bool(self.entries)


def _discover_items(config: RunConfig) -> list[tuple[str, Path, Path, Path]]:
    """Match ids with their (events, home, away) files; directories pair by stem."""
    ev = Path(config.event_data)
    th = Path(config.tracking_home)
    ta = Path(config.tracking_away)
    if ev.is_dir():
        items = []
        for ev_file in sorted(ev.glob("*.csv")):
            stem = ev_file.stem
            items.append((stem, ev_file, th / f"{stem}.csv", ta / f"{stem}.csv"))
        if not items:
            raise ConfigurationError(f"no .csv event files found in {ev}")
        return items
    return [(ev.stem, ev, th, ta)]


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def load_inputs(event_path, home_path, away_path, sport_config: SportConfig,
                provider, smoothing_window: int = 0) -> SpaceDataset:
    """Parse, normalize and align one item's files into a dataset."""
    home = parse_tracking(str(home_path), sport_config, "Home")
    away = parse_tracking(str(away_path), sport_config, "Away")
    events = parse_events(str(event_path), sport_config)
    home = normalize_tracking(home, provider, sport_config)
    away = normalize_tracking(away, provider, sport_config)
    events = normalize_events(events, provider, sport_config)
    dataset = build_dataset(home, away, events, sport_config,
                            smoothing_window=smoothing_window)
    ball_missing = all(np.isnan(f.ball).any() for f in dataset.frames)
    if ball_missing and events:
        dataset = attach_disc(dataset)
    return dataset


def _selected_frames(config: RunConfig, dataset: SpaceDataset) -> list[int]:
    if config.frames is not None:
        a, b = config.frames
        if not (0 <= a < b <= dataset.n_frames):
            raise ConfigurationError(
                f"frame selection [{a}, {b}) outside dataset of {dataset.n_frames} frames")
        return list(range(a, b))
    chosen = sorted({e.start_frame for e in dataset.events})
    return chosen or [0]


def _attacking_team(dataset: SpaceDataset, frame_index: int) -> str:
    return dataset.possession[frame_index] or "Home"


def _holder_at(dataset: SpaceDataset, frame_index: int) -> tuple[str, int] | None:
    """Holder from the latest possession event at or before the frame."""
    best = None
    for e in dataset.events:
        if e.from_player and e.start_frame <= frame_index:
            best = e
    if best is None:
        return None
    return player_ref(best.from_player)


def run_batch(config: RunConfig) -> BatchResult:
    """Process every input item and write the artifact manifest."""
    out_dir = Path(config.out_path)
    out_dir.mkdir(parents=True, exist_ok=True)
    items = _discover_items(config)

    tree = config.config_tree
    sport = sport_config_from_tree(config.sport, tree)
    provider = provider_from_tree(config.provider, tree)
    smoothing = int(((tree.get("sports") or {}).get(config.sport) or {})
                    .get("smoothing_window", 0))
    jobs = config.jobs or os.cpu_count() or 1

    entries: list[ManifestEntry] = []
    failures: list[tuple[str, str]] = []

    def process(item):
        input_id, ev, th, ta = item
        try:
            dataset = load_inputs(ev, th, ta, sport, provider, smoothing_window=smoothing)
            return input_id, _run_item(config, input_id, dataset, sport, out_dir), None
        except (SpacefieldError, OSError) as exc:
            return input_id, [], f"{type(exc).__name__}: {exc}"

    if jobs > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(process, items))
    else:
        results = [process(item) for item in items]

    for input_id, item_entries, error in results:
        if error is None:
            entries.extend(item_entries)
        else:
            failures.append((input_id, error))
            print(f"spacefield: {input_id} failed: {error}", file=sys.stderr)

    entries.sort(key=lambda e: (e.input_id, e.path))
    manifest_path = out_dir / "manifest.txt"
    with open(manifest_path, "w", encoding="utf-8", newline="") as fh:
        for entry in entries:
            fh.write(entry.line() + "\n")
    return BatchResult(entries=entries, failures=failures, manifest_path=str(manifest_path))


def _run_item(config: RunConfig, input_id: str, dataset: SpaceDataset,
              sport: SportConfig, out_dir: Path) -> list[ManifestEntry]:
    grid_spec = GridSpec.from_sport(sport, nx=config.grid_nx, ny=config.grid_ny)
    overrides = model_params_from_tree(config.config_tree)
    integration = IntegrationParams(**overrides.get("integration", {}))
    artifacts: list[Path] = []

    if config.model == "wuppcf":
        artifacts += _run_timing_item(config, input_id, dataset, sport, grid_spec,
                                      integration, out_dir, overrides)
    else:
        artifacts += _run_surface_item(config, input_id, dataset, sport, grid_spec,
                                       integration, out_dir, overrides)

    return [ManifestEntry(input_id=input_id, model=config.model,
                          path=str(p.relative_to(out_dir)), sha256=_sha256(p))
            for p in artifacts]


def _export_grid(grid: ControlGrid, frame, stem: Path, render: bool) -> list[Path]:
    paths = [stem.with_suffix(".csv"), stem.with_suffix(".spcg")]
    write_grid_csv(grid, paths[0])
    write_grid_binary(grid, paths[1])
    if render:
        png = stem.with_suffix(".png")
        render_heatmap(grid, frame, png, RenderStyle())
        paths.append(png)
    return paths


def _pbcf_params(config: RunConfig, overrides: dict) -> PBCFParams:
    values = dict(overrides.get("bimos", {}))
    if config.bimos_combine:
        values["combine"] = config.bimos_combine
    if config.pass_speed:
        values["pass_speed"] = config.pass_speed
    if config.dribble_speed:
        values["dribble_speed"] = config.dribble_speed
    return PBCFParams(**values)


def _run_surface_item(config, input_id, dataset, sport, grid_spec, integration, out_dir,
                      overrides):
    frames = _selected_frames(config, dataset)
    report = EvaluationReport(model=config.model, params_hash="")
    rows = []
    artifacts: list[Path] = []
    skipped = 0
    hash_source = None
    obso_params = replace(ObsoParams.from_sport(sport), **overrides.get("obso", {}))

    for idx in frames:
        frame = dataset.frames[idx]
        attacking = _attacking_team(dataset, idx)
        params = ControlParams.from_sport(sport, attacking_team=attacking,
                                          **overrides.get("control", {}))
        try:
            if config.model == "ppcf":
                grid = ppcf_grid(frame, grid_spec, params, integration)
                summary = team_control_summary(grid)
                rows.append([idx, summary["mean"], summary["max"], summary["mass"]])
            elif config.model == "obso":
                result = obso_surface(frame, grid_spec, sport, params=obso_params,
                                      control_params=params, integration=integration)
                grid = ControlGrid(spec=grid_spec, attack=result.values,
                                   defend=np.zeros_like(result.values),
                                   converged=np.ones_like(result.values, dtype=bool),
                                   metadata=result.metadata)
                rows.append([idx, result.total, 0.0, 0.0])
            else:  # bimos
                pb = _pbcf_params(config, overrides)
                result = bimos_surface(frame, grid_spec, sport, params=params,
                                       pbcf_params=pb, integration=integration,
                                       obso_params=obso_params)
                grid = ControlGrid(spec=grid_spec, attack=result.values,
                                   defend=np.zeros_like(result.values),
                                   converged=np.ones_like(result.values, dtype=bool),
                                   metadata=result.metadata)
                rows.append([idx, result.total, 0.0, 0.0])
        except (SpacefieldError,) as exc:
            skipped += 1
            print(f"spacefield: {input_id} frame {idx} skipped: {exc}", file=sys.stderr)
            continue
        hash_source = grid.metadata.get("params", "")
        artifacts += _export_grid(grid, frame, out_dir / f"{input_id}_f{idx:05d}_{config.model}", config.render)

    if not artifacts:
        raise InputError(f"no frames of {input_id} could be evaluated")

    report.params_hash = hash_source or ""
    report.scalars["frames_evaluated"] = float(len(rows))
    report.scalars["frames_skipped"] = float(skipped)
    report.tables["frames"] = (["frame", "value", "max", "mass"], rows)
    report_path = out_dir / f"{input_id}_{config.model}_report.txt"
    export_report(report, report_path)
    artifacts.append(report_path)
    return artifacts


def _run_timing_item(config, input_id, dataset, sport, grid_spec, integration, out_dir,
                     overrides):
    if config.receiver is None or config.initiation_frame is None:
        raise ConfigurationError("wuppcf runs need --receiver and --initiation-frame")
    receiver = player_ref(config.receiver)
    t0 = config.initiation_frame
    window = config.frames or (0, dataset.n_frames)
    holder = _holder_at(dataset, t0)
    if holder is None:
        raise InputError("no possession event identifies a disc holder at the initiation frame")

    play = Play.from_dataset(dataset, window[0], window[1], holder=holder, t0=t0)
    attacking = _attacking_team(dataset, t0)
    params = ControlParams.from_sport(sport, attacking_team=attacking,
                                      **overrides.get("control", {}))
    weight_values = dict(overrides.get("wuppcf", {}))
    if "xi_range" in weight_values:
        weight_values["xi_range"] = tuple(weight_values["xi_range"])
    weights = WeightParams(**weight_values)
    offsets = config.xi_range or weights.xi_range

    table = v_timing_table(play, receiver, grid_spec, params, weights, integration,
                           xi_range=offsets)
    gap = timing_gap({xi: sv.value for xi, sv in table.items()})

    report = EvaluationReport(model="wuppcf", params_hash=params_hash(params, weights))
    report.scalars["v_timing"] = gap
    report.scalars["v_scenario_actual"] = table[0].value
    report.scalars["max_v_frame"] = float(np.max(table[0].series))
    report.tables["scenarios"] = (
        ["xi", "v_scenario", "argmax_frame"],
        [[xi, sv.value, sv.argmax_frame] for xi, sv in sorted(table.items())],
    )
    artifacts = []

    # within-possession dynamics: high-control area ratio of the realized play
    ratios = [
        high_control_ratio(
            wuppcf_grid(play.snapshot(i), holder, grid_spec, params, weights, integration),
            RATIO_TAU)
        for i in range(play.n_frames)
    ]
    ratio = ratio_series(play.times, ratios, tau=RATIO_TAU, delta=RATIO_DELTA,
                         possession_id=input_id)
    report.scalars["peak_ratio"] = ratio.peak
    ratio_path = out_dir / f"{input_id}_wuppcf_ratio.csv"
    with open(ratio_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(ratio_series_csv(ratio))
    artifacts.append(ratio_path)

    report_path = out_dir / f"{input_id}_wuppcf_scenarios.txt"
    export_report(report, report_path)
    artifacts.append(report_path)

    series_path = out_dir / f"{input_id}_wuppcf_vframe.csv"
    with open(series_path, "w", encoding="utf-8", newline="") as fh:
        fh.write("xi,frame,v_frame\n")
        for xi, sv in sorted(table.items()):
            start = play.t0 + xi
            for offset, value in enumerate(sv.series):
                fh.write(f"{xi},{start + offset},{fmt_float(float(value))}\n")
    artifacts.append(series_path)

    # grid export of the realized play at its initiation frame
    frame = play.snapshot(play.t0)
    grid = wuppcf_grid(frame, holder, grid_spec, params, weights, integration)
    artifacts += _export_grid(grid, frame, out_dir / f"{input_id}_t{t0:05d}_wuppcf", config.render)
    return artifacts


# --- report export ----------------------------------------------------------

REPORT_HEADER = "spacefield-report 1"


def export_report(report: EvaluationReport, path) -> None:
    """Write a report as the documented structured text format.

    Layout: a header line, ``model:`` and ``params:`` fields, a ``[scalars]``
    section of ``name: value`` lines, then one ``[table NAME]`` section per
    table with tab-separated columns. Floats use ``repr`` so parsing returns
    identical values.
    """
    lines = [REPORT_HEADER, f"model: {report.model}", f"params: {report.params_hash}"]
    lines.append("[scalars]")
    for name in sorted(report.scalars):
        lines.append(f"{name}: {fmt_float(float(report.scalars[name]))}")
    for name in sorted(report.tables):
        columns, rows = report.tables[name]
        lines.append(f"[table {name}]")
        lines.append("\t".join(columns))
        for row in rows:
            lines.append("\t".join(_cell_str(c) for c in row))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


def _cell_str(cell) -> str:
    if isinstance(cell, bool):
        return str(cell)
    if isinstance(cell, float):
        return fmt_float(cell)
    return str(cell)


def _cell_value(text: str):
    if text == "":
        return ""
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def parse_report(path) -> EvaluationReport:
    """Read back a report written by :func:`export_report`."""
    with open(path, "r", encoding="utf-8") as fh:
        lines = [line.rstrip("\n") for line in fh]
    if not lines or lines[0] != REPORT_HEADER:
        raise InputError(f"{path}: not a spacefield report")
    report = EvaluationReport(model="", params_hash="")
    section = None
    table_name = None
    columns: list[str] | None = None
    for line in lines[1:]:
        if not line:
            continue
        if line.startswith("model: "):
            report.model = line[len("model: "):]
        elif line.startswith("params: "):
            report.params_hash = line[len("params: "):]
        elif line == "[scalars]":
            section = "scalars"
        elif line.startswith("[table ") and line.endswith("]"):
            section = "table"
            table_name = line[len("[table "):-1]
            columns = None
        elif section == "scalars":
            name, _, value = line.partition(": ")
            report.scalars[name] = float(value)
        elif section == "table":
            cells = line.split("\t")
            if columns is None:
                columns = cells
                report.tables[table_name] = (columns, [])
            else:
                report.tables[table_name][1].append([_cell_value(c) for c in cells])
    return report
