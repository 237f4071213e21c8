"""Command-line interface.

    spacefield <model> --sport ultimate --provider ufa \
        --event-data events.csv --tracking-home home.csv --tracking-away away.csv \
        --out-path out/ [--grid 55x25] [--frames 0:120] \
        [--receiver Home_3 --initiation-frame 40 --xi-range -20:20:5] \
        [--jobs 4] [--render]

The SPACEFIELD_CONFIG environment variable (or --config) points at a YAML
tree of sport/provider/model overrides; command-line flags win over the file.
"""

from __future__ import annotations

import argparse
import sys

from .batch import KNOWN_MODELS, RunConfig, run_batch
from .config import load_config_file
from .errors import ConfigurationError, SpacefieldError


def _parse_grid(text: str) -> tuple[int, int]:
    for sep in ("x", "X", "×"):
        if sep in text:
            a, _, b = text.partition(sep)
            try:
                return int(a), int(b)
            except ValueError:
                break
    raise argparse.ArgumentTypeError(f"expected NXxNY (e.g. 50x32), got {text!r}")


def _parse_frames(text: str) -> tuple[int, int]:
    try:
        a, _, b = text.partition(":")
        return int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a:b frame range, got {text!r}") from None


def _parse_xi_range(text: str) -> tuple[int, ...]:
    try:
        lo, hi, step = (int(p) for p in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected min:max:step, got {text!r}") from None
    if step <= 0 or hi < lo:
        raise argparse.ArgumentTypeError(f"bad offset range {text!r}")
    offsets = set(range(lo, hi + 1, step))
    offsets.add(0)
    return tuple(sorted(offsets))


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spacefield",
        description="Compute pitch control / space value surfaces from tracking data.",
    )
    parser.add_argument("model", nargs="?", choices=KNOWN_MODELS, help="space model to run")
    parser.add_argument("--space-model", choices=KNOWN_MODELS, default=None,
                        help="alternative spelling of the positional model argument")
    parser.add_argument("--sport", required=True, choices=("ultimate", "soccer", "basketball"))
    parser.add_argument("--provider", required=True, help="coordinate provider id (e.g. metric, statsbomb, ufa)")
    parser.add_argument("--event-data", required=True, help="event CSV file or directory")
    parser.add_argument("--tracking-home", required=True, help="home tracking CSV file or directory")
    parser.add_argument("--tracking-away", required=True, help="away tracking CSV file or directory")
    parser.add_argument("--out-path", required=True, help="output directory")
    parser.add_argument("--grid", type=_parse_grid, default=None, metavar="NXxNY")
    parser.add_argument("--frames", type=_parse_frames, default=None, metavar="A:B",
                        help="frame selection [A, B); default: event start frames")
    parser.add_argument("--receiver", default=None, metavar="SIDE_N", help="receiver id, e.g. Home_3")
    parser.add_argument("--initiation-frame", type=int, default=None, metavar="N")
    parser.add_argument("--xi-range", type=_parse_xi_range, default=None, metavar="MIN:MAX:STEP")
    parser.add_argument("--jobs", type=int, default=0, help="parallel items; 0 = available cores")
    parser.add_argument("--render", action="store_true", help="also write PNG heatmaps")
    parser.add_argument("--bimos-combine", choices=("mix", "max"), default=None)
    parser.add_argument("--pass-speed", type=float, default=None, metavar="M/S")
    parser.add_argument("--dribble-speed", type=float, default=None, metavar="M/S")
    parser.add_argument("--config", default=None, help="YAML config file (else $SPACEFIELD_CONFIG)")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    model = args.space_model or args.model
    if model is None:
        parser.error("a space model is required (positional or --space-model)")
    if args.model and args.space_model and args.model != args.space_model:
        parser.error(f"conflicting models {args.model!r} and {args.space_model!r}")
    try:
        tree = load_config_file(args.config)
        grid = args.grid or _grid_from_tree(tree)
        config = RunConfig(
            model=model,
            sport=args.sport,
            provider=args.provider,
            event_data=args.event_data,
            tracking_home=args.tracking_home,
            tracking_away=args.tracking_away,
            out_path=args.out_path,
            grid_nx=grid[0] if grid else None,
            grid_ny=grid[1] if grid else None,
            frames=args.frames,
            receiver=args.receiver,
            initiation_frame=args.initiation_frame,
            xi_range=args.xi_range,
            jobs=args.jobs,
            render=args.render,
            bimos_combine=args.bimos_combine,
            pass_speed=args.pass_speed,
            dribble_speed=args.dribble_speed,
            config_tree=tree,
        )
        result = run_batch(config)
    except SpacefieldError as exc:
        print(f"spacefield: error: {exc}", file=sys.stderr)
        return 2

    print(f"wrote {len(result.entries)} artifacts to {config.out_path} "
          f"({len(result.failures)} item(s) failed)")
    print(f"manifest: {result.manifest_path}")
    return 0 if result.ok else 1


def _grid_from_tree(tree: dict) -> tuple[int, int] | None:
    section = tree.get("grid")
    if not section:
        return None
    try:
        return int(section["nx"]), int(section["ny"])
    except (KeyError, TypeError, ValueError):
        raise ConfigurationError("config grid section needs integer nx and ny") from None


if __name__ == "__main__":
    raise SystemExit(main())
