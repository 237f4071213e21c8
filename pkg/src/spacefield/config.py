"""Sport geometry, provider coordinate conventions and config-file loading.

All downstream models work in one canonical frame: meters, origin at the
field center, x along the field length, attack toward +x. Providers declare
how their raw coordinates map into that frame; sports declare geometry,
roster size, sampling rate and default model parameters.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, replace

import yaml

from .errors import ConfigurationError
from .kinematics import BallModel, PlayerMotionParams

YARD = 0.9144

CONFIG_ENV_VAR = "SPACEFIELD_CONFIG"


@dataclass(frozen=True)
class SportConfig:
    """Field geometry and default model parameters for one sport."""

    sport: str  # "ultimate" | "soccer" | "basketball"
    field_length: float  # m
    field_width: float  # m
    endzone_depth: float  # m; 0 when the sport scores on a goal, not a zone
    players_per_side: int
    sample_rate: float  # Hz
    attacker_motion: PlayerMotionParams = field(default_factory=PlayerMotionParams)
    defender_motion: PlayerMotionParams = field(default_factory=PlayerMotionParams)
    ball: BallModel = field(default_factory=BallModel)
    grid_nx: int = 50
    grid_ny: int = 32

    def __post_init__(self):
        if not (self.field_length > 0 and self.field_width > 0):
            raise ConfigurationError("field dimensions must be positive")
        if self.players_per_side < 1:
            raise ConfigurationError("players_per_side must be >= 1")
        if not (self.sample_rate > 0):
            raise ConfigurationError("sample_rate must be > 0")
        if self.endzone_depth < 0 or 2 * self.endzone_depth >= self.field_length:
            raise ConfigurationError("end zones must fit inside the field")

    @property
    def dt(self) -> float:
        return 1.0 / self.sample_rate

    @property
    def half_length(self) -> float:
        return self.field_length / 2.0

    @property
    def half_width(self) -> float:
        return self.field_width / 2.0

    @property
    def attack_target(self) -> tuple[float, float]:
        """Scoring target on the +x side: goal center, or end-zone front line center."""
        if self.endzone_depth > 0:
            return (self.half_length - self.endzone_depth, 0.0)
        return (self.half_length, 0.0)


def _ultimate() -> SportConfig:
    # UFA field: 80 x 53.33 yards with 20-yard end zones, 10 Hz tracking
    return SportConfig(
        sport="ultimate",
        field_length=109.73,
        field_width=48.77,
        endzone_depth=20 * YARD,
        players_per_side=7,
        sample_rate=10.0,
        ball=BallModel(speed=12.0),
        grid_nx=55,
        grid_ny=25,
    )


def _soccer() -> SportConfig:
    return SportConfig(
        sport="soccer",
        field_length=105.0,
        field_width=68.0,
        endzone_depth=0.0,
        players_per_side=11,
        sample_rate=25.0,
        ball=BallModel(speed=15.0, dribble_speed=7.0),
        grid_nx=50,
        grid_ny=32,
    )


def _basketball() -> SportConfig:
    return SportConfig(
        sport="basketball",
        field_length=28.65,
        field_width=15.24,
        endzone_depth=0.0,
        players_per_side=5,
        sample_rate=25.0,
        ball=BallModel(speed=8.0, dribble_speed=4.0),
        grid_nx=14,
        grid_ny=8,
    )


_SPORTS = {"ultimate": _ultimate, "soccer": _soccer, "basketball": _basketball}


def sport_config(sport: str, **overrides) -> SportConfig:
    """Default :class:`SportConfig` for a sport id, with optional field overrides."""
    try:
        base = _SPORTS[sport]()
    except KeyError:
        raise ConfigurationError(f"unknown sport {sport!r}; expected one of {sorted(_SPORTS)}") from None
    return replace(base, **overrides) if overrides else base


@dataclass(frozen=True)
class ProviderSpec:
    """How a provider's raw coordinates map into the canonical metric frame.

    ``extent`` gives the source coordinate span (e.g. (100, 100) for a
    normalized grid); ``None`` means the source is already in length units and
    only ``unit_scale`` applies. ``origin`` is "corner" when (0, 0) sits on a
    field corner and "center" when it is already centered. The map is affine.
    """

    name: str
    extent: tuple[float, float] | None = None
    origin: str = "center"
    unit_scale: float = 1.0
    flip_y: bool = False

    def __post_init__(self):
        if self.origin not in ("corner", "center"):
            raise ConfigurationError(f"provider origin must be 'corner' or 'center', got {self.origin!r}")
        if self.extent is not None and (self.extent[0] <= 0 or self.extent[1] <= 0):
            raise ConfigurationError("provider extent components must be positive")
        if not (self.unit_scale > 0):
            raise ConfigurationError("unit_scale must be positive")


_PROVIDERS = {
    # already metric, centered: the package's own canonical frame
    "metric": ProviderSpec(name="metric"),
    # StatsBomb-style 100x100 normalized grid with a corner origin
    "statsbomb": ProviderSpec(name="statsbomb", extent=(100.0, 100.0), origin="corner"),
    # Metrica-style unit square with a corner origin
    "metrica": ProviderSpec(name="metrica", extent=(1.0, 1.0), origin="corner"),
    # UFA annotations: metric units measured from a field corner
    "ufa": ProviderSpec(name="ufa", origin="corner"),
}


def provider_spec(provider: str) -> ProviderSpec:
    try:
        return _PROVIDERS[provider]
    except KeyError:
        raise ConfigurationError(
            f"unknown provider {provider!r}; expected one of {sorted(_PROVIDERS)}"
        ) from None


def register_provider(spec: ProviderSpec) -> None:
    _PROVIDERS[spec.name] = spec


def load_config_file(path: str | None = None) -> dict:
    """Load the structured key/value config tree (YAML).

    Falls back to the ``SPACEFIELD_CONFIG`` environment variable, then to an
    empty tree. Recognized sections: ``sports.<id>`` (SportConfig and
    kinematic overrides), ``providers.<id>``, ``models`` (per-model parameter
    overrides).
    """
    if path is None:
        path = os.environ.get(CONFIG_ENV_VAR)
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        tree = yaml.safe_load(fh) or {}
    if not isinstance(tree, dict):
        raise ConfigurationError(f"config file {path} must contain a mapping at the top level")
    return tree


def sport_config_from_tree(sport: str, tree: dict) -> SportConfig:
    """Build a SportConfig from defaults plus a config-file section."""
    section = (tree.get("sports") or {}).get(sport) or {}
    motion_keys = {"reaction_time", "v_max", "a_max", "tti_sigma", "control_rate", "arrival_model"}
    base = sport_config(sport)

    att = dict(section.get("attacker_motion") or section.get("kinematics") or {})
    dfn = dict(section.get("defender_motion") or section.get("kinematics") or {})
    unknown = (set(att) | set(dfn)) - motion_keys
    if unknown:
        raise ConfigurationError(f"unknown kinematic keys {sorted(unknown)} for sport {sport!r}")
    ball_sec = dict(section.get("ball") or {})

    overrides = {
        k: v
        for k, v in section.items()
        if k in ("field_length", "field_width", "endzone_depth", "players_per_side",
                 "sample_rate", "grid_nx", "grid_ny")
    }
    if att:
        overrides["attacker_motion"] = replace(base.attacker_motion, **att)
    if dfn:
        overrides["defender_motion"] = replace(base.defender_motion, **dfn)
    if ball_sec:
        overrides["ball"] = replace(base.ball, **ball_sec)
    return replace(base, **overrides) if overrides else base


def model_params_from_tree(tree: dict) -> dict:
    """Per-model parameter overrides from the config tree's ``models`` section.

    Known subsections: ``control``, ``integration``, ``obso``, ``wuppcf``,
    ``bimos``. Unknown names are rejected so config typos surface early.
    """
    section = tree.get("models") or {}
    known = {"control", "integration", "obso", "wuppcf", "bimos"}
    unknown = set(section) - known
    if unknown:
        raise ConfigurationError(f"unknown model config sections {sorted(unknown)}")
    return {name: dict(values or {}) for name, values in section.items()}


def provider_from_tree(provider: str, tree: dict) -> ProviderSpec:
    """Resolve a provider id against built-ins plus any config-file additions."""
    section = (tree.get("providers") or {}).get(provider)
    if section is not None:
        extent = section.get("extent")
        return ProviderSpec(
            name=provider,
            extent=tuple(extent) if extent else None,
            origin=section.get("origin", "center"),
            unit_scale=float(section.get("unit_scale", 1.0)),
            flip_y=bool(section.get("flip_y", False)),
        )
    return provider_spec(provider)
