"""spacefield: multi-sport pitch control and timing analysis from tracking data.

Submodules follow the pipeline order: :mod:`spacefield.space_data` ingests
tracking/event logs, :mod:`spacefield.kinematics` supplies the arrival model,
:mod:`spacefield.pitch_control` solves control surfaces,
:mod:`spacefield.obso` / :mod:`spacefield.bimos` compose scoring-opportunity
fields, :mod:`spacefield.timing` values run-initiation timing, and
:mod:`spacefield.evaluation`, :mod:`spacefield.render`, :mod:`spacefield.batch`
cover metrics, rendering and batch runs.
"""

from .config import SportConfig, ProviderSpec, provider_spec, sport_config
from .errors import SpacefieldError
from .kinematics import BallModel, PlayerMotionParams
from .pitch_control import ControlGrid, ControlParams, GridSpec, IntegrationParams
from .space_data import EventRecord, FrameSnapshot, SpaceDataset

__all__ = [
    "BallModel",
    "ControlGrid",
    "ControlParams",
    "EventRecord",
    "FrameSnapshot",
    "GridSpec",
    "IntegrationParams",
    "PlayerMotionParams",
    "ProviderSpec",
    "SpaceDataset",
    "SpacefieldError",
    "SportConfig",
    "provider_spec",
    "sport_config",
    "__version__",
]

__version__ = "0.1.0"
