"""Small shared helpers: canonical hashing and float formatting."""

import dataclasses
import hashlib
import json

import numpy as np


def _canonical(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _canonical(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in sorted(obj.items(), key=lambda kv: str(kv[0]))}
    if isinstance(obj, (list, tuple)):
        return [_canonical(v) for v in obj]
    return obj


def params_hash(*objs) -> str:
    """Stable 12-hex-char digest of one or more parameter objects.

    Dataclasses, dicts, arrays and scalars are serialized canonically so the
    same parameters always hash to the same value across runs.
    """
    payload = json.dumps([_canonical(o) for o in objs], sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:12]


def fmt_float(value: float) -> str:
    """Shortest decimal string that parses back to the identical double."""
    if value != value:  # NaN encodes as an empty cell
        return ""
    return repr(float(value))
