"""JSON checkpoint files for learners and agents.

Every checkpointable object writes a dict with a ``kind`` tag and
row-major matrix payloads; loading dispatches on the tag.
"""

import json

from .agents import AcOselmAgent, OsQNetAgent
from .elm import OselmRegressor
from .exceptions import ConfigError

_KINDS = {
    "oselm": OselmRegressor,
    "qnet_agent": OsQNetAgent,
    "ac_agent": AcOselmAgent,
}


def save_checkpoint(path, obj):
    """Write ``obj.to_checkpoint()`` as JSON; returns the path."""
    payload = obj.to_checkpoint()
    kind = payload.get("kind")
    if kind not in _KINDS:
        raise ConfigError(f"object produced unknown checkpoint kind {kind!r}")
    with open(path, "w") as fh:
        json.dump(payload, fh)
    return path


def load_checkpoint(path):
    """Read a checkpoint file and rebuild the object it describes."""
    with open(path) as fh:
        payload = json.load(fh)
    kind = payload.get("kind")
    if kind not in _KINDS:
        raise ConfigError(f"{path}: unknown checkpoint kind {kind!r}")
    return _KINDS[kind].from_checkpoint(payload)
