from typing import Any

from .cli import ScenarioRunner
from .config import load_config, parse_config
from .exception import PhotonDephasingException
from .map_builder import DephasingChannel


def channel(**kwargs: Any) -> DephasingChannel:
    """Factory helper for the exact dephasing channel of a frequency distribution."""

    return DephasingChannel(**kwargs)


def scenario(**kwargs: Any) -> ScenarioRunner:
    """Factory helper for a scenario runner; accepts ``config`` or a ``path`` to a YAML file."""

    path = kwargs.pop("path", None)
    if path is not None:
        kwargs["config"] = load_config(path)
    else:
        kwargs["config"] = parse_config(kwargs.get("config"))
    return ScenarioRunner(**kwargs)


__all__ = ["channel", "scenario", "DephasingChannel", "ScenarioRunner", "PhotonDephasingException"]
