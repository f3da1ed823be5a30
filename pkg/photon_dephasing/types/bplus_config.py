"""Typed configuration for a correlated single-photon B+ run."""

from typing import Any, Dict, List, TypedDict


class BPlusConfig(TypedDict, total=False):
    preset: str
    c_h: List[float]
    c_v: List[float]
    theta: Dict[str, Any]


__all__ = ["BPlusConfig"]
