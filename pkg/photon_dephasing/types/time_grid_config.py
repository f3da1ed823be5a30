"""Typed configuration for a uniform time grid."""

from typing import TypedDict


class TimeGridConfig(TypedDict):
    t_start: float
    t_end: float
    n_points: int


__all__ = ["TimeGridConfig"]
