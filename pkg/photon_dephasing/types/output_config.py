"""Typed configuration for scenario output files."""

from typing import TypedDict


class OutputConfig(TypedDict):
    directory: str
    prefix: str


__all__ = ["OutputConfig"]
