"""Typed configuration describing a frequency distribution."""

from typing import List, TypedDict


class SpectrumConfig(TypedDict, total=False):
    kind: str
    mean: float
    sigma: float
    center: float
    width: float
    means: List[float]
    sigmas: List[float]
    weights: List[float]
    omega0: float
    delta_omega: float
    K: float
    path: str
    normalize: bool


__all__ = ["SpectrumConfig"]
