"""Typed record of one verification check."""

from typing import TypedDict


class CheckResult(TypedDict):
    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str
    elapsed: float


__all__ = ["CheckResult"]
