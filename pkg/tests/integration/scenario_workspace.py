"""Temporary output directory plus helpers to run the command line against it."""

import csv
import json
import shutil
import tempfile
from pathlib import Path
from typing import Any, Dict, List

import yaml

from photon_dephasing.cli import main

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


class ScenarioWorkspace:
    """Holds one output directory for the duration of a test."""

    def __init__(self) -> None:
        self.root = Path(tempfile.mkdtemp(prefix="photon-dephasing-"))

    def scenario(self, name: str) -> Path:
        return SCENARIOS / f"{name}.yml"

    def write_scenario(self, name: str, document: Dict[str, Any]) -> Path:
        path = self.root / f"{name}.yml"
        path.write_text(yaml.safe_dump(document), encoding="utf-8")
        return path

    def run(self, command: str, *args: str, out: str = "out") -> int:
        return main([command, "--out", str(self.root / out), *args])

    def rows(self, prefix: str, out: str = "out") -> List[Dict[str, float]]:
        with open(self.root / out / f"{prefix}.csv", encoding="utf-8", newline="") as fh:
            return [{key: float(value) for key, value in row.items()} for row in csv.DictReader(fh)]

    def summary(self, prefix: str, out: str = "out") -> Dict[str, Any]:
        return json.loads((self.root / out / f"{prefix}.json").read_text(encoding="utf-8"))

    def raw(self, prefix: str, suffix: str, out: str = "out") -> bytes:
        return (self.root / out / f"{prefix}.{suffix}").read_bytes()

    def clear(self) -> None:
        shutil.rmtree(self.root, ignore_errors=True)
