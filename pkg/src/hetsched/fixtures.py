"""Bundled ARM big.LITTLE platform and the benchmark tasksets."""

from __future__ import annotations

import json
from importlib import resources

from .fileio import platform_from_dict, task_from_dict
from .model import Platform


def _data():
    return resources.files("hetsched") / "data"


def data_path(*parts) -> str:
    return str(_data().joinpath(*parts))


def arm_platform(big: int = 2, little: int = 6) -> Platform:
    """Cortex-A15 (big) + Cortex-A7 (LITTLE) with the fitted power models."""
    doc = json.loads(_data().joinpath("platforms", "arm_2big_6little.json").read_text())
    doc["types"][0]["cores"] = big
    doc["types"][1]["cores"] = little
    return platform_from_dict(doc)


def measured_power() -> dict:
    """Measured (speed, mW) pairs per type name."""
    doc = json.loads(_data().joinpath("platforms", "arm_2big_6little.json").read_text())
    return {t["name"]: list(zip(t["speeds"], t["measured_power"])) for t in doc["types"]}


def _load_dir(kind: str) -> dict:
    out = {}
    for entry in sorted(_data().joinpath("tasksets", kind).iterdir(), key=lambda p: p.name):
        if not entry.name.endswith(".json"):
            continue
        doc = json.loads(entry.read_text())
        out[float(doc["density"])] = [task_from_dict(d) for d in doc["tasks"]]
    return out


def implicit_tasksets() -> dict:
    """Implicit-deadline tasksets keyed by their nominal density D."""
    return _load_dir("implicit")


def constrained_tasksets() -> dict:
    """Constrained-deadline tasksets keyed by their nominal density D."""
    return _load_dir("constrained")
