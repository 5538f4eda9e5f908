"""JSON readers/writers for tasksets and platforms.

Taskset file: either a bare JSON array of task objects or an object
``{"units": {...}, "tasks": [...]}``. Each task has ``id``, ``deadline``,
optional ``period`` and ``arrival``, and one of ``cycles`` /
``min_exec_time``. Times are seconds.

Platform file::

    {"units": {...}, "f_max": 1.6e9,
     "types": [{"name": "big", "cores": 2, "speeds": [...], "alpha": ...,
                "beta": ..., "p_static": ..., "p_idle": ...}, {...}]}

Power constants are mW, speeds are fractions of ``f_max`` (Hz).
"""

from __future__ import annotations

import json
from pathlib import Path

from .model import Platform, ProcessorType, TaskSpec

TASKSET_UNITS = {"deadline": "s", "period": "s", "arrival": "s",
                 "min_exec_time": "s at f_max", "cycles": "cycles"}
PLATFORM_UNITS = {"f_max": "Hz", "speeds": "fraction of f_max", "alpha": "mW",
                  "beta": "dimensionless", "p_static": "mW", "p_idle": "mW"}


def task_from_dict(d: dict) -> TaskSpec:
    return TaskSpec(id=str(d["id"]), deadline=d["deadline"], period=d.get("period"),
                    cycles=d.get("cycles"), min_exec_time=d.get("min_exec_time"),
                    arrival=d.get("arrival", 0.0))


def task_to_dict(t: TaskSpec) -> dict:
    out = {"id": t.id}
    if t.min_exec_time is not None:
        out["min_exec_time"] = t.min_exec_time
    else:
        out["cycles"] = t.cycles
    out["deadline"] = t.deadline
    if t.period is not None:
        out["period"] = t.period
    if t.arrival:
        out["arrival"] = t.arrival
    return out


def load_taskset(path) -> list:
    data = json.loads(Path(path).read_text())
    if isinstance(data, dict):
        data = data["tasks"]
    return [task_from_dict(d) for d in data]


def dump_taskset(tasks, path=None, label=None) -> str:
    doc = {"units": TASKSET_UNITS}
    if label is not None:
        doc["label"] = label
    doc["tasks"] = [task_to_dict(t) for t in tasks]
    text = json.dumps(doc, indent=1) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def platform_from_dict(d: dict) -> Platform:
    types = tuple(ProcessorType(name=t.get("name", f"type{i + 1}"), cores=int(t["cores"]),
                                speeds=tuple(t["speeds"]), alpha=t["alpha"], beta=t["beta"],
                                p_static=t["p_static"], p_idle=t["p_idle"])
                  for i, t in enumerate(d["types"]))
    return Platform(types, float(d.get("f_max", 1.0)))


def platform_to_dict(p: Platform) -> dict:
    return {"units": PLATFORM_UNITS, "f_max": p.f_max,
            "types": [{"name": t.name, "cores": t.cores, "speeds": list(t.speeds),
                       "alpha": t.alpha, "beta": t.beta, "p_static": t.p_static,
                       "p_idle": t.p_idle} for t in p.types]}


def load_platform(path) -> Platform:
    return platform_from_dict(json.loads(Path(path).read_text()))


def dump_platform(p: Platform, path=None) -> str:
    text = json.dumps(platform_to_dict(p), indent=1) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text
