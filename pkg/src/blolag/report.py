"""Deterministic JSON reports."""

from __future__ import annotations

import dataclasses
import json
import math

import numpy as np

from . import __version__

CAVEAT = ("suprema run only over configurations inside the bounded window, so norms and "
          "constants are lower bounds of their continuum values; upper-bound checks stay valid")


def _plain(obj):
    if hasattr(obj, "to_json"):
        return _plain(obj.to_json())
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return _plain(dataclasses.asdict(obj))
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, slice):
        return [obj.start, obj.stop]
    return obj


def _emit(obj, out: list) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        if math.isnan(obj):
            out.append('"nan"')
        elif math.isinf(obj):
            out.append('"inf"' if obj > 0 else '"-inf"')
        else:
            out.append(format(obj, ".17g"))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, list):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(", ")
            _emit(v, out)
        out.append("]")
    elif isinstance(obj, dict):
        out.append("{")
        for i, k in enumerate(sorted(obj)):
            if i:
                out.append(", ")
            out.append(json.dumps(k) + ": ")
            _emit(obj[k], out)
        out.append("}")
    else:
        raise TypeError(f"cannot serialise {type(obj).__name__}")


def dumps(obj) -> str:
    """Sorted keys, 17 significant digits, non-finite floats as strings."""
    out: list[str] = []
    _emit(_plain(obj), out)
    return "".join(out) + "\n"


def build(command: str, config: dict, result, family_caps=None) -> dict:
    return {"tool": "blolag", "version": __version__, "command": command,
            "config": config, "family_caps": family_caps, "caveat": CAVEAT,
            "result": result}
