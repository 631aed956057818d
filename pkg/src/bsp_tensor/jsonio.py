"""Canonical JSON: sorted keys, compact separators, floats with 17 significant digits."""
from __future__ import annotations

import json
import math

import numpy as np


def _fmt_float(v: float) -> str:
    if not math.isfinite(v):
        raise ValueError(f"non-finite float {v!r} cannot be serialized")
    s = format(v, ".17g")
    if "." not in s and "e" not in s and "n" not in s:
        s += ".0"
    return s


def _emit(obj, out: list):
    if obj is None or isinstance(obj, (bool, np.bool_)):
        out.append("null" if obj is None else ("true" if obj else "false"))
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(_fmt_float(float(obj)))
    elif isinstance(obj, str):
        out.append(json.dumps(obj, ensure_ascii=False))
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            if i:
                out.append(",")
            out.append(json.dumps(str(key), ensure_ascii=False))
            out.append(":")
            _emit(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple, np.ndarray)):
        out.append("[")
        for i, v in enumerate(obj):
            if i:
                out.append(",")
            _emit(v, out)
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj) -> str:
    out: list = []
    _emit(obj, out)
    return "".join(out)


def array_to_json(x: np.ndarray):
    """Nested lists (one level per axis) of ``[re, im]`` pairs."""
    x = np.asarray(x, dtype=complex)
    if x.ndim == 0:
        return [float(x.real), float(x.imag)]
    return [array_to_json(v) for v in x]


def array_from_json(data) -> np.ndarray:
    """Inverse of :func:`array_to_json`; also accepts ``{"data": ...}`` wrappers."""
    if isinstance(data, dict):
        data = data["data"]
    arr = np.asarray(data, dtype=float)
    if arr.ndim < 2 or arr.shape[-1] != 2:
        raise ValueError("input array must be nested lists of [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]
