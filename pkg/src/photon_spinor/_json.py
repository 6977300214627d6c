"""JSON emission with 17-significant-digit floats.

The stock encoder prints floats with repr (shortest round-trip form).  Report
files pin every numeric field to 17 significant digits instead, which is
enough to reproduce the double exactly and keeps byte-level determinism
independent of repr heuristics.
"""

from __future__ import annotations

import json

import numpy as np


class _Float17(float):
    def __repr__(self) -> str:  # pragma: no cover - exercised via dumps
        return format(float(self), ".17g")


class _Encoder(json.JSONEncoder):
    def iterencode(self, o, _one_shot=False):
        # force the pure-python path so float subclass repr is honored
        return super().iterencode(o, _one_shot=False)


def _convert(obj):
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (float, np.floating)):
        return _Float17(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, complex):
        return [_Float17(obj.real), _Float17(obj.imag)]
    if isinstance(obj, np.ndarray):
        return [_convert(v) for v in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): _convert(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_convert(v) for v in obj]
    return obj


def dumps_17g(obj, indent: int = 2) -> str:
    """Serialize to JSON with every float at 17 significant digits."""
    return json.dumps(_convert(obj), cls=_Encoder, indent=indent, sort_keys=True)
