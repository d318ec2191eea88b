from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np


def _plain(x: Any) -> Any:
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (np.bool_,)):
        return bool(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating,)):
        return float(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [float(np.real(x)), float(np.imag(x))]
    if isinstance(x, float) and not np.isfinite(x):
        return str(x)
    return x


@dataclass
class Report:
    """Outcome of a numerical check: a verdict plus the measured quantities."""

    name: str
    passed: bool
    measured: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return _plain(asdict(self))

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def __bool__(self) -> bool:
        return bool(self.passed)


class InconclusiveNumerics(RuntimeError):
    """A numerical certificate could not be established (unstable count, unresolved contour)."""
