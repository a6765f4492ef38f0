"""Verification report documents."""
import json
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass, field
from typing import Any, Dict, Optional

import numpy as np


def to_plain(value: Any) -> Any:
    """numpy scalars and arrays to JSON-friendly python values."""
    if isinstance(value, dict):
        return {k: to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_plain(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        return to_plain(value.item())
    if isinstance(value, float) and not np.isfinite(value):
        return str(value)
    return value


@dataclass
class VerificationReport:
    name: str
    passed: bool
    statistic: float
    threshold: float
    stderr: float
    sample_sizes: Dict[str, int] = field(default_factory=dict)
    seed: Optional[int] = None
    runtime: float = 0.0
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self, include_runtime: bool = True) -> Dict[str, Any]:
        data = to_plain(asdict(self))
        data["passed"] = bool(self.passed)
        if not include_runtime:
            data.pop("runtime")
        return data

    def to_json(self, include_runtime: bool = True) -> str:
        return json.dumps(self.to_dict(include_runtime), indent=2, sort_keys=True)


@contextmanager
def timed():
    """Yields a dict whose "runtime" entry is filled in on exit."""
    box = {"runtime": 0.0}
    start = time.perf_counter()
    try:
        yield box
    finally:
        box["runtime"] = time.perf_counter() - start
