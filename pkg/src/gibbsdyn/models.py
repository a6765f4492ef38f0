from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .geometry import Configuration, TorusBox


@dataclass
class Snapshot:
    """An equilibrium configuration recorded by the sampler."""
    points: np.ndarray
    sweep: int = 0
    seed: int = 0

    def __len__(self) -> int:
        return len(self.points)

    def to_configuration(self, box: TorusBox) -> Configuration:
        return Configuration(box, self.points)

    @classmethod
    def from_configuration(cls, config: Configuration, sweep: int = 0, seed: int = 0) -> "Snapshot":
        return cls(points=config.points.copy(), sweep=sweep, seed=seed)


@dataclass
class Event:
    """One engine event: hop, null, birth or death."""
    time: float
    kind: str
    index: Optional[int] = None
    location: Optional[np.ndarray] = None
    origin: Optional[np.ndarray] = field(default=None, repr=False)
