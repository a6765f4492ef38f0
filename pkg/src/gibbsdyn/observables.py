"""Scalar observables sampled along trajectories."""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .functionals import TestField
from .geometry import Configuration


class Observable:
    name = "observable"

    def __call__(self, config: Configuration, displacement: Optional[np.ndarray] = None) -> float:
        raise NotImplementedError


@dataclass(frozen=True)
class ParticleCount(Observable):
    name: str = "N"

    def __call__(self, config, displacement=None) -> float:
        return float(len(config))


@dataclass(frozen=True)
class LinearStatistic(Observable):
    """<psi, gamma> = sum of psi over the points."""
    field: TestField
    name: str = "psi"

    def __call__(self, config, displacement=None) -> float:
        if len(config) == 0:
            return 0.0
        return float(np.sum(self.field.value(config.points, config.box)))


@dataclass(frozen=True)
class PairCount(Observable):
    """Number of unordered pairs closer than `radius`."""
    radius: float
    name: str = "pairs"

    def __call__(self, config, displacement=None) -> float:
        n = len(config)
        if n < 2:
            return 0.0
        pts = config.points
        i, j = np.triu_indices(n, k=1)
        d = np.atleast_1d(config.box.dist(pts[i], pts[j]))
        return float(np.sum(d < self.radius))


@dataclass(frozen=True)
class MeanSquaredDisplacement(Observable):
    """Mean over particles of the squared unwrapped displacement since t = 0."""
    name: str = "msd"

    def __call__(self, config, displacement=None) -> float:
        if displacement is None or len(displacement) == 0:
            return 0.0
        return float(np.mean(np.sum(displacement * displacement, axis=1)))


def default_battery(field: TestField, pair_radius: float, include_count: bool = True):
    """Observables for equilibrium invariance tests."""
    battery = [LinearStatistic(field), PairCount(pair_radius)]
    if include_count:
        battery.insert(0, ParticleCount())
    return battery
