"""Exact spatial birth-and-death (Glauber) dynamics."""
import logging
import math
from typing import Optional

import numpy as np

from ..errors import InvariantViolation
from ..geometry import Configuration
from ..models import Event
from ..potentials import PairPotential, relative_energy
from ..rates import GlauberRates, GlauberSpec
from .base import Engine

logger = logging.getLogger(__name__)


class GlauberEngine(Engine):
    """Deaths at rate d_s(x, gamma) per particle, births with intensity z b_s(x, gamma) dx.

    Death rates are kept exactly; births are proposed uniformly in the box at
    a constant bound rate and thinned.
    """

    kind = "glauber"

    def __init__(self, spec: GlauberSpec, potential: PairPotential, config: Configuration,
                 rng: Optional[np.random.Generator] = None, seed: int = 0):
        super().__init__(potential, config, rng, seed)
        self.spec = spec
        dim = self.box.dim
        density_bound = spec.birth_bound_density(potential.negative_energy_bound(dim))
        self.rates = GlauberRates(np.zeros(0), spec.activity * self.box.volume * density_bound, density_bound)
        self.refresh()

    def refresh(self):
        n = len(self.state)
        self._energy = np.array(
            [relative_energy(self.state.point(i), self.state, self.potential, exclude=i) for i in range(n)]
        ).reshape(n)
        self._death = np.broadcast_to(np.asarray(self.spec.death_rate(self._energy), dtype=float), (n,)).copy()

    @property
    def death_rates(self) -> np.ndarray:
        return self._death

    def _total_rate(self) -> float:
        return float(np.sum(self._death)) + self.rates.birth_majorant

    def _recompute_near(self, location):
        if self.potential.is_null:
            return
        found = self.state.cells.neighbors(location, self.potential.range, self.state)
        for j, _, _ in found:
            e = relative_energy(self.state.point(j), self.state, self.potential, exclude=j)
            self._energy[j] = e
            self._death[j] = self.spec.death_rate(e)

    def _fire(self, time: float) -> Event:
        n = len(self.state)
        deaths = float(np.sum(self._death)) if n else 0.0
        total = deaths + self.rates.birth_majorant
        if self.rng.random() * total < deaths:
            cumulative = np.cumsum(self._death)
            i = min(int(np.searchsorted(cumulative, self.rng.random() * cumulative[-1], side="right")), n - 1)
            x = self.state.remove(i)
            last = n - 1
            if i != last:
                self._energy[i] = self._energy[last]
                self._death[i] = self._death[last]
            self._energy = self._energy[:last]
            self._death = self._death[:last]
            self._recompute_near(x)
            self._count("death")
            event = Event(time, "death", i, x)
        else:
            x = self.box.uniform(self.rng)
            e = relative_energy(x, self.state, self.potential)
            p = self.rates.birth_acceptance(self.spec.birth_rate(e))
            if self.rng.random() >= p:
                self._count("null")
                return Event(time, "null", None, x)
            if math.isinf(e):
                raise InvariantViolation("accepted birth inside a hard core")
            index = self.state.add(x)
            self._energy = np.append(self._energy, e)
            self._death = np.append(self._death, self.spec.death_rate(e))
            self._recompute_near(x)
            self._count("birth")
            event = Event(time, "birth", index, x)
        if abs(len(self.state) - n) != 1:
            raise InvariantViolation(f"event changed N from {n} to {len(self.state)}")
        return event
