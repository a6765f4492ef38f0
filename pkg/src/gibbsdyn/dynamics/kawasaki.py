"""Exact Kawasaki hop dynamics by thinning, plus a Metropolized swap chain."""
import logging
import math
from typing import List, Optional

import numpy as np

from ..errors import InvariantViolation
from ..geometry import Configuration
from ..models import Event
from ..potentials import PairPotential, relative_energy
from ..rates import HopEnergies, HopMajorant, RateSpec, hop_bound
from .base import Engine

logger = logging.getLogger(__name__)

REFRESH_INTERVAL = 10_000


class KawasakiEngine(Engine):
    """Particles hop x -> y with intensity z c~(x, y, gamma) dy.

    Each particle carries a bound lambda_bar(x) on its total hop rate; the
    next candidate comes from the superposed bound process and is accepted
    with the ratio of true to bound intensity.
    """

    kind = "kawasaki"

    def __init__(self, spec: RateSpec, potential: PairPotential, config: Configuration,
                 rng: Optional[np.random.Generator] = None, seed: int = 0,
                 refresh_interval: int = REFRESH_INTERVAL):
        super().__init__(potential, config, rng, seed)
        self.spec = spec
        self.refresh_interval = refresh_interval
        self.n0 = len(self.state)
        self.displacement = np.zeros((self.n0, self.box.dim))
        self._l1 = spec.kernel.l1_norm(self.box.dim)
        self._events_since_refresh = 0
        self.refresh()

    def refresh(self):
        """Recompute every particle's source energy and hop bound."""
        n = len(self.state)
        self._source = np.array(
            [relative_energy(self.state.point(i), self.state, self.potential, exclude=i) for i in range(n)]
        ).reshape(n)
        self._bound = np.array(
            [hop_bound(self.spec, e, self.potential, self.box.dim) for e in self._source]
        ).reshape(n)
        self._events_since_refresh = 0

    def _update(self, index: int):
        e = relative_energy(self.state.point(index), self.state, self.potential, exclude=index)
        self._source[index] = e
        self._bound[index] = hop_bound(self.spec, e, self.potential, self.box.dim)

    def majorant(self, index: int) -> HopMajorant:
        return HopMajorant(float(self._bound[index]), float(self._source[index]),
                           self.spec.activity, self._l1)

    def _total_rate(self) -> float:
        return float(np.sum(self._bound)) if len(self._bound) else 0.0

    def _choose(self) -> int:
        cumulative = np.cumsum(self._bound)
        i = int(np.searchsorted(cumulative, self.rng.random() * cumulative[-1], side="right"))
        return min(i, len(cumulative) - 1)

    def _fire(self, time: float) -> Event:
        box = self.box
        i = self._choose()
        x = self.state.point(i)
        h = self.spec.kernel.sample(self.rng, box.dim)
        y = box.wrap(x + h)
        energies = HopEnergies(
            source=float(self._source[i]),
            target=relative_energy(y, self.state, self.potential, exclude=i),
            pair=self.potential.phi(float(np.sqrt(h @ h))),
        )
        c_tilde = self.spec.symmetric_rate(x, y, energies, box)
        p = self.majorant(i).acceptance(float(c_tilde), self.spec.kernel.value(h))
        self._count("proposed")
        if self.rng.random() >= p:
            self._count("null")
            return Event(time, "null", i, y, x)

        if math.isinf(energies.target):
            raise InvariantViolation("accepted hop into a hard core")
        affected = self._partners(x, i)
        self.state.move(i, y)
        self.displacement[i] += h
        self._source[i] = energies.target
        self._bound[i] = hop_bound(self.spec, energies.target, self.potential, box.dim)
        affected.update(self._partners(y, i))
        for j in affected:
            self._update(j)
        self._count("hop")
        if len(self.state) != self.n0:
            raise InvariantViolation(f"particle number changed from {self.n0} to {len(self.state)}")
        self._events_since_refresh += 1
        if self._events_since_refresh >= self.refresh_interval:
            logger.debug("full refresh of %d hop bounds at t=%g", len(self.state), time)
            self.refresh()
        return Event(time, "hop", i, y, x)

    def _partners(self, location, index: int) -> set:
        if self.potential.is_null:
            return set()
        found = self.state.cells.neighbors(location, self.potential.range, self.state)
        return {j for j, _, _ in found if j != index}


def swap_acceptance(config: Configuration, index: int, y, pot: PairPotential) -> float:
    """min(1, exp[-(E(y, gamma minus x) - E(x, gamma minus x))]); zero into a hard core."""
    target = relative_energy(y, config, pot, exclude=index)
    if math.isinf(target):
        return 0.0
    source = relative_energy(config.point(index), config, pot, exclude=index)
    return math.exp(min(0.0, source - target))


def metropolis_swap_step(config: Configuration, spec: RateSpec, pot: PairPotential,
                         rng: np.random.Generator) -> bool:
    """Move a uniformly chosen particle by a kernel draw with Metropolis acceptance.

    Returns:
        True if the move was accepted
    """
    n = len(config)
    if n == 0:
        raise ValueError("swap chain needs at least one particle")
    i = int(rng.integers(n))
    y = config.box.wrap(config.point(i) + spec.kernel.sample(rng, config.box.dim))
    if rng.random() < swap_acceptance(config, i, y, pot):
        config.move(i, y)
        return True
    return False


def run_swap_chain(config: Configuration, spec: RateSpec, pot: PairPotential,
                   rng: np.random.Generator, steps: int) -> List[bool]:
    return [metropolis_swap_step(config, spec, pot, rng) for _ in range(steps)]
