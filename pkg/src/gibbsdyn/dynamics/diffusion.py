"""Euler-Maruyama integration of the interacting diffusion limit.

dx_i = -2(1 - s) c M_i grad_i U dt + sqrt(2 c M_i) dW_i with mobility
M_i = exp[(2s - 1) E(x_i, gamma minus x_i)] frozen at the start of each step.
At s = 1/2 this is the gradient dynamics dx = -c grad U dt + sqrt(2c) dW.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from numpy.polynomial.hermite_e import hermegauss

from ..errors import BlowUp, NotSmooth
from ..functionals import CylinderFunctional
from ..geometry import Configuration
from ..observables import Observable
from ..potentials import PairPotential, all_energy_gradients, all_relative_energies
from .base import Engine, sample_times

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DiffusionParams:
    s: float = 0.5
    mobility: float = 1.0
    dt: float = 1e-3
    guard: float = 5.0

    def __post_init__(self):
        if not 0 <= self.s <= 1:
            raise ValueError("s must lie in [0, 1]")
        if not (self.mobility > 0 and self.dt > 0 and self.guard > 0):
            raise ValueError("mobility, dt and guard must be positive")

    @property
    def coefficients(self) -> Tuple[float, float]:
        return diffusion_coefficients(self.s)


def diffusion_coefficients(s: float) -> Tuple[float, float]:
    """(mobility exponent 2s - 1, drift factor 2(1 - s))."""
    return 2.0 * s - 1.0, 2.0 * (1.0 - s)


def require_smooth(pot: PairPotential):
    if not pot.smooth or pot.hard_core > 0:
        raise NotSmooth(f"diffusion needs a C2 potential without hard core, got {pot.shape}")


def em_coefficients(config: Configuration, params: DiffusionParams, pot: PairPotential,
                    energies: Optional[np.ndarray] = None):
    """Per-particle drift vectors and noise scales at the current state.

    Returns:
        (drift, sigma, energies): drift of shape (N, dim) per unit time,
        sigma of shape (N,) so that the increment is drift dt + sigma sqrt(dt) xi
    """
    exponent, factor = params.coefficients
    if energies is None:
        energies = all_relative_energies(config, pot)
    grads = all_energy_gradients(config, pot)
    mob = np.exp(exponent * energies)
    drift = -factor * params.mobility * mob[:, None] * grads
    sigma = np.sqrt(2.0 * params.mobility * mob)
    return drift, sigma, energies


def em_step(config: Configuration, params: DiffusionParams, pot: PairPotential,
            rng: np.random.Generator, energies: Optional[np.ndarray] = None) -> np.ndarray:
    """Advance every particle by one step in place.

    Returns:
        the unwrapped increments, shape (N, dim)

    Raises:
        BlowUp: some particle energy changed by more than params.guard
    """
    require_smooth(pot)
    n = len(config)
    if n == 0:
        return np.zeros((0, config.box.dim))
    drift, sigma, before = em_coefficients(config, params, pot, energies)
    noise = rng.standard_normal((n, config.box.dim))
    increments = drift * params.dt + sigma[:, None] * math.sqrt(params.dt) * noise
    config.set_points(config.points + increments)
    if not pot.is_null:
        after = all_relative_energies(config, pot)
        jump = np.max(np.abs(after - before))
        if jump > params.guard:
            raise BlowUp(f"energy changed by {jump:g} > guard {params.guard:g}; reduce dt")
    return increments


def one_step_expectation(functional: CylinderFunctional, config: Configuration,
                         params: DiffusionParams, pot: PairPotential, order: int = 20) -> float:
    """E[F(gamma after one step)] by tensor Gauss-Hermite quadrature.

    Only tiny configurations (N * dim <= 4) are supported.
    """
    require_smooth(pot)
    n, dim = len(config), config.box.dim
    m = n * dim
    if m == 0:
        return functional.evaluate(config)
    if m > 4:
        raise ValueError(f"Gauss-Hermite expectation supports N*dim <= 4, got {m}")
    drift, sigma, _ = em_coefficients(config, params, pot)
    nodes, weights = hermegauss(order)
    weights = weights / math.sqrt(2.0 * math.pi)
    xi = np.array(list(itertools.product(nodes, repeat=m)))
    w = np.prod(np.array(list(itertools.product(weights, repeat=m))), axis=1)
    base = config.points + drift * params.dt
    scale = np.repeat(sigma, dim) * math.sqrt(params.dt)
    positions = base.reshape(1, m) + xi * scale
    values = functional.evaluate_batch(config.box.wrap(positions.reshape(-1, n, dim)), config.box)
    return float(np.sum(w * values))


class DiffusionEngine(Engine):
    kind = "diffusion"

    def __init__(self, params: DiffusionParams, potential: PairPotential, config: Configuration,
                 rng: Optional[np.random.Generator] = None, seed: int = 0):
        require_smooth(potential)
        super().__init__(potential, config, rng, seed)
        self.params = params
        self.displacement = np.zeros((len(self.state), self.box.dim))
        self._energies = all_relative_energies(self.state, potential)
        self._steps = 0

    def step(self):
        self.displacement += em_step(self.state, self.params, self.potential, self.rng, self._energies)
        self._energies = all_relative_energies(self.state, self.potential)
        self._steps += 1
        self.clock = self._steps * self.params.dt
        self._count("step")

    def run(self, horizon: float, observables: Sequence[Observable],
            sample_interval: Optional[float] = None, event_sink=None) -> pd.DataFrame:
        grid = sample_times(self.clock, horizon, sample_interval)
        tolerance = 1e-9 * self.params.dt
        rows = []
        for t in grid:
            while self.clock < t - tolerance:
                self.step()
            rows.append([t] + self.observe(observables))
        self._log_summary()
        return pd.DataFrame(rows, columns=["t"] + [obs.name for obs in observables])
