"""Pointwise evaluation of the Kawasaki, Glauber and diffusion generators.

Sign convention: the functions return the nonnegative operator H, so the
Markov generator of each dynamics is -H.
"""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .dynamics.diffusion import DiffusionParams, require_smooth
from .errors import InsufficientSamples, QuadratureFailure
from .functionals import CylinderFunctional
from .geometry import Configuration, TorusBox
from .models import Snapshot
from .potentials import PairPotential, energy_gradient, relative_energy, relative_energy_many
from .rates import GlauberSpec, HopEnergies, RateSpec
from .stats import EstimateWithError, batch_means

logger = logging.getLogger(__name__)

MAX_BOX_POINTS = {1: 4096, 2: 256, 3: 48}


@dataclass(frozen=True)
class QuadGrid:
    """Midpoint tensor grids: kernel_points per axis over the hop support box,
    box_points per axis over the simulation box (None picks ~32 per unit length)."""
    kernel_points: int = 64
    box_points: Optional[int] = None

    def box_resolution(self, box: TorusBox) -> int:
        if self.box_points is not None:
            return self.box_points
        return min(max(64, int(math.ceil(32 * box.side))), MAX_BOX_POINTS[box.dim])

    def halved(self) -> "QuadGrid":
        return QuadGrid(max(2, self.kernel_points // 2),
                        None if self.box_points is None else max(2, self.box_points // 2))


@dataclass
class GeneratorEvaluation:
    value: float
    error: float
    resolution: int
    n_particles: int


def midpoint_grid(lower: np.ndarray, upper: np.ndarray, n: int):
    """Cell midpoints of an n^d tensor grid on [lower, upper] and the cell volume."""
    dim = len(lower)
    axes = [lower[k] + (np.arange(n) + 0.5) * (upper[k] - lower[k]) / n for k in range(dim)]
    mesh = np.meshgrid(*axes, indexing="ij")
    points = np.stack([m.ravel() for m in mesh], axis=-1)
    volume = float(np.prod((np.asarray(upper) - np.asarray(lower)) / n))
    return points, volume


def _check_finite(value: float, what: str) -> float:
    if not math.isfinite(value):
        raise QuadratureFailure(f"non-finite {what} integrand sum: {value}")
    return value


def _kawasaki_sum(functional: CylinderFunctional, config: Configuration, spec: RateSpec,
                  pot: PairPotential, n: int, symmetric: bool) -> float:
    box = config.box
    dim = box.dim
    rho = spec.kernel.support_radius
    offsets, cell = midpoint_grid(np.full(dim, -rho), np.full(dim, rho), n)
    a = np.asarray(spec.kernel.value(offsets))
    keep = a > 0
    offsets = offsets[keep]
    pair = np.asarray(pot.phi(np.sqrt(np.sum(offsets * offsets, axis=1))))
    rate = spec.symmetric_rate if symmetric else spec.rate
    total = 0.0
    for i in range(len(config)):
        x = config.point(i)
        ys = box.wrap(x + offsets)
        source = relative_energy(x, config, pot, exclude=i)
        energies = HopEnergies(source, relative_energy_many(ys, config, pot, exclude=i), pair)
        c = np.asarray(rate(x, ys, energies, box), dtype=float)
        total += float(np.sum(c * functional.d_minus_plus_many(config, i, ys)))
    return -2.0 * spec.activity * cell * _check_finite(total, "Kawasaki")


def apply_kawasaki(functional: CylinderFunctional, config: Configuration, spec: RateSpec,
                   pot: PairPotential, grid: QuadGrid = QuadGrid(),
                   symmetric: bool = True) -> GeneratorEvaluation:
    """(HF)(gamma) = -2 z sum_x int c~(x, y, gamma) D-+_{xy}F dy.

    With symmetric=False the raw rate c replaces c~ (used as a negative control).
    The error estimate is the change against half the resolution.
    """
    n = grid.kernel_points
    fine = _kawasaki_sum(functional, config, spec, pot, n, symmetric)
    coarse = _kawasaki_sum(functional, config, spec, pot, max(2, n // 2), symmetric)
    return GeneratorEvaluation(fine, abs(fine - coarse), n, len(config))


def _glauber_birth(functional: CylinderFunctional, config: Configuration, spec: GlauberSpec,
                   pot: PairPotential, n: int) -> float:
    box = config.box
    xs, cell = midpoint_grid(np.zeros(box.dim), np.full(box.dim, box.side), n)
    b = np.asarray(spec.birth_rate(relative_energy_many(xs, config, pot)), dtype=float)
    total = float(np.sum(b * functional.d_plus_many(config, xs)))
    return spec.activity * cell * _check_finite(total, "Glauber birth")


def _glauber_death(functional: CylinderFunctional, config: Configuration, spec: GlauberSpec,
                   pot: PairPotential) -> float:
    total = 0.0
    for i in range(len(config)):
        e = relative_energy(config.point(i), config, pot, exclude=i)
        total += spec.death_rate(e) * functional.d_minus(config, i)
    return total


def apply_glauber(functional: CylinderFunctional, config: Configuration, spec: GlauberSpec,
                  pot: PairPotential, grid: QuadGrid = QuadGrid()) -> GeneratorEvaluation:
    """(H_G F)(gamma) = -z int b(x, gamma) D+_x F dx - sum_x d(x, gamma) D-_x F."""
    n = grid.box_resolution(config.box)
    death = _glauber_death(functional, config, spec, pot)
    fine = _glauber_birth(functional, config, spec, pot, n)
    coarse = _glauber_birth(functional, config, spec, pot, max(2, n // 2))
    return GeneratorEvaluation(-fine - death, abs(fine - coarse), n, len(config))


def apply_diffusion(functional: CylinderFunctional, config: Configuration,
                    params: DiffusionParams, pot: PairPotential) -> float:
    """c sum_x exp[(2s - 1) E(x)] (-Lap_x F + 2(1 - s) <grad_x F, grad_x E>)."""
    require_smooth(pot)
    exponent, factor = params.coefficients
    total = 0.0
    for i in range(len(config)):
        x = config.point(i)
        energy = relative_energy(x, config, pot, exclude=i)
        grad_e = energy_gradient(x, config, pot, exclude=i)
        term = -functional.point_laplacian(config, i)
        if factor != 0:
            term += factor * float(functional.point_gradient(config, i) @ grad_e)
        total += math.exp(exponent * energy) * term
    return params.mobility * total


def self_adjointness_residual(apply_op: Callable[[CylinderFunctional, Configuration], float],
                              first: CylinderFunctional, second: CylinderFunctional,
                              snapshots: Sequence[Snapshot], box: TorusBox,
                              min_samples: int = 100) -> EstimateWithError:
    """Monte Carlo estimate of <HF, G> - <F, HG> over equilibrium snapshots.

    Uses the paired per-snapshot difference (HF)G - F(HG).

    Raises:
        InsufficientSamples: fewer than min_samples snapshots
    """
    if len(snapshots) < min_samples:
        raise InsufficientSamples(f"{len(snapshots)} snapshots, need at least {min_samples}")
    diffs = []
    for snap in snapshots:
        config = snap.to_configuration(box)
        f, g = first.evaluate(config), second.evaluate(config)
        diffs.append(apply_op(first, config) * g - f * apply_op(second, config))
    return batch_means(diffs)
