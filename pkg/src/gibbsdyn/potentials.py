"""Pair potentials, relative energies and the stability/integrability constants."""
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate

from .errors import NotSmooth, QuadratureFailure
from .geometry import Configuration, ball_volume, sphere_area

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PairPotential:
    """Radial pair potential phi(r): +inf below hard_core, 0 from range on.

    Subclasses provide the profile on [hard_core, range) and, when smooth,
    its first two derivatives.
    """
    hard_core: float = 0.0
    range: float = 1.0
    neighbor_cap: Optional[int] = None

    smooth = False
    shape = "generic"

    def __post_init__(self):
        if self.hard_core < 0:
            raise ValueError("hard_core must be nonnegative")
        if not self.range > 0:
            raise ValueError("range must be positive")
        if self.hard_core > self.range:
            raise ValueError("hard_core must not exceed range")
        if self.neighbor_cap is not None and self.neighbor_cap < 1:
            raise ValueError("neighbor_cap must be at least 1")

    @property
    def phi_min(self) -> float:
        return 0.0

    @property
    def is_null(self) -> bool:
        """True when phi vanishes identically."""
        return False

    def _profile(self, r: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _dprofile_over_r(self, r: np.ndarray) -> np.ndarray:
        raise NotSmooth(f"{self.shape} potential has no gradient")

    def _d2profile(self, r: np.ndarray) -> np.ndarray:
        raise NotSmooth(f"{self.shape} potential has no second derivative")

    def phi(self, r):
        """phi at distance(s) r; scalar in, float out."""
        r_arr = np.asarray(r, dtype=float)
        flat = np.atleast_1d(r_arr)
        out = np.zeros_like(flat)
        inside = flat < self.range
        if np.any(inside):
            out[inside] = self._profile(flat[inside])
        out[flat < self.hard_core] = np.inf
        if r_arr.ndim == 0:
            return float(out[0])
        return out.reshape(r_arr.shape)

    def dphi(self, r):
        """phi'(r)."""
        r_arr = np.asarray(r, dtype=float)
        self._require_smooth()
        out = self._dprofile_over_r(r_arr) * r_arr * (r_arr < self.range)
        return float(out) if out.ndim == 0 else out

    def d2phi(self, r):
        """phi''(r)."""
        r_arr = np.asarray(r, dtype=float)
        self._require_smooth()
        out = self._d2profile(r_arr) * (r_arr < self.range)
        return float(out) if out.ndim == 0 else out

    def gradient(self, delta) -> np.ndarray:
        """Gradient of x -> phi(|x - u|) at displacement delta = x - u.

        Accepts shape (dim,) or (M, dim).
        """
        self._require_smooth()
        delta = np.asarray(delta, dtype=float)
        r = np.sqrt(np.sum(delta * delta, axis=-1))
        scale = self._dprofile_over_r(r) * (r < self.range)
        return delta * np.expand_dims(scale, -1)

    def _require_smooth(self):
        if not self.smooth or self.hard_core > 0:
            raise NotSmooth(f"{self.shape} potential with hard core {self.hard_core} is not C2")

    def neighbor_bound(self, dim: int) -> Optional[float]:
        """Upper bound on the number of points within `range` of any location.

        Packing bound (1 + 2R/r_hc)^d for a hard core, tightened by a
        user-supplied neighbor_cap; None when neither exists.
        """
        bounds = []
        if self.hard_core > 0:
            bounds.append(math.floor((1.0 + 2.0 * self.range / self.hard_core) ** dim))
        if self.neighbor_cap is not None:
            bounds.append(self.neighbor_cap)
        if not bounds:
            return None
        return float(min(bounds))

    def negative_energy_bound(self, dim: int) -> float:
        """Bound on -E(x, gamma): |phi_min| * n_cap."""
        if self.phi_min >= 0:
            return 0.0
        cap = self.neighbor_bound(dim)
        if cap is None:
            raise ValueError(
                f"{self.shape} potential with phi_min < 0 needs a hard core or a neighbor_cap"
            )
        return abs(self.phi_min) * cap


@dataclass(frozen=True)
class Ideal(PairPotential):
    """phi identically zero (Poisson reference)."""
    smooth = True
    shape = "ideal"

    @property
    def is_null(self) -> bool:
        return True

    def _profile(self, r):
        return np.zeros_like(r)

    def _dprofile_over_r(self, r):
        return np.zeros_like(np.asarray(r, dtype=float))

    def _d2profile(self, r):
        return np.zeros_like(np.asarray(r, dtype=float))


@dataclass(frozen=True)
class SquareWell(PairPotential):
    """+inf below hard_core, -depth on [hard_core, range), 0 beyond."""
    depth: float = 0.0
    shape = "square_well"

    def __post_init__(self):
        super().__post_init__()
        if not self.hard_core > 0:
            raise ValueError("square_well requires a positive hard_core")

    @property
    def phi_min(self) -> float:
        return min(0.0, -self.depth)

    def _profile(self, r):
        return np.full_like(r, -self.depth)


@dataclass(frozen=True)
class SmoothBump(PairPotential):
    """phi(r) = -A (1 - ((r - center)/width)^2)^3 on |r - center| < width.

    center must be 0 or at least width so that phi is C2 at the origin.
    The range is center + width and is derived, not free.
    """
    amplitude: float = 0.0
    center: float = 0.0
    width: float = 1.0
    smooth = True
    shape = "smooth_bump"

    def __post_init__(self):
        if not self.width > 0:
            raise ValueError("width must be positive")
        if not (self.center == 0 or self.center >= self.width):
            raise ValueError("center must be 0 or >= width")
        object.__setattr__(self, "range", self.center + self.width)
        super().__post_init__()

    @property
    def phi_min(self) -> float:
        return min(0.0, -self.amplitude)

    def _t(self, r):
        return (np.asarray(r, dtype=float) - self.center) / self.width

    def _profile(self, r):
        t = self._t(r)
        return np.where(np.abs(t) < 1, -self.amplitude * (1 - t * t) ** 3, 0.0)

    def _dprofile_over_r(self, r):
        r = np.asarray(r, dtype=float)
        t = self._t(r)
        base = np.where(np.abs(t) < 1, (1 - t * t) ** 2, 0.0)
        if self.center == 0:
            return 6.0 * self.amplitude * base / self.width ** 2
        safe_r = np.where(r > 0, r, 1.0)
        return np.where(r > 0, 6.0 * self.amplitude * t * base / (self.width * safe_r), 0.0)

    def _d2profile(self, r):
        t = self._t(r)
        return np.where(
            np.abs(t) < 1,
            6.0 * self.amplitude / self.width ** 2 * (1 - t * t) * (1 - 5 * t * t),
            0.0,
        )


@dataclass(frozen=True)
class SoftRepulsive(PairPotential):
    """phi(r) = A (1 - (r/R)^2)^3, A >= 0."""
    amplitude: float = 0.0
    smooth = True
    shape = "soft_repulsive"

    def __post_init__(self):
        super().__post_init__()
        if self.amplitude < 0:
            raise ValueError("soft_repulsive amplitude must be nonnegative")

    def _u(self, r):
        return (np.asarray(r, dtype=float) / self.range) ** 2

    def _profile(self, r):
        return self.amplitude * (1 - self._u(r)) ** 3

    def _dprofile_over_r(self, r):
        u = self._u(r)
        return np.where(u < 1, -6.0 * self.amplitude * (1 - u) ** 2 / self.range ** 2, 0.0)

    def _d2profile(self, r):
        u = self._u(r)
        return np.where(u < 1, -6.0 * self.amplitude / self.range ** 2 * (1 - u) * (1 - 5 * u), 0.0)


# -- relative energies -------------------------------------------------------

def _partner_distances(x, config: Configuration, pot: PairPotential,
                       exclude: Optional[int] = None) -> np.ndarray:
    """Distances from x to interaction partners within range, self excluded."""
    if len(config) == 0:
        return np.zeros(0)
    cells = config.cells
    if cells is not None and cells.cutoff >= pot.range and cells.generation == config.generation:
        idx = np.array(cells.candidates(x), dtype=int)
    else:
        idx = np.arange(len(config))
    if exclude is not None:
        idx = idx[idx != exclude]
    if len(idx) == 0:
        return np.zeros(0)
    d = np.atleast_1d(config.box.dist(x, config.points[idx]))
    # points at the location of x are x itself
    return d[(d > 0) & (d < pot.range)]


def relative_energy(x, config: Configuration, pot: PairPotential,
                    exclude: Optional[int] = None) -> float:
    """E(x, gamma) = sum of phi(|x - u|) over u in gamma, u != x.

    Args:
        x: location
        config: configuration gamma
        pot: pair potential
        exclude: index of a point of gamma to leave out (gamma minus x)

    Returns:
        The energy, +inf if some partner sits inside the hard core
    """
    if pot.is_null:
        return 0.0
    d = _partner_distances(x, config, pot, exclude)
    if len(d) == 0:
        return 0.0
    if pot.hard_core > 0 and np.any(d < pot.hard_core):
        return math.inf
    return float(np.sum(pot.phi(d)))


def relative_energy_many(ys, config: Configuration, pot: PairPotential,
                         exclude: Optional[int] = None) -> np.ndarray:
    """Vectorized E(y, gamma) over an (M, dim) array of locations."""
    ys = np.asarray(ys, dtype=float).reshape(-1, config.box.dim)
    if pot.is_null or len(config) == 0:
        return np.zeros(len(ys))
    pts = config.points
    if exclude is not None:
        pts = np.delete(pts, exclude, axis=0)
        if len(pts) == 0:
            return np.zeros(len(ys))
    d = config.box.dist(ys[:, None, :], pts[None, :, :])
    d = np.asarray(d).reshape(len(ys), len(pts))
    phi = pot.phi(np.where(d > 0, d, np.inf))
    return np.sum(phi, axis=1)


def energy_delta_swap(config: Configuration, index: int, y, pot: PairPotential) -> float:
    """E(y, gamma minus x) - E(x, gamma minus x) for x = config.point(index)."""
    target = relative_energy(y, config, pot, exclude=index)
    if math.isinf(target):
        return math.inf
    return target - relative_energy(config.point(index), config, pot, exclude=index)


def total_energy(config: Configuration, pot: PairPotential) -> float:
    """U(gamma) as a direct sum over pairs; O(N^2) reference."""
    pts = config.points
    n = len(pts)
    if n < 2 or pot.is_null:
        return 0.0
    i, j = np.triu_indices(n, k=1)
    d = np.atleast_1d(config.box.dist(pts[i], pts[j]))
    return float(np.sum(pot.phi(d)))


def energy_gradient(x, config: Configuration, pot: PairPotential,
                    exclude: Optional[int] = None) -> np.ndarray:
    """Sum over partners u of grad phi(x - u)."""
    pot._require_smooth()
    dim = config.box.dim
    if pot.is_null or len(config) == 0:
        return np.zeros(dim)
    pts = config.points
    idx = np.arange(len(pts))
    if exclude is not None:
        idx = idx[idx != exclude]
    if len(idx) == 0:
        return np.zeros(dim)
    delta = config.box.displacement(x, pts[idx])
    return np.sum(pot.gradient(delta), axis=0)


# -- constants ---------------------------------------------------------------

@dataclass(frozen=True)
class PotentialConstants:
    stability: float
    integrability: float
    z_threshold_1: float
    z_threshold_2: float
    nonnegative: bool

    @property
    def B(self) -> float:
        return self.stability

    @property
    def C(self) -> float:
        return self.integrability


def radial_integral(f: Callable[[float], float], dim: int, lower: float, upper: float,
                    limit: int = 200) -> float:
    """Integral of a radial function over the shell lower <= |x| < upper."""
    if upper <= lower:
        return 0.0
    area = sphere_area(dim)
    value, abserr = integrate.quad(lambda r: f(r) * area * r ** (dim - 1), lower, upper, limit=limit)
    if not math.isfinite(value) or abserr > 1e-8 * max(1.0, abs(value)):
        raise QuadratureFailure(f"radial quadrature did not converge: value={value}, error={abserr}")
    return value


def integrability_constant(pot: PairPotential, dim: int, exponent: float = -1.0,
                           limit: int = 200) -> float:
    """Integral over R^d of |exp(exponent * phi) - 1|.

    exponent = -1 gives the constant C; exponent = 2s - 1 gives the L2
    conditions for the rate families. The hard core contributes its ball
    volume analytically (infinite when exponent > 0).
    """
    if exponent == 0 or pot.is_null:
        return 0.0
    core = 0.0
    if pot.hard_core > 0:
        if exponent > 0:
            return math.inf
        core = ball_volume(dim, pot.hard_core)
    if isinstance(pot, SquareWell):
        shell = ball_volume(dim, pot.range) - ball_volume(dim, pot.hard_core)
        return core + abs(math.exp(-exponent * pot.depth) - 1.0) * shell
    return core + radial_integral(
        lambda r: abs(math.exp(exponent * pot.phi(r)) - 1.0), dim, pot.hard_core, pot.range, limit
    )


def compute_constants(pot: PairPotential, dim: int, limit: int = 200) -> PotentialConstants:
    """Stability constant B, integrability constant C and both activity thresholds."""
    c = integrability_constant(pot, dim, -1.0, limit)
    if pot.phi_min >= 0:
        b = 0.0
    else:
        cap = pot.neighbor_bound(dim)
        if cap is None:
            raise ValueError("stability bound needs a hard core or a neighbor_cap")
        b = abs(pot.phi_min) / 2.0 * cap
    if c > 0:
        scale = math.exp(2.0 * b) * c
        z1 = 1.0 / (2.0 * math.e) / scale
        z2 = 1.0 / math.e / scale
    else:
        z1 = z2 = math.inf
    logger.debug("constants for %s in d=%d: B=%g C=%g", pot.shape, dim, b, c)
    return PotentialConstants(b, c, z1, z2, pot.phi_min >= 0)


def activity_threshold(stability: float, integrability: float, factor: float = 0.5) -> float:
    """factor/e * (e^{2B} C)^{-1}; factor 1/2 and 1 give the two thresholds."""
    return factor / math.e / (math.exp(2.0 * stability) * integrability)


def pair_matrix(config: Configuration):
    """Minimum-image displacements x_i - x_j and distances, diagonal masked with inf."""
    pts = config.points
    delta = config.box.minimum_image(pts[:, None, :] - pts[None, :, :])
    dist = np.sqrt(np.sum(delta * delta, axis=-1))
    np.fill_diagonal(dist, np.inf)
    return delta, dist


def all_relative_energies(config: Configuration, pot: PairPotential) -> np.ndarray:
    """E(x_i, gamma minus x_i) for every point at once."""
    n = len(config)
    if n < 2 or pot.is_null:
        return np.zeros(n)
    _, dist = pair_matrix(config)
    return np.sum(pot.phi(dist), axis=1)


def all_energy_gradients(config: Configuration, pot: PairPotential) -> np.ndarray:
    """grad_i U = sum over j != i of grad phi(x_i - x_j), shape (N, dim)."""
    pot._require_smooth()
    n = len(config)
    if n < 2 or pot.is_null:
        return np.zeros((n, config.box.dim))
    delta, _ = pair_matrix(config)
    return np.sum(pot.gradient(delta), axis=1)
