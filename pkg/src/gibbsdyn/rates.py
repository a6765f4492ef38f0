"""Hop kernels, Kawasaki and Glauber rate families, symmetrization and thinning bounds.

All Kawasaki rates are functions of the three energies of a hop x -> y:
source E(x, gamma minus x), target E(y, gamma minus x) and the pair term
phi(|x - y|), so that E(y, gamma) = target + pair and
E(x, gamma minus x plus y) = source + pair.
"""
import logging
import math
from dataclasses import dataclass, replace
from typing import Any, Callable, Dict, NamedTuple, Optional, Union

import numpy as np

from .errors import MajorantViolation
from .geometry import Configuration, TorusBox, ball_volume, sphere_area, uniform_in_ball
from .potentials import PairPotential, compute_constants, integrability_constant, relative_energy

logger = logging.getLogger(__name__)

ACCEPTANCE_TOLERANCE = 1e-12

Energy = Union[float, np.ndarray]


def boltzmann(*terms) -> Energy:
    """exp(sum of coef * energy) with the zero-rate convention.

    A term whose coefficient is zero drops out; an infinite energy with a
    nonzero coefficient makes the whole factor zero.
    """
    total = 0.0
    blocked = False
    for coef, energy in terms:
        if coef == 0:
            continue
        energy = np.asarray(energy, dtype=float)
        finite = np.isfinite(energy)
        blocked = blocked | ~finite
        total = total + coef * np.where(finite, energy, 0.0)
    out = np.where(blocked, 0.0, np.exp(total))
    if np.ndim(out) == 0:
        return float(out)
    return out


def _unblocked(value: Energy, target: Energy) -> Energy:
    """Zero the rate wherever the target sits inside a hard core."""
    out = np.where(np.isfinite(target), value, 0.0)
    if np.ndim(out) == 0:
        return float(out)
    return out


class HopEnergies(NamedTuple):
    source: Energy
    target: Energy
    pair: Energy

    def reversed(self) -> "HopEnergies":
        """Energies of the reverse hop y -> x from gamma minus x plus y."""
        return HopEnergies(self.target, self.source, self.pair)


@dataclass(frozen=True)
class HopKernel:
    """Radial hop kernel a~ with delta scaling a~_delta(h) = delta^d a~(delta h).

    shape "ball": amplitude on |h| < radius; shape "triangle":
    amplitude * (1 - |h|/radius) on |h| < radius.
    """
    shape: str = "ball"
    radius: float = 1.0
    amplitude: float = 1.0
    delta: float = 1.0

    def __post_init__(self):
        if self.shape not in ("ball", "triangle"):
            raise ValueError(f"unknown kernel shape {self.shape!r}")
        if not (self.radius > 0 and self.amplitude > 0 and self.delta > 0):
            raise ValueError("kernel radius, amplitude and delta must be positive")

    def scaled(self, delta: float) -> "HopKernel":
        return replace(self, delta=delta)

    @property
    def support_radius(self) -> float:
        return self.radius / self.delta

    def value(self, h) -> Energy:
        """a~_delta at displacement(s) h, shape (dim,) or (M, dim)."""
        h = np.asarray(h, dtype=float)
        dim = h.shape[-1]
        r = np.sqrt(np.sum(h * h, axis=-1)) * self.delta
        profile = np.where(r < self.radius, self.amplitude, 0.0)
        if self.shape == "triangle":
            profile = profile * np.clip(1.0 - r / self.radius, 0.0, None)
        out = self.delta ** dim * profile
        if np.ndim(out) == 0:
            return float(out)
        return out

    def l1_norm(self, dim: int) -> float:
        """Integral of a~_delta; independent of delta."""
        if self.shape == "ball":
            return self.amplitude * ball_volume(dim, self.radius)
        return self.amplitude * sphere_area(dim) * self.radius ** dim / (dim * (dim + 1))

    def second_moment(self, dim: int) -> float:
        """Integral of a~(h) (h^1)^2 for the unscaled kernel."""
        base = self.amplitude * sphere_area(dim) * self.radius ** (dim + 2) / (dim * (dim + 2))
        if self.shape == "ball":
            return base
        return base / (dim + 3)

    def scaled_second_moment(self, dim: int) -> float:
        return self.second_moment(dim) / self.delta ** 2

    def sample(self, rng: np.random.Generator, dim: int) -> np.ndarray:
        """Displacement drawn from a~_delta / ||a~_delta||_1."""
        rho = self.support_radius
        while True:
            h = uniform_in_ball(rng, dim, rho)
            if self.shape == "ball" or rng.random() < 1.0 - np.sqrt(h @ h) / rho:
                return h


# -- Kawasaki rate families --------------------------------------------------

class RateLaw:
    """kappa factor of a rate c(x, y, gamma) = a(x - y) kappa(energies)."""

    name = "rate"

    def kappa(self, energies: HopEnergies) -> Energy:
        raise NotImplementedError

    def rate(self, x, y, energies: HopEnergies, kernel: HopKernel, box: TorusBox) -> Energy:
        a = kernel.value(box.displacement(y, x))
        return a * self.kappa(energies)

    def envelope(self, source: float, negative_bound: float) -> float:
        """Upper bound of the symmetrized kappa over all targets y."""
        raise NotImplementedError(f"{self.name} has no thinning bound")

    def integrability_exponent(self) -> Optional[float]:
        return None


@dataclass(frozen=True)
class KawasakiS(RateLaw):
    """c_s = a exp[s E(x, gamma minus x) - (1 - s) E(y, gamma minus x)]."""
    s: float = 0.5
    name = "kawasaki_s"

    def __post_init__(self):
        if not 0 <= self.s <= 1:
            raise ValueError("s must lie in [0, 1]")

    def kappa(self, energies: HopEnergies) -> Energy:
        value = boltzmann((self.s, energies.source), (-(1.0 - self.s), energies.target))
        return _unblocked(value, energies.target)

    def envelope(self, source: float, negative_bound: float) -> float:
        return math.exp(self.s * source + (1.0 - self.s) * negative_bound)

    def integrability_exponent(self) -> float:
        return 2.0 * self.s - 1.0


@dataclass(frozen=True)
class KawasakiUV(RateLaw):
    """c_{u,v} = a exp[u E(x, gamma minus x) - (1 - v) E(y, gamma)]."""
    u: float = 0.0
    v: float = 1.0
    name = "kawasaki_uv"

    def __post_init__(self):
        if not (0 <= self.u <= 1 and 0 <= self.v <= 1):
            raise ValueError("u and v must lie in [0, 1]")

    def kappa(self, energies: HopEnergies) -> Energy:
        target_full = np.asarray(energies.target, dtype=float) + np.asarray(energies.pair, dtype=float)
        value = boltzmann((self.u, energies.source), (-(1.0 - self.v), target_full))
        return _unblocked(value, energies.target)

    def envelope(self, source: float, negative_bound: float) -> float:
        # forward term plus the energy-reweighted reverse term, each bounded
        # with E(y, .) >= -negative_bound and phi >= -negative_bound
        forward = math.exp(self.u * source + (1.0 - self.v) * negative_bound)
        backward = math.exp(self.v * source + (1.0 - self.u) * negative_bound
                            + (1.0 - self.v) * negative_bound)
        return 0.5 * (forward + backward)

    def integrability_exponent(self) -> float:
        return 2.0 * max(self.u, self.v) - 1.0


class CustomRate(RateLaw):
    """Rate given by a user callable fn(x, y, energies) -> c(x, y, gamma).

    `bound(source, negative_bound)` must dominate the symmetrized rate divided
    by a(x - y) for the engines to use it.
    """
    name = "custom"

    def __init__(self, fn: Callable, bound: Optional[Callable[[float, float], float]] = None):
        self.fn = fn
        self.bound = bound

    def rate(self, x, y, energies: HopEnergies, kernel: HopKernel, box: TorusBox) -> Energy:
        return self.fn(x, y, energies)

    def envelope(self, source: float, negative_bound: float) -> float:
        if self.bound is None:
            raise NotImplementedError("custom rates need an explicit bound for simulation")
        return self.bound(source, negative_bound)


def symmetrize(rate: Callable, x, y, energies: HopEnergies) -> Energy:
    """c~(x, y, gamma) = (c(x, y, gamma) + c(y, x, gamma') exp[-E(y, gamma) + E(x, gamma')]) / 2.

    gamma' is gamma minus x plus y; `rate(x, y, energies)` evaluates c. A
    target inside a hard core gets rate 0.
    """
    forward = rate(x, y, energies)
    backward = rate(y, x, energies.reversed())
    weight = boltzmann((1.0, energies.source), (-1.0, energies.target))
    value = 0.5 * (np.asarray(forward, dtype=float) + np.asarray(backward, dtype=float) * weight)
    value = np.where(np.isfinite(energies.target) & np.isfinite(energies.source), value, 0.0)
    if np.ndim(value) == 0:
        return float(value)
    return value


def symmetrized(rate: Callable) -> Callable:
    """The rate evaluator x, y, energies -> c~(x, y, gamma)."""
    def evaluator(x, y, energies):
        return symmetrize(rate, x, y, energies)
    return evaluator


@dataclass(frozen=True)
class RateSpec:
    variant: RateLaw
    kernel: HopKernel
    activity: float

    def __post_init__(self):
        if not self.activity > 0:
            raise ValueError("activity must be positive")

    def evaluator(self, box: TorusBox) -> Callable:
        def rate(x, y, energies):
            return self.variant.rate(x, y, energies, self.kernel, box)
        return rate

    def rate(self, x, y, energies: HopEnergies, box: TorusBox) -> Energy:
        return self.variant.rate(x, y, energies, self.kernel, box)

    def symmetric_rate(self, x, y, energies: HopEnergies, box: TorusBox) -> Energy:
        if isinstance(self.variant, KawasakiS):
            # c_s is its own symmetrization
            return self.rate(x, y, energies, box)
        return symmetrize(self.evaluator(box), x, y, energies)


def hop_energies(config: Configuration, index: int, y, pot: PairPotential,
                 source: Optional[float] = None) -> HopEnergies:
    x = config.point(index)
    if source is None:
        source = relative_energy(x, config, pot, exclude=index)
    target = relative_energy(y, config, pot, exclude=index)
    pair = pot.phi(config.box.dist(x, y))
    return HopEnergies(source, target, pair)


def kawasaki_rate(spec: RateSpec, config: Configuration, index: int, y, pot: PairPotential) -> float:
    """c(x, y, gamma) for x = config.point(index)."""
    energies = hop_energies(config, index, y, pot)
    return float(spec.rate(config.point(index), config.box.wrap(y), energies, config.box))


@dataclass(frozen=True)
class HopMajorant:
    """Per-particle thinning bound for the hop process.

    Proposals y = x + h with h ~ a~_delta / ||a~_delta||_1 are accepted with
    z c~(x, y) / (lambda_bar a~_delta(h) / ||a~_delta||_1).
    """
    lambda_bar: float
    source: float
    activity: float
    l1_norm: float

    def acceptance(self, c_tilde: float, a_value: float) -> float:
        if a_value <= 0 or self.lambda_bar <= 0:
            return 0.0
        p = self.activity * c_tilde * self.l1_norm / (self.lambda_bar * a_value)
        if p > 1.0 + ACCEPTANCE_TOLERANCE:
            raise MajorantViolation(f"thinning acceptance {p!r} exceeds 1 (source energy {self.source})")
        return min(p, 1.0)


def hop_bound(spec: RateSpec, source: float, pot: PairPotential, dim: int) -> float:
    """lambda_bar = z ||a~||_1 envelope(E(x, gamma minus x))."""
    if math.isinf(source):
        raise MajorantViolation("particle sits inside a hard core")
    nb = pot.negative_energy_bound(dim)
    return spec.activity * spec.kernel.l1_norm(dim) * spec.variant.envelope(source, nb)


def hop_majorant(spec: RateSpec, config: Configuration, index: int, pot: PairPotential) -> HopMajorant:
    dim = config.box.dim
    source = relative_energy(config.point(index), config, pot, exclude=index)
    return HopMajorant(
        lambda_bar=hop_bound(spec, source, pot, dim),
        source=source,
        activity=spec.activity,
        l1_norm=spec.kernel.l1_norm(dim),
    )


# -- Glauber -----------------------------------------------------------------

@dataclass(frozen=True)
class GlauberSpec:
    """d_s = alpha exp[s E(x, gamma minus x)], b_s = alpha exp[(s - 1) E(x, gamma)]."""
    s: float = 0.0
    activity: float = 1.0
    alpha: float = 1.0

    def __post_init__(self):
        if not 0 <= self.s <= 1:
            raise ValueError("s must lie in [0, 1]")
        if not self.activity > 0:
            raise ValueError("activity must be positive")
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")

    def death_rate(self, energy: Energy) -> Energy:
        return self.alpha * boltzmann((self.s, energy))

    def birth_rate(self, energy: Energy) -> Energy:
        """b_s without the activity; zero inside a hard core."""
        return _unblocked(self.alpha * boltzmann((self.s - 1.0, energy)), energy)

    def birth_bound_density(self, negative_bound: float) -> float:
        """Upper bound of b_s over locations."""
        return self.alpha * math.exp((1.0 - self.s) * negative_bound)


@dataclass(frozen=True)
class GlauberRates:
    death: np.ndarray
    birth_majorant: float
    birth_density_bound: float

    def birth_acceptance(self, birth_rate: float) -> float:
        if self.birth_density_bound <= 0:
            return 0.0
        p = birth_rate / self.birth_density_bound
        if p > 1.0 + ACCEPTANCE_TOLERANCE:
            raise MajorantViolation(f"birth acceptance {p!r} exceeds 1")
        return min(p, 1.0)


def glauber_rates(spec: GlauberSpec, config: Configuration, pot: PairPotential) -> GlauberRates:
    box = config.box
    energies = np.array([relative_energy(config.point(i), config, pot, exclude=i) for i in range(len(config))])
    bound = spec.birth_bound_density(pot.negative_energy_bound(box.dim))
    return GlauberRates(
        death=np.atleast_1d(spec.death_rate(energies)) if len(config) else np.zeros(0),
        birth_majorant=spec.activity * box.volume * bound,
        birth_density_bound=bound,
    )


def glauber_birth_rate(spec: GlauberSpec, x, config: Configuration, pot: PairPotential) -> float:
    return spec.birth_rate(relative_energy(x, config, pot))


def glauber_death_rate(spec: GlauberSpec, config: Configuration, index: int, pot: PairPotential) -> float:
    return spec.death_rate(relative_energy(config.point(index), config, pot, exclude=index))


# -- integrability reports ---------------------------------------------------

@dataclass(frozen=True)
class IntegrabilityReport:
    exponent: float
    value: float

    @property
    def satisfied(self) -> bool:
        return math.isfinite(self.value)


def integrability_report(exponent: float, pot: PairPotential, dim: int) -> IntegrabilityReport:
    """Integral of |exp[exponent * phi] - 1|; finite means the L2 condition holds."""
    report = IntegrabilityReport(exponent, integrability_constant(pot, dim, exponent))
    if not report.satisfied:
        logger.warning("integrability condition fails for exponent %g with %s potential", exponent, pot.shape)
    return report


def constants_summary(pot: PairPotential, kernel: HopKernel, dim: int,
                      variants: Optional[Dict[str, RateLaw]] = None) -> Dict[str, Any]:
    """Potential constants, activity thresholds, kernel moments and integrability checks."""
    constants = compute_constants(pot, dim)
    summary: Dict[str, Any] = {
        "B": constants.B,
        "C": constants.C,
        "z_threshold_1": constants.z_threshold_1,
        "z_threshold_2": constants.z_threshold_2,
        "nonnegative": constants.nonnegative,
        "kernel_l1_norm": kernel.l1_norm(dim),
        "kernel_second_moment": kernel.second_moment(dim),
        "integrability": {},
    }
    for label, variant in (variants or {}).items():
        exponent = variant.integrability_exponent()
        if exponent is None:
            continue
        report = integrability_report(exponent, pot, dim)
        summary["integrability"][label] = {
            "exponent": exponent, "value": report.value, "satisfied": report.satisfied,
        }
    if constants.nonnegative:
        logger.info("nonnegative potential: every activity is admissible")
    return summary
