"""Exact algebraic checks of the rate families on random configurations.

Every residual here is a floating point identity, so the suite is
deterministic and gated at a tight absolute/relative tolerance.
"""
import logging
import math
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np

from ..geometry import Configuration, TorusBox, random_configuration, uniform_in_ball
from ..parallel.seeding import BALANCE, rng_for
from ..potentials import PairPotential, SquareWell, relative_energy
from ..rates import (
    GlauberSpec,
    HopEnergies,
    HopKernel,
    KawasakiS,
    KawasakiUV,
    RateSpec,
    boltzmann,
    glauber_death_rate,
    hop_energies,
    symmetrize,
)
from .report import VerificationReport, timed

logger = logging.getLogger(__name__)

THRESHOLD = 1e-10
DEFAULT_S = (0.0, 0.3, 0.5, 1.0)
DEFAULT_UV = ((0.0, 1.0), (0.2, 0.7))


def residual(a, b) -> float:
    """|a - b| relative to max(1, |a|, |b|); equal infinities and zeros give 0."""
    a, b = float(a), float(b)
    if a == b:
        return 0.0
    if not (math.isfinite(a) and math.isfinite(b)):
        return math.inf
    return abs(a - b) / max(1.0, abs(a), abs(b))


def _hop_target(config: Configuration, index: int, kernel: HopKernel, rng: np.random.Generator):
    """Target inside the kernel support, half the time pulled towards another particle."""
    box = config.box
    x = config.point(index)
    if len(config) > 1 and rng.random() < 0.5:
        j = int(rng.integers(len(config) - 1))
        j = j if j < index else j + 1
        toward = box.displacement(config.point(j), x)
        norm = float(np.sqrt(toward @ toward))
        if 0 < norm < kernel.support_radius:
            return box.wrap(x + toward * rng.uniform(0.5, 1.5))
    return box.wrap(x + kernel.sample(rng, box.dim))


def _blocked_target(config: Configuration, index: int, pot: PairPotential,
                    rng: np.random.Generator):
    """A location inside the hard core of some other particle, or None."""
    if pot.hard_core <= 0 or len(config) < 2:
        return None
    j = (index + 1 + int(rng.integers(len(config) - 1))) % len(config)
    offset = uniform_in_ball(rng, config.box.dim, 0.9 * pot.hard_core)
    return config.box.wrap(config.point(j) + offset)


def kawasaki_s_residual(spec: RateSpec, x, y, energies: HopEnergies, box: TorusBox) -> float:
    """c~_s against c_s."""
    raw = spec.rate(x, y, energies, box)
    return residual(symmetrize(spec.evaluator(box), x, y, energies), raw)


def detailed_balance_residual(spec: RateSpec, x, y, energies: HopEnergies, box: TorusBox) -> float:
    """c~(x, y, gamma) against exp[E(x, gamma minus x) - E(y, gamma minus x)] c~(y, x, gamma')."""
    rate = spec.evaluator(box)
    forward = symmetrize(rate, x, y, energies)
    backward = symmetrize(rate, y, x, energies.reversed())
    weight = boltzmann((1.0, energies.source), (-1.0, energies.target))
    return residual(forward, weight * backward)


def involution_residual(spec: RateSpec, x, y, energies: HopEnergies, box: TorusBox) -> float:
    """Symmetrizing twice changes nothing."""
    once = symmetrize(spec.evaluator(box), x, y, energies)
    twice = symmetrize(lambda a, b, e: symmetrize(spec.evaluator(box), a, b, e), x, y, energies)
    return residual(twice, once)


def uv_display_residual(spec: RateSpec, x, y, energies: HopEnergies, box: TorusBox) -> float:
    """For phi(x - y) = 0: c~_{u,v} = a/2 (e^{u E_x - (1-v) E_y} + e^{v E_x - (1-u) E_y})."""
    u, v = spec.variant.u, spec.variant.v
    a = spec.kernel.value(box.displacement(y, x))
    src, tgt = energies.source, energies.target
    display = 0.5 * a * (boltzmann((u, src), (-(1.0 - v), tgt)) + boltzmann((v, src), (-(1.0 - u), tgt)))
    if not math.isfinite(tgt):
        display = 0.0
    return residual(symmetrize(spec.evaluator(box), x, y, energies), display)


def glauber_residual(spec: GlauberSpec, config: Configuration, x, pot: PairPotential) -> float:
    """b_s(x, gamma) against exp[-E(x, gamma)] d_s(x, gamma + x)."""
    energy = relative_energy(x, config, pot)
    birth = spec.birth_rate(energy)
    grown = config.copy()
    index = grown.add(x)
    death = glauber_death_rate(spec, grown, index, pot)
    return residual(birth, boltzmann((-1.0, energy)) * death)


def detailed_balance_suite(s_values: Sequence[float] = DEFAULT_S,
                           uv_pairs: Sequence[Tuple[float, float]] = DEFAULT_UV,
                           pot: Optional[PairPotential] = None, box: Optional[TorusBox] = None,
                           kernel: Optional[HopKernel] = None, n_cases: int = 1000, seed: int = 0,
                           max_particles: int = 20, activity: float = 1.0,
                           threshold: float = THRESHOLD) -> VerificationReport:
    """Run every algebraic residual family over `n_cases` random configurations.

    Families: c~_s = c_s, detailed balance and involution of the symmetrized
    c_{u,v}, the displayed c~_{u,v} formula when phi(x - y) = 0, c_{0,1} = a,
    b_s = e^{-E} d_s(., gamma + x), and zero rates for hard-core blocked targets.
    """
    pot = pot if pot is not None else SquareWell(depth=0.3, hard_core=0.5, range=1.0)
    box = box if box is not None else TorusBox(2, 5.0)
    kernel = kernel if kernel is not None else HopKernel()
    rng = rng_for(seed, BALANCE)
    s_specs = [RateSpec(KawasakiS(s), kernel, activity) for s in s_values]
    uv_specs = [RateSpec(KawasakiUV(u, v), kernel, activity) for u, v in uv_pairs]
    glauber_specs = [GlauberSpec(s, activity, 1.0) for s in s_values]
    plain = RateSpec(KawasakiUV(0.0, 1.0), kernel, activity)
    worst: Dict[str, float] = {}

    def record(family: str, values: Iterable[float]):
        worst[family] = max([worst.get(family, 0.0)] + list(values))

    with timed() as clock:
        for _ in range(n_cases):
            n = int(rng.integers(1, max_particles + 1))
            config = random_configuration(box, n, rng, hard_core=pot.hard_core)
            i = int(rng.integers(n))
            x = config.point(i)
            y = _hop_target(config, i, kernel, rng)
            energies = hop_energies(config, i, y, pot)
            record("kawasaki_s", (kawasaki_s_residual(sp, x, y, energies, box) for sp in s_specs))
            record("detailed_balance", (detailed_balance_residual(sp, x, y, energies, box)
                                        for sp in s_specs + uv_specs))
            record("involution", (involution_residual(sp, x, y, energies, box) for sp in uv_specs))
            if float(energies.pair) == 0.0:
                record("uv_display", (uv_display_residual(sp, x, y, energies, box) for sp in uv_specs))
            if math.isfinite(energies.target):
                a = kernel.value(box.displacement(y, x))
                record("c01_is_kernel", [residual(plain.rate(x, y, energies, box), a)])
            fresh = box.uniform(rng)
            record("glauber", (glauber_residual(sp, config, fresh, pot) for sp in glauber_specs))
            blocked = _blocked_target(config, i, pot, rng)
            if blocked is not None:
                e_blocked = hop_energies(config, i, blocked, pot)
                values = [abs(float(sp.symmetric_rate(x, blocked, e_blocked, box)))
                          for sp in s_specs + uv_specs]
                values += [abs(float(sp.birth_rate(relative_energy(blocked, config, pot))))
                           for sp in glauber_specs]
                record("hard_core_blocked", values)
    statistic = max(worst.values()) if worst else 0.0
    passed = statistic <= threshold
    logger.info("detailed balance suite over %d cases: max residual %.3g -> %s",
                n_cases, statistic, "pass" if passed else "fail")
    return VerificationReport(
        name="detailed_balance",
        passed=passed,
        statistic=statistic,
        threshold=threshold,
        stderr=0.0,
        sample_sizes={"cases": n_cases},
        seed=seed,
        runtime=clock["runtime"],
        details={"max_residual": worst, "s_values": list(s_values), "uv_pairs": [list(p) for p in uv_pairs]},
    )
