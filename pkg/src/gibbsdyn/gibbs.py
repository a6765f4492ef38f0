"""Grand-canonical Metropolis-Hastings sampler and correlation-function estimators."""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from .errors import InsufficientSamples, InvariantViolation
from .geometry import Configuration, TorusBox, ball_volume, uniform_in_ball
from .models import Snapshot
from .parallel.seeding import SAMPLER, rng_for
from .potentials import PairPotential, compute_constants, energy_delta_swap, relative_energy
from .stats import batch_means, batch_means_array

logger = logging.getLogger(__name__)

MIN_SNAPSHOTS = 100


@dataclass(frozen=True)
class GibbsParams:
    activity: float
    potential: PairPotential
    box: TorusBox
    move_mix: Tuple[float, float, float] = (0.25, 0.25, 0.5)
    sweeps: int = 1000
    burn_in: int = 100
    thinning: int = 1
    seed: int = 0
    displacement: Optional[float] = None

    def __post_init__(self):
        if not self.activity > 0:
            raise ValueError("activity must be positive")
        mix = tuple(float(p) for p in self.move_mix)
        if len(mix) != 3 or min(mix) < 0 or abs(sum(mix) - 1.0) > 1e-12:
            raise ValueError("move_mix must be three nonnegative probabilities summing to 1")
        object.__setattr__(self, "move_mix", mix)
        if self.burn_in < 0 or self.sweeps < 0 or self.thinning < 1:
            raise ValueError("sweeps and burn_in must be nonnegative, thinning positive")

    @property
    def step_radius(self) -> float:
        return self.displacement if self.displacement is not None else self.potential.range


@dataclass
class MoveRecord:
    kind: str
    accepted: bool


def log_birth_ratio(config: Configuration, x, params: GibbsParams) -> float:
    """log of (p_death/p_birth) z V exp(-E(x, gamma)) / (N + 1)."""
    p_birth, p_death, _ = params.move_mix
    if p_birth == 0 or p_death == 0:
        return -math.inf
    energy = relative_energy(x, config, params.potential)
    if math.isinf(energy):
        return -math.inf
    return (math.log(p_death / p_birth) + math.log(params.activity * params.box.volume)
            - energy - math.log(len(config) + 1))


def log_death_ratio(config: Configuration, index: int, params: GibbsParams) -> float:
    """log of (p_birth/p_death) N exp(E(x, gamma minus x)) / (z V)."""
    p_birth, p_death, _ = params.move_mix
    if p_birth == 0 or p_death == 0:
        return -math.inf
    energy = relative_energy(config.point(index), config, params.potential, exclude=index)
    return (math.log(p_birth / p_death) + math.log(len(config)) + energy
            - math.log(params.activity * params.box.volume))


def acceptance(log_ratio: float) -> float:
    """min(1, exp(log_ratio))."""
    return math.exp(min(0.0, log_ratio))


def birth_acceptance(config: Configuration, x, params: GibbsParams) -> float:
    return acceptance(log_birth_ratio(config, x, params))


def death_acceptance(config: Configuration, index: int, params: GibbsParams) -> float:
    return acceptance(log_death_ratio(config, index, params))


def displacement_acceptance(config: Configuration, index: int, y, pot: PairPotential) -> float:
    delta = energy_delta_swap(config, index, y, pot)
    if math.isinf(delta):
        return 0.0
    return acceptance(-delta)


def mcmc_step(config: Configuration, params: GibbsParams, rng: np.random.Generator) -> MoveRecord:
    """One birth, death or displacement attempt; mutates `config` in place."""
    box = params.box
    u = rng.random()
    p_birth, p_death, _ = params.move_mix
    if u < p_birth:
        x = box.uniform(rng)
        log_ratio = log_birth_ratio(config, x, params)
        if math.log(rng.random()) < log_ratio:
            config.add(x)
            return MoveRecord("birth", True)
        return MoveRecord("birth", False)
    if u < p_birth + p_death:
        n = len(config)
        if n == 0:
            return MoveRecord("death", False)
        i = int(rng.integers(n))
        if math.log(rng.random()) < log_death_ratio(config, i, params):
            config.remove(i)
            return MoveRecord("death", True)
        return MoveRecord("death", False)
    n = len(config)
    if n == 0:
        return MoveRecord("displacement", False)
    i = int(rng.integers(n))
    y = box.wrap(config.point(i) + uniform_in_ball(rng, box.dim, params.step_radius))
    delta = energy_delta_swap(config, i, y, params.potential)
    if not math.isinf(delta) and math.log(rng.random()) < -delta:
        config.move(i, y)
        return MoveRecord("displacement", True)
    return MoveRecord("displacement", False)


class GibbsSampler:
    """Sweeps of Metropolis-Hastings moves; one sweep is max(10, N) moves."""

    def __init__(self, params: GibbsParams, rng: Optional[np.random.Generator] = None,
                 initial: Optional[Configuration] = None):
        self.params = params
        self.rng = rng if rng is not None else rng_for(params.seed, SAMPLER)
        self.state = initial.copy() if initial is not None else Configuration(params.box)
        self.state.attach(max(params.potential.range, 1e-9))
        self.proposed: Dict[str, int] = {"birth": 0, "death": 0, "displacement": 0}
        self.accepted: Dict[str, int] = {"birth": 0, "death": 0, "displacement": 0}

    def sweep(self):
        for _ in range(max(10, len(self.state))):
            record = mcmc_step(self.state, self.params, self.rng)
            self.proposed[record.kind] += 1
            if record.accepted:
                self.accepted[record.kind] += 1

    def acceptance_rates(self) -> Dict[str, float]:
        return {k: (self.accepted[k] / self.proposed[k] if self.proposed[k] else 0.0) for k in self.proposed}

    def run(self) -> List[Snapshot]:
        params = self.params
        for _ in range(params.burn_in):
            self.sweep()
        snapshots = []
        for sweep in range(1, params.sweeps + 1):
            self.sweep()
            if sweep % params.thinning == 0:
                snapshots.append(Snapshot.from_configuration(self.state, sweep=sweep, seed=params.seed))
        logger.info("sampler finished: %d snapshots, acceptance %s", len(snapshots), self.acceptance_rates())
        return snapshots


def _note_activity(params: GibbsParams):
    try:
        constants = compute_constants(params.potential, params.box.dim)
    except ValueError:
        return
    if params.activity > constants.z_threshold_1:
        logger.warning(
            "activity %g exceeds the uniqueness threshold %g (informational)",
            params.activity, constants.z_threshold_1,
        )


def sample_equilibrium(params: GibbsParams, rng: Optional[np.random.Generator] = None,
                       initial: Optional[Configuration] = None) -> List[Snapshot]:
    """Burn in, then record a snapshot every `thinning` sweeps."""
    _note_activity(params)
    snapshots = GibbsSampler(params, rng, initial).run()
    hc = params.potential.hard_core
    if hc > 0:
        for snap in snapshots:
            if len(snap) > 1:
                pts = snap.points
                i, j = np.triu_indices(len(pts), k=1)
                if np.min(params.box.dist(pts[i], pts[j])) < hc:
                    raise InvariantViolation(f"hard-core overlap in snapshot at sweep {snap.sweep}")
    return snapshots


# -- correlation functions ---------------------------------------------------

@dataclass
class CorrelationEstimate:
    order: int
    value: np.ndarray
    stderr: np.ndarray
    ess: float
    n_samples: int
    edges: Optional[np.ndarray] = field(default=None, repr=False)

    def to_frame(self) -> pd.DataFrame:
        if self.order == 1:
            return pd.DataFrame({"k1": [float(self.value)], "stderr": [float(self.stderr)],
                                 "ess": [self.ess], "nSnapshots": [self.n_samples]})
        return pd.DataFrame({
            "r_lo": self.edges[:-1],
            "r_hi": self.edges[1:],
            "k2": self.value,
            "stderr": self.stderr,
        })


def pair_distances(points: np.ndarray, box: TorusBox) -> np.ndarray:
    n = len(points)
    if n < 2:
        return np.zeros(0)
    i, j = np.triu_indices(n, k=1)
    return np.atleast_1d(box.dist(points[i], points[j]))


def estimate_correlations(snapshots: Sequence[Snapshot], box: TorusBox, order: int,
                          bins: int = 40, r_max: Optional[float] = None) -> CorrelationEstimate:
    """Estimate k1 (density) or the radial k2(r) histogram.

    Raises:
        InsufficientSamples: fewer than 100 snapshots
    """
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    if len(snapshots) < MIN_SNAPSHOTS:
        raise InsufficientSamples(f"{len(snapshots)} snapshots, need at least {MIN_SNAPSHOTS}")
    volume = box.volume
    if order == 1:
        est = batch_means([len(s) / volume for s in snapshots])
        return CorrelationEstimate(1, np.asarray(est.value), np.asarray(est.stderr), est.ess, est.n)

    r_max = box.side / 2.0 if r_max is None else r_max
    if r_max > box.side / 2.0:
        raise ValueError("r_max must not exceed half the box side")
    edges = np.linspace(0.0, r_max, bins + 1)
    shells = np.array([ball_volume(box.dim, b) - ball_volume(box.dim, a) for a, b in zip(edges[:-1], edges[1:])])
    rows = np.zeros((len(snapshots), bins))
    for k, snap in enumerate(snapshots):
        counts, _ = np.histogram(pair_distances(snap.points, box), bins=edges)
        rows[k] = 2.0 * counts / (volume * shells)
    mean, se = batch_means_array(rows)
    with np.errstate(divide="ignore", invalid="ignore"):
        ess = float(np.nanmean(np.where(se > 0, rows.var(axis=0, ddof=1) / se ** 2, np.nan)))
    if not math.isfinite(ess):
        ess = float(len(snapshots))
    return CorrelationEstimate(2, mean, se, ess, len(snapshots), edges)


@dataclass
class RuelleReport:
    xi: float
    order: int
    flagged: List[int]

    @property
    def clean(self) -> bool:
        return not self.flagged


def ruelle_report(estimate: CorrelationEstimate, xi: float) -> RuelleReport:
    """Flag estimates with value - 3 s.e. above xi^order."""
    if not xi > 0:
        raise ValueError("xi must be positive")
    bound = xi ** estimate.order
    excess = np.atleast_1d(estimate.value - 3.0 * estimate.stderr) > bound
    return RuelleReport(xi, estimate.order, [int(i) for i in np.flatnonzero(excess)])
