"""Monte Carlo check of the GNZ (Mecke for phi = 0) identity on sampler output.

  E sum_{x in gamma} F(x, gamma) = E int z exp(-E(x, gamma)) F(x, gamma + x) dx

The left side is a per-snapshot particle sum; the right side uses uniform
insertion points with weight z L^d exp(-E(x, gamma)). Both sides are compared
through the paired per-snapshot difference.
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from ..errors import InsufficientSamples
from ..functionals import TestField
from ..geometry import Configuration, TorusBox
from ..models import Snapshot
from ..parallel.seeding import GNZ, rng_for
from ..potentials import PairPotential, relative_energy_many
from ..stats import batch_means
from .report import VerificationReport, timed

logger = logging.getLogger(__name__)

MIN_SNAPSHOTS = 100


@dataclass(frozen=True)
class GnzFunction:
    """F(x, gamma) = g(x) h(<psi, gamma>), h one of "one" or "tanh"."""
    local: TestField
    field: Optional[TestField] = None
    outer: str = "one"
    name: str = "gnz"

    def __post_init__(self):
        if self.outer not in ("one", "tanh"):
            raise ValueError(f"unknown outer function {self.outer!r}")
        if self.outer != "one" and self.field is None:
            raise ValueError("a tanh outer function needs a field")

    def _h(self, t):
        if self.outer == "one":
            return np.ones_like(np.asarray(t, dtype=float))
        return np.tanh(t)

    def _psi(self, points, box: TorusBox) -> np.ndarray:
        if self.field is None:
            return np.zeros(len(points))
        return self.field.value(points, box)

    def lhs(self, points: np.ndarray, box: TorusBox) -> float:
        if len(points) == 0:
            return 0.0
        total = float(np.sum(self._psi(points, box)))
        return float(np.sum(self.local.value(points, box)) * self._h(total))

    def rhs(self, points: np.ndarray, box: TorusBox, activity: float, pot: PairPotential,
            inserted: np.ndarray) -> float:
        config = Configuration(box, points)
        weights = np.exp(-relative_energy_many(inserted, config, pot))
        total = float(np.sum(self._psi(points, box))) if len(points) else 0.0
        values = self.local.value(inserted, box) * self._h(total + self._psi(inserted, box))
        return float(activity * box.volume * np.mean(weights * values))


def default_functions(box: TorusBox) -> List[GnzFunction]:
    """Three bump-based test functions scaled to the box."""
    half = box.side / 2.0
    center = tuple([half] * box.dim)
    offset = tuple([half / 2.0] * box.dim)
    rho = box.side / 4.0
    g1 = TestField.bump(center, rho, 1.0)
    g2 = TestField.bump(offset, rho / 2.0, 1.0)
    psi = TestField.bump(center, rho, 0.5)
    return [
        GnzFunction(g1, name="bump"),
        GnzFunction(g1, psi, "tanh", name="bump_tanh"),
        GnzFunction(g2, name="small_bump"),
    ]


def gnz_test(snapshots: Sequence[Snapshot], box: TorusBox, activity: float, pot: PairPotential,
             functions: Optional[Sequence[GnzFunction]] = None, insertion_points: int = 64,
             seed: int = 0, rhs_activity: Optional[float] = None, k: float = 3.0) -> VerificationReport:
    """Compare both sides of the identity for each test function.

    Args:
        rhs_activity: activity used on the right side; differs from `activity`
            only for negative controls
        k: pass threshold in standard errors

    Raises:
        InsufficientSamples: fewer than 100 snapshots
    """
    if len(snapshots) < MIN_SNAPSHOTS:
        raise InsufficientSamples(f"{len(snapshots)} snapshots, need at least {MIN_SNAPSHOTS}")
    functions = list(functions) if functions is not None else default_functions(box)
    z_rhs = activity if rhs_activity is None else rhs_activity
    with timed() as clock:
        diffs = np.zeros((len(functions), len(snapshots)))
        for j, snap in enumerate(snapshots):
            rng = rng_for(seed, GNZ, j)
            inserted = box.uniform(rng, insertion_points)
            for f, fn in enumerate(functions):
                diffs[f, j] = fn.lhs(snap.points, box) - fn.rhs(snap.points, box, z_rhs, pot, inserted)
        estimates = [batch_means(row) for row in diffs]
    scores = [est.z_score() for est in estimates]
    passed = all(est.within(k) for est in estimates)
    worst = int(np.argmax(scores))
    logger.info("GNZ test: z-scores %s -> %s", ["%.2f" % s for s in scores], "pass" if passed else "fail")
    return VerificationReport(
        name="gnz",
        passed=passed,
        statistic=float(scores[worst]),
        threshold=k,
        stderr=estimates[worst].stderr,
        sample_sizes={"snapshots": len(snapshots), "insertion_points": insertion_points},
        seed=seed,
        runtime=clock["runtime"],
        details={fn.name: est.to_dict() for fn, est in zip(functions, estimates)},
    )
