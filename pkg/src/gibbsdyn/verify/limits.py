"""Scaling-limit experiments for the Kawasaki generator.

Glauber direction: as delta -> 0 (long jumps) H_{delta,s} F tends to the
Glauber generator with d = alpha exp[s E], alpha = 2 k1 ||a||_1.
Diffusion direction: as delta -> oo (short jumps) delta^2 H_{delta,s} F tends
to the diffusion generator with c = z int a(h) (h^1)^2 dh.

Both curves are L2(mu) errors estimated over equilibrium snapshots.
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from ..dynamics.diffusion import DiffusionParams, require_smooth
from ..functionals import CylinderFunctional
from ..generators import QuadGrid
from ..geometry import TorusBox
from ..models import Snapshot
from ..parallel.chunker import SnapshotChunker
from ..parallel.coordinator import ReplicaRunner
from ..potentials import PairPotential
from ..rates import GlauberSpec, HopKernel, KawasakiS, RateSpec
from ..stats import batch_means
from .report import VerificationReport, timed

logger = logging.getLogger(__name__)

GLAUBER_DELTAS = (4.0, 2.0, 1.0, 0.5, 0.25)
DIFFUSION_DELTAS = (1.0, 2.0, 4.0, 8.0)
CSV_COLUMNS = ["delta", "l2err", "stderr", "nSnapshots", "quadResolution"]


@dataclass
class LimitCurve:
    deltas: List[float]
    l2err: List[float]
    stderr: List[float]
    n_snapshots: int
    resolution: List[int]
    quad_error: List[float] = field(default_factory=list)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            "delta": self.deltas,
            "l2err": self.l2err,
            "stderr": self.stderr,
            "nSnapshots": [self.n_snapshots] * len(self.deltas),
            "quadResolution": self.resolution,
        }, columns=CSV_COLUMNS)

    def to_csv(self, path: str, header: Optional[str] = None):
        with open(path, "w", encoding="utf-8") as fh:
            if header is not None:
                fh.write(header + "\n")
            self.to_frame().to_csv(fh, index=False)


def curve_passes(curve: LimitCurve, ratio: float = 0.25) -> bool:
    """Final value <= ratio * first and nonincreasing up to one pooled s.e. per step."""
    err, se = curve.l2err, curve.stderr
    if not err:
        return False
    if err[-1] > ratio * err[0]:
        return False
    return all(err[k + 1] <= err[k] + math.sqrt(se[k] ** 2 + se[k + 1] ** 2)
               for k in range(len(err) - 1))


def _curve(deltas: Sequence[float], chunks: Sequence[Dict[str, Any]], n: int) -> LimitCurve:
    l2err, stderr, resolution, quad_error = [], [], [], []
    for k in range(len(deltas)):
        values = np.concatenate([np.asarray(c["squared"][k], dtype=float) for c in chunks])
        est = batch_means(values)
        l2err.append(est.value)
        stderr.append(est.stderr)
        resolution.append(int(max(c["resolution"][k] for c in chunks)))
        quad_error.append(float(max(c["quad_error"][k] for c in chunks)))
    return LimitCurve(list(deltas), l2err, stderr, n, resolution, quad_error)


def _evaluate(mode: str, deltas: Sequence[float], rates: Sequence[RateSpec], scale: Sequence[float],
              reference, functional: CylinderFunctional, pot: PairPotential, box: TorusBox,
              snapshots: Sequence[Snapshot], grid: QuadGrid, workers: int) -> LimitCurve:
    points = [snap.points for snap in snapshots]
    chunker = SnapshotChunker(len(points), workers)
    tasks = [
        {
            "mode": mode,
            "points": part,
            "box": box,
            "functional": functional,
            "potential": pot,
            "rates": list(rates),
            "scale": list(scale),
            "reference": reference,
            "grid": grid,
        }
        for part in chunker.split(points)
    ]
    chunks = ReplicaRunner(workers).evaluate_chunks(tasks)
    return _curve(deltas, chunks, len(points))


def _report(name: str, curve: LimitCurve, seed: int, runtime: float, ratio: float,
            extra: Dict[str, Any]) -> VerificationReport:
    passed = curve_passes(curve, ratio)
    first = curve.l2err[0]
    statistic = curve.l2err[-1] / first if first > 0 else 0.0
    logger.info("%s curve %s -> %s", name, ["%.3g" % e for e in curve.l2err], "pass" if passed else "fail")
    details = {"deltas": curve.deltas, "l2err": curve.l2err, "stderr": curve.stderr,
               "quad_error": curve.quad_error, "resolution": curve.resolution}
    details.update(extra)
    return VerificationReport(
        name=name,
        passed=passed,
        statistic=statistic,
        threshold=ratio,
        stderr=curve.stderr[-1],
        sample_sizes={"snapshots": curve.n_snapshots},
        seed=seed,
        runtime=runtime,
        details=details,
    )


def glauber_alpha(snapshots: Sequence[Snapshot], box: TorusBox, kernel: HopKernel) -> float:
    """alpha = 2 k1 ||a||_1 with k1 the empirical density of the snapshots."""
    density = float(np.mean([len(snap) for snap in snapshots])) / box.volume
    return 2.0 * density * kernel.l1_norm(box.dim)


def glauber_limit_experiment(snapshots: Sequence[Snapshot], box: TorusBox, activity: float,
                             pot: PairPotential, kernel: HopKernel, functional: CylinderFunctional,
                             deltas: Sequence[float] = GLAUBER_DELTAS, s: float = 0.0,
                             grid: QuadGrid = QuadGrid(), seed: int = 0, workers: int = 1,
                             ratio: float = 0.25, csv_path: Optional[str] = None,
                             header: Optional[str] = None) -> VerificationReport:
    """L2 error of H_{delta,s} F against the Glauber generator over a descending delta grid."""
    if s != 0:
        logger.warning("Glauber limit with s=%g is exploratory; the gate is defined for s=0", s)
    alpha = glauber_alpha(snapshots, box, kernel)
    reference = GlauberSpec(s=s, activity=activity, alpha=alpha)
    rates = [RateSpec(KawasakiS(s), kernel.scaled(d), activity) for d in deltas]
    with timed() as clock:
        curve = _evaluate("glauber", deltas, rates, [1.0] * len(deltas), reference, functional,
                          pot, box, snapshots, grid, workers)
    if csv_path is not None:
        curve.to_csv(csv_path, header)
    return _report("glauber_limit", curve, seed, clock["runtime"], ratio, {"alpha": alpha, "s": s})


def diffusion_limit_experiment(snapshots: Sequence[Snapshot], box: TorusBox, activity: float,
                               pot: PairPotential, kernel: HopKernel, functional: CylinderFunctional,
                               deltas: Sequence[float] = DIFFUSION_DELTAS, s: float = 0.5,
                               grid: QuadGrid = QuadGrid(), seed: int = 0, workers: int = 1,
                               ratio: float = 0.25, csv_path: Optional[str] = None,
                               header: Optional[str] = None) -> VerificationReport:
    """L2 error of delta^2 H_{delta,s} F against the diffusion generator over an ascending grid.

    Raises:
        NotSmooth: the potential is not C2 or has a hard core
    """
    require_smooth(pot)
    c = activity * kernel.second_moment(box.dim)
    reference = DiffusionParams(s=s, mobility=c)
    rates = [RateSpec(KawasakiS(s), kernel.scaled(d), activity) for d in deltas]
    with timed() as clock:
        curve = _evaluate("diffusion", deltas, rates, [d * d for d in deltas], reference, functional,
                          pot, box, snapshots, grid, workers)
    if csv_path is not None:
        curve.to_csv(csv_path, header)
    return _report("diffusion_limit", curve, seed, clock["runtime"], ratio, {"mobility": c, "s": s})
