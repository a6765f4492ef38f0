"""Equilibrium invariance: start engines from Gibbs snapshots and compare
observable means at t = 0 and t = T through paired per-replica differences."""
import logging
import math
from dataclasses import replace
from typing import Any, Dict, List, Optional, Sequence

import numpy as np

from ..errors import InsufficientSamples, InvariantViolation
from ..geometry import TorusBox
from ..models import Snapshot
from ..observables import Observable, ParticleCount
from ..parallel.coordinator import ReplicaRunner
from ..parallel.seeding import REPLICA
from ..potentials import PairPotential
from .report import VerificationReport, timed

logger = logging.getLogger(__name__)

MIN_REPLICAS = 20
ENGINE_KINDS = ("kawasaki", "glauber", "diffusion")


def _tasks(kind: str, model, snapshots: Sequence[Snapshot], box: TorusBox, pot: PairPotential,
           horizon: float, observables: Sequence[Observable], seed: int,
           sample_interval: Optional[float]) -> List[Dict[str, Any]]:
    return [
        {
            "kind": kind,
            "model": model,
            "potential": pot,
            "box": box,
            "points": snap.points,
            "horizon": horizon,
            "sample_interval": sample_interval,
            "observables": list(observables),
            "seed": seed,
            "stream": REPLICA,
            "replica": j,
        }
        for j, snap in enumerate(snapshots)
    ]


def _paired_differences(results: Sequence[Dict[str, Any]], name: str) -> np.ndarray:
    return np.array([r["values"][name][-1] - r["values"][name][0] for r in results])


def _with_count(observables: Sequence[Observable]) -> List[Observable]:
    observables = list(observables)
    if not any(obs.name == "N" for obs in observables):
        observables.append(ParticleCount())
    return observables


def invariance_test(kind: str, model, snapshots: Sequence[Snapshot], box: TorusBox,
                    pot: PairPotential, horizon: float, observables: Sequence[Observable],
                    seed: int = 0, workers: int = 1, k: float = 3.0,
                    samples_per_run: int = 10) -> VerificationReport:
    """Run one replica per snapshot for `horizon` and test every observable.

    Passes iff every mean paired difference O(T) - O(0) lies within k
    standard errors. For the diffusion engine the threshold is widened by
    twice the change of the mean difference when dt is halved.

    Args:
        kind: "kawasaki", "glauber" or "diffusion"
        model: RateSpec, GlauberSpec or DiffusionParams matching `kind`
        samples_per_run: observation points per trajectory (for the
            particle-number witnesses)

    Raises:
        InsufficientSamples: fewer than 20 snapshots
        InvariantViolation: a Kawasaki replica changed its particle number
    """
    if kind not in ENGINE_KINDS:
        raise ValueError(f"unknown engine kind {kind!r}")
    if len(snapshots) < MIN_REPLICAS:
        raise InsufficientSamples(f"{len(snapshots)} replicas, need at least {MIN_REPLICAS}")
    observables = _with_count(observables)
    interval = horizon / samples_per_run if horizon > 0 else None
    runner = ReplicaRunner(workers)
    with timed() as clock:
        results = runner.run_replicas(_tasks(kind, model, snapshots, box, pot, horizon,
                                             observables, seed, interval))
        halved = None
        if kind == "diffusion":
            finer = replace(model, dt=model.dt / 2.0)
            halved = runner.run_replicas(_tasks(kind, finer, snapshots, box, pot, horizon,
                                                observables, seed, interval))

    n = len(results)
    details: Dict[str, Any] = {}
    passed = True
    worst = 0.0
    worst_se = 0.0
    for obs in observables:
        diffs = _paired_differences(results, obs.name)
        mean = float(np.mean(diffs))
        se = float(np.std(diffs, ddof=1) / math.sqrt(n))
        widen = 0.0
        if halved is not None:
            widen = 2.0 * abs(mean - float(np.mean(_paired_differences(halved, obs.name))))
        limit = k * se + widen
        ok = abs(mean) <= limit
        # effective z-score against the (possibly widened) limit
        score = k * abs(mean) / limit if limit > 0 else (0.0 if mean == 0 else math.inf)
        details[obs.name] = {"mean_difference": mean, "stderr": se, "bias_bound": widen,
                             "limit": limit, "passed": ok}
        passed = passed and ok
        if score >= worst:
            worst, worst_se = score, se

    count_changes = [np.ptp(r["values"]["N"]) for r in results]
    if kind == "kawasaki" and any(change != 0 for change in count_changes):
        raise InvariantViolation("a Kawasaki replica changed its particle number")
    details["replicas_with_varying_N"] = int(sum(change > 0 for change in count_changes))
    details["counters"] = _merge_counters(results)

    logger.info("%s invariance over %d replicas, T=%g: %s", kind, n, horizon,
                "pass" if passed else "fail")
    return VerificationReport(
        name=f"{kind}_invariance",
        passed=passed,
        statistic=float(worst),
        threshold=k,
        stderr=worst_se,
        sample_sizes={"replicas": n, "samples_per_run": samples_per_run},
        seed=seed,
        runtime=clock["runtime"],
        details=details,
    )


def _merge_counters(results: Sequence[Dict[str, Any]]) -> Dict[str, int]:
    total: Dict[str, int] = {}
    for r in results:
        for key, value in r["counters"].items():
            total[key] = total.get(key, 0) + value
    return total
