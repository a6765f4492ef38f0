from typing import Any, Dict, List

from ..dynamics.diffusion import DiffusionEngine
from ..dynamics.glauber import GlauberEngine
from ..dynamics.kawasaki import KawasakiEngine
from ..generators import apply_diffusion, apply_glauber, apply_kawasaki
from ..geometry import Configuration
from .seeding import REPLICA, rng_for


def make_engine(kind: str, model, potential, config: Configuration, rng, seed: int = 0):
    """Engine of the given kind driven by `model` (RateSpec, GlauberSpec or DiffusionParams)."""
    engines = {"kawasaki": KawasakiEngine, "glauber": GlauberEngine, "diffusion": DiffusionEngine}
    if kind not in engines:
        raise ValueError(f"unknown engine kind {kind!r}")
    return engines[kind](model, potential, config, rng, seed)


def run_replica(task: Dict[str, Any]) -> Dict[str, Any]:
    """Run one engine replica from an equilibrium snapshot.

    This function runs in worker processes. Returns serializable dicts
    to avoid pickling engine state.

    Args:
        task: dict with keys kind, model, potential, box, points, horizon,
            observables, seed, replica and optionally sample_interval

    Returns:
        Dict with the replica index, sample times, one value list per
        observable name and the engine counters
    """
    rng = rng_for(task["seed"], task.get("stream", REPLICA), task["replica"])
    config = Configuration(task["box"], task["points"])
    engine = make_engine(task["kind"], task["model"], task["potential"], config, rng, task["seed"])
    frame = engine.run(task["horizon"], task["observables"], task.get("sample_interval"))
    return {
        "replica": task["replica"],
        "t": frame["t"].tolist(),
        "values": {obs.name: frame[obs.name].tolist() for obs in task["observables"]},
        "counters": dict(engine.counters),
        "n_start": len(config),
        "n_end": len(engine.state),
    }


def evaluate_chunk(task: Dict[str, Any]) -> Dict[str, Any]:
    """Squared generator discrepancies for a chunk of snapshots over a delta grid.

    Args:
        task: dict with keys mode ("glauber" or "diffusion"), points (list of
            arrays), box, functional, potential, rates (one RateSpec per
            delta), reference (GlauberSpec or DiffusionParams), grid, scale
            (per-delta multiplier of the Kawasaki generator)

    Returns:
        Dict with "squared" (deltas x snapshots), "quad_error" (max per
        delta) and "resolution" (per delta)
    """
    box = task["box"]
    functional = task["functional"]
    pot = task["potential"]
    grid = task["grid"]
    rates = task["rates"]
    scale = task.get("scale", [1.0] * len(rates))
    squared: List[List[float]] = [[] for _ in rates]
    quad_error = [0.0] * len(rates)
    resolution = [grid.kernel_points] * len(rates)
    for points in task["points"]:
        config = Configuration(box, points)
        if task["mode"] == "glauber":
            ref = apply_glauber(functional, config, task["reference"], pot, grid)
            reference, ref_error = ref.value, ref.error
        else:
            reference, ref_error = apply_diffusion(functional, config, task["reference"], pot), 0.0
        for k, spec in enumerate(rates):
            kaw = apply_kawasaki(functional, config, spec, pot, grid)
            squared[k].append(float((scale[k] * kaw.value - reference) ** 2))
            quad_error[k] = max(quad_error[k], scale[k] * kaw.error + ref_error)
            resolution[k] = kaw.resolution
    return {"squared": squared, "quad_error": quad_error, "resolution": resolution,
            "n": len(task["points"])}
