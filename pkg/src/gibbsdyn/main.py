import argparse
import json
import logging
import os
import sys
from dataclasses import replace
from typing import List, Optional, Sequence

from . import __version__
from .config import (
    ExperimentConfig,
    build_box,
    build_diffusion_params,
    build_fields,
    build_functional,
    build_gibbs_params,
    build_glauber_spec,
    build_kernel,
    build_potential,
    build_rate_spec,
    output_directory,
    parse_config,
    provenance,
)
from .dynamics.diffusion import DiffusionEngine
from .dynamics.glauber import GlauberEngine
from .dynamics.kawasaki import KawasakiEngine
from .errors import GibbsDynError, UsageError
from .generators import QuadGrid
from .gibbs import estimate_correlations, ruelle_report, sample_equilibrium
from .models import Snapshot
from .observables import MeanSquaredDisplacement, default_battery
from .parallel.seeding import REPLICA, SAMPLER, rng_for
from .rates import KawasakiS, constants_summary
from .storage.formats import event_writer, read_snapshots, write_csv, write_series, write_snapshots
from .verify.balance import detailed_balance_suite
from .verify.gnz import gnz_test
from .verify.invariance import invariance_test
from .verify.limits import DIFFUSION_DELTAS, GLAUBER_DELTAS, diffusion_limit_experiment, glauber_limit_experiment
from .verify.report import VerificationReport, to_plain

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FAILED = 2

COMMANDS = (
    "sample", "run-kawasaki", "run-glauber", "run-diffusion", "verify-gnz", "verify-balance",
    "verify-invariance", "limit-glauber", "limit-diffusion", "constants", "serve",
)


class _ArgumentParser(argparse.ArgumentParser):
    """Raises UsageError instead of exiting so that main() owns exit codes."""

    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def _configure_logging(level: int) -> None:
    """Configure root logging and route Python warnings into it."""
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    logging.getLogger().setLevel(level)
    logging.captureWarnings(True)


def build_parser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog="gibbsdyn", description="Gibbs particle dynamics simulation and verification lab")
    parser.add_argument("--version", action="version", version=f"gibbsdyn {__version__}")
    parser.add_argument("--log-level", default="WARNING",
                        choices=["DEBUG", "INFO", "WARNING", "ERROR"], help="Root log level")
    parser.add_argument("--verbose", "-v", action="store_true", help="Shortcut for --log-level INFO")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True
    for name in COMMANDS:
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", "-c", help="YAML experiment config (defaults if omitted)")
        cmd.add_argument("--seed", type=int, help="Override the config seed")
        cmd.add_argument("--workers", "-w", type=int, help="Override experiment.workers")
        if name == "verify-invariance":
            cmd.add_argument("--engine", choices=["kawasaki", "glauber", "diffusion"], default="kawasaki")
        if name == "serve":
            cmd.add_argument("--host", default="127.0.0.1")
            cmd.add_argument("--port", type=int, default=8000)
    return parser


def _load(args: argparse.Namespace, deltas: Optional[Sequence[float]] = None) -> ExperimentConfig:
    cfg = parse_config(args.config, deltas)
    updates = {}
    if args.seed is not None:
        updates["seed"] = args.seed
    if args.workers is not None:
        updates["experiment"] = cfg.experiment.model_copy(update={"workers": args.workers})
    return cfg.model_copy(update=updates) if updates else cfg


def _output_path(cfg: ExperimentConfig, name: str) -> str:
    directory = output_directory(cfg)
    os.makedirs(directory, exist_ok=True)
    return os.path.join(directory, name)


def _snapshots(cfg: ExperimentConfig, count: Optional[int] = None) -> List[Snapshot]:
    """Snapshots from experiment.snapshots, or a fresh sampler run."""
    if cfg.experiment.snapshots:
        with open(cfg.experiment.snapshots, "r", encoding="utf-8") as fh:
            box, snapshots = read_snapshots(fh)
        expected = build_box(cfg)
        if box is not None and (box.dim, box.side) != (expected.dim, expected.side):
            raise GibbsDynError(f"snapshot file box {box} does not match the config box {expected}")
        return snapshots[:count] if count else snapshots
    params = build_gibbs_params(cfg)
    if count:
        params = replace(params, sweeps=count * params.thinning)
    return sample_equilibrium(params, rng_for(cfg.seed, SAMPLER))


def _write_report(cfg: ExperimentConfig, report: VerificationReport) -> int:
    document = report.to_dict(include_runtime=False)
    document["provenance"] = provenance(cfg).to_dict()
    text = json.dumps(document, indent=2, sort_keys=True)
    with open(_output_path(cfg, f"{report.name}.json"), "w", encoding="utf-8") as fh:
        fh.write(text + "\n")
    logger.info("%s finished in %.2fs", report.name, report.runtime)
    print(text)
    return EXIT_OK if report.passed else EXIT_FAILED


def cmd_sample(cfg: ExperimentConfig, args) -> int:
    box = build_box(cfg)
    snapshots = _snapshots(cfg)
    with open(_output_path(cfg, "snapshots.txt"), "w", encoding="utf-8") as fh:
        written = write_snapshots(fh, snapshots, box, provenance(cfg))
    print(f"Wrote {written} snapshots")
    if len(snapshots) >= 100:
        estimate = estimate_correlations(snapshots, box, cfg.experiment.correlation_order, cfg.experiment.bins)
        with open(_output_path(cfg, f"correlation_k{estimate.order}.csv"), "w", encoding="utf-8") as fh:
            write_csv(fh, estimate.to_frame(), provenance(cfg))
        if cfg.experiment.xi is not None:
            report = ruelle_report(estimate, cfg.experiment.xi)
            if not report.clean:
                logger.warning("correlation bins %s exceed xi^%d", report.flagged, report.order)
    else:
        logger.warning("only %d snapshots; skipping correlation estimates", len(snapshots))
    return EXIT_OK


def _run_engine(cfg: ExperimentConfig, engine, name: str) -> int:
    box = build_box(cfg)
    fields = build_fields(cfg.experiment.fields, box)
    pot = engine.potential
    observables = default_battery(fields[0], cfg.experiment.pair_radius or pot.range) + [MeanSquaredDisplacement()]
    sink = None
    events = None
    if name != "diffusion":
        events = open(_output_path(cfg, f"{name}_events.txt"), "w", encoding="utf-8")
        sink = event_writer(events, provenance(cfg))
    try:
        frame = engine.run(cfg.experiment.horizon, observables, cfg.experiment.sample_interval, sink)
    finally:
        if sink is not None:
            sink.flush()
            events.close()
    with open(_output_path(cfg, f"{name}_series.jsonl"), "w", encoding="utf-8") as fh:
        write_series(fh, frame, provenance(cfg))
    print(json.dumps({"engine": name, "t": engine.clock, "counters": engine.counters,
                      "N": len(engine.state)}, sort_keys=True))
    return EXIT_OK


def _initial(cfg: ExperimentConfig):
    snapshots = _snapshots(cfg, None if cfg.experiment.snapshots else 1)
    return snapshots[-1].to_configuration(build_box(cfg))


def cmd_run_kawasaki(cfg: ExperimentConfig, args) -> int:
    engine = KawasakiEngine(build_rate_spec(cfg), build_potential(cfg.potential), _initial(cfg),
                            rng_for(cfg.seed, REPLICA), cfg.seed)
    return _run_engine(cfg, engine, "kawasaki")


def cmd_run_glauber(cfg: ExperimentConfig, args) -> int:
    engine = GlauberEngine(build_glauber_spec(cfg), build_potential(cfg.potential), _initial(cfg),
                           rng_for(cfg.seed, REPLICA), cfg.seed)
    return _run_engine(cfg, engine, "glauber")


def cmd_run_diffusion(cfg: ExperimentConfig, args) -> int:
    engine = DiffusionEngine(build_diffusion_params(cfg), build_potential(cfg.potential), _initial(cfg),
                             rng_for(cfg.seed, REPLICA), cfg.seed)
    return _run_engine(cfg, engine, "diffusion")


def cmd_verify_gnz(cfg: ExperimentConfig, args) -> int:
    report = gnz_test(_snapshots(cfg), build_box(cfg), cfg.activity, build_potential(cfg.potential),
                      insertion_points=cfg.experiment.insertion_points, seed=cfg.seed, k=cfg.experiment.k_sigma)
    return _write_report(cfg, report)


def cmd_verify_balance(cfg: ExperimentConfig, args) -> int:
    report = detailed_balance_suite(
        s_values=cfg.experiment.s_values,
        uv_pairs=cfg.experiment.uv_pairs,
        pot=build_potential(cfg.potential),
        box=build_box(cfg),
        kernel=build_kernel(cfg.kernel),
        n_cases=cfg.experiment.n_cases,
        seed=cfg.seed,
        activity=cfg.activity,
    )
    return _write_report(cfg, report)


def cmd_verify_invariance(cfg: ExperimentConfig, args) -> int:
    box = build_box(cfg)
    pot = build_potential(cfg.potential)
    models = {"kawasaki": build_rate_spec, "glauber": build_glauber_spec, "diffusion": build_diffusion_params}
    model = models[args.engine](cfg)
    fields = build_fields(cfg.experiment.fields, box)
    observables = default_battery(fields[0], cfg.experiment.pair_radius or pot.range, include_count=False)
    report = invariance_test(args.engine, model, _snapshots(cfg, cfg.experiment.replicas), box, pot,
                             cfg.experiment.horizon, observables, seed=cfg.seed,
                             workers=cfg.experiment.workers, k=cfg.experiment.k_sigma)
    return _write_report(cfg, report)


def _limit(cfg: ExperimentConfig, experiment, deltas, s: float, name: str) -> int:
    grid = QuadGrid(cfg.experiment.quad_points, cfg.experiment.box_points)
    report = experiment(_snapshots(cfg), build_box(cfg), cfg.activity, build_potential(cfg.potential),
                        build_kernel(cfg.kernel), build_functional(cfg), deltas=deltas, s=s, grid=grid,
                        seed=cfg.seed, workers=cfg.experiment.workers, ratio=cfg.experiment.decrease_ratio,
                        csv_path=_output_path(cfg, f"{name}.csv"), header=provenance(cfg).header())
    return _write_report(cfg, report)


def cmd_limit_glauber(cfg: ExperimentConfig, args) -> int:
    deltas = cfg.experiment.delta_grid or list(GLAUBER_DELTAS)
    cfg = _load(args, deltas)
    return _limit(cfg, glauber_limit_experiment, deltas, cfg.glauber.s, "glauber_limit")


def cmd_limit_diffusion(cfg: ExperimentConfig, args) -> int:
    deltas = cfg.experiment.delta_grid or list(DIFFUSION_DELTAS)
    cfg = _load(args, deltas)
    return _limit(cfg, diffusion_limit_experiment, deltas, cfg.diffusion.s, "diffusion_limit")


def cmd_constants(cfg: ExperimentConfig, args) -> int:
    variants = {
        "kawasaki": build_rate_spec(cfg).variant,
        "diffusion": KawasakiS(cfg.diffusion.s),
    }
    summary = constants_summary(build_potential(cfg.potential), build_kernel(cfg.kernel), cfg.box.d, variants)
    document = to_plain(summary)
    document["provenance"] = provenance(cfg).to_dict()
    print(json.dumps(document, indent=2, sort_keys=True))
    return EXIT_OK


def cmd_serve(cfg: ExperimentConfig, args) -> int:
    import uvicorn

    uvicorn.run("gibbsdyn.api:app", host=args.host, port=args.port)
    return EXIT_OK


HANDLERS = {
    "sample": cmd_sample,
    "run-kawasaki": cmd_run_kawasaki,
    "run-glauber": cmd_run_glauber,
    "run-diffusion": cmd_run_diffusion,
    "verify-gnz": cmd_verify_gnz,
    "verify-balance": cmd_verify_balance,
    "verify-invariance": cmd_verify_invariance,
    "limit-glauber": cmd_limit_glauber,
    "limit-diffusion": cmd_limit_diffusion,
    "constants": cmd_constants,
    "serve": cmd_serve,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Command line entry point; returns 0 on success, 2 on a failed verification, 1 on error."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_ERROR
    _configure_logging(logging.INFO if args.verbose else getattr(logging, args.log_level))
    try:
        cfg = _load(args)
        logger.info("gibbsdyn %s %s seed=%d config=%s", __version__, args.command, cfg.seed,
                    provenance(cfg).config_hash)
        return HANDLERS[args.command](cfg, args)
    except (GibbsDynError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
