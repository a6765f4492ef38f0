"""Experiment configuration: YAML files validated into pydantic models.

Every problem found is reported at once as a list of (field path, message)
pairs through SchemaError. Builders turn the validated models into the
domain objects used by the engines and the verification suite.
"""
import logging
import os
from typing import Any, Dict, List, Literal, Optional, Sequence, Tuple

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .dynamics.diffusion import DiffusionParams
from .errors import SchemaError
from .functionals import CylinderFunctional, Exponential, OuterFunction, Polynomial, Tanh, TestField
from .geometry import TorusBox
from .gibbs import GibbsParams
from .potentials import Ideal, PairPotential, SmoothBump, SoftRepulsive, SquareWell
from .rates import GlauberSpec, HopKernel, KawasakiS, KawasakiUV, RateSpec
from .storage.models import Provenance, canonical_json, generate_hash

logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "GIBBSDYN_OUTPUT_DIR"


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class BoxConfig(StrictModel):
    d: int = Field(2, ge=1, le=3)
    L: float = Field(10.0, gt=0)


class PotentialConfig(StrictModel):
    shape: Literal["ideal", "square_well", "smooth_bump", "soft_repulsive"] = "ideal"
    depth: float = Field(0.0, ge=0)
    amplitude: float = 0.0
    hard_core: float = Field(0.0, ge=0)
    range: float = Field(1.0, gt=0)
    center: float = Field(0.0, ge=0)
    width: float = Field(1.0, gt=0)
    neighbor_cap: Optional[int] = Field(None, ge=1)


class KernelConfig(StrictModel):
    shape: Literal["ball", "triangle"] = "ball"
    radius: float = Field(1.0, gt=0)
    amplitude: float = Field(1.0, gt=0)
    delta: float = Field(1.0, gt=0)


class KawasakiConfig(StrictModel):
    variant: Literal["s", "uv"] = "s"
    s: float = Field(0.5, ge=0, le=1)
    u: float = Field(0.0, ge=0, le=1)
    v: float = Field(1.0, ge=0, le=1)


class GlauberConfig(StrictModel):
    s: float = Field(0.0, ge=0, le=1)
    alpha: float = Field(1.0, ge=0)


class DiffusionConfig(StrictModel):
    s: float = Field(0.5, ge=0, le=1)
    mobility: float = Field(1.0, gt=0)
    dt: float = Field(1e-3, gt=0)
    guard: float = Field(5.0, gt=0)


class SamplerConfig(StrictModel):
    move_mix: Tuple[float, float, float] = (0.25, 0.25, 0.5)
    sweeps: int = Field(1000, ge=0)
    burn_in: int = Field(100, ge=0)
    thinning: int = Field(1, ge=1)
    displacement: Optional[float] = Field(None, gt=0)

    @field_validator("move_mix")
    @classmethod
    def _mix_sums_to_one(cls, value):
        if min(value) < 0 or abs(sum(value) - 1.0) > 1e-12:
            raise ValueError("move_mix must be three nonnegative probabilities summing to 1")
        return value


class FieldConfig(StrictModel):
    center: Optional[List[float]] = None
    radius: Optional[float] = Field(None, gt=0)
    amplitude: float = 0.5


class FunctionalConfig(StrictModel):
    fields: List[FieldConfig] = Field(default_factory=list)
    outer: Literal["exp", "tanh", "polynomial"] = "exp"
    weights: Optional[List[float]] = None
    offset: float = 0.0
    coefficients: List[float] = Field(default_factory=lambda: [0.0, 1.0])


class ExperimentParams(StrictModel):
    horizon: float = Field(1.0, ge=0)
    sample_interval: Optional[float] = Field(None, gt=0)
    replicas: int = Field(50, ge=1)
    workers: int = Field(1, ge=1)
    delta_grid: Optional[List[float]] = None
    quad_points: int = Field(64, ge=2)
    box_points: Optional[int] = Field(None, ge=2)
    snapshots: Optional[str] = None
    insertion_points: int = Field(64, ge=1)
    fields: List[FieldConfig] = Field(default_factory=list)
    functional: FunctionalConfig = Field(default_factory=FunctionalConfig)
    xi: Optional[float] = Field(None, gt=0)
    n_cases: int = Field(1000, ge=1)
    s_values: List[float] = Field(default_factory=lambda: [0.0, 0.3, 0.5, 1.0])
    uv_pairs: List[Tuple[float, float]] = Field(default_factory=lambda: [(0.0, 1.0), (0.2, 0.7)])
    pair_radius: Optional[float] = Field(None, gt=0)
    k_sigma: float = Field(3.0, gt=0)
    decrease_ratio: float = Field(0.25, gt=0)
    correlation_order: int = Field(2, ge=1, le=2)
    bins: int = Field(40, ge=1)

    @field_validator("delta_grid")
    @classmethod
    def _positive_deltas(cls, value):
        if value is not None and (not value or min(value) <= 0):
            raise ValueError("delta_grid must be a nonempty list of positive numbers")
        return value


class OutputConfig(StrictModel):
    directory: str = "output"


class ExperimentConfig(StrictModel):
    activity: float = Field(0.5, gt=0)
    seed: int = Field(0, ge=0, lt=2 ** 64)
    box: BoxConfig = Field(default_factory=BoxConfig)
    potential: PotentialConfig = Field(default_factory=PotentialConfig)
    kernel: KernelConfig = Field(default_factory=KernelConfig)
    kawasaki: KawasakiConfig = Field(default_factory=KawasakiConfig)
    glauber: GlauberConfig = Field(default_factory=GlauberConfig)
    diffusion: DiffusionConfig = Field(default_factory=DiffusionConfig)
    sampler: SamplerConfig = Field(default_factory=SamplerConfig)
    experiment: ExperimentParams = Field(default_factory=ExperimentParams)
    output: OutputConfig = Field(default_factory=OutputConfig)


# -- loading -----------------------------------------------------------------

def load_mapping(path: str) -> Dict[str, Any]:
    """Read a YAML file; an empty file is an empty mapping."""
    from ruamel.yaml import YAML

    yaml = YAML(typ="safe")
    with open(path, "r", encoding="utf-8") as fh:
        data = yaml.load(fh)
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise SchemaError([("<root>", "config root must be a mapping")])
    return data


def _loc(parts: Sequence[Any]) -> str:
    return ".".join(str(p) for p in parts) or "<root>"


def validate_config(data: Dict[str, Any], deltas: Optional[Sequence[float]] = None) -> ExperimentConfig:
    """Validate a raw mapping, then the cross-field domain constraints.

    Raises:
        SchemaError: listing every violation found
    """
    try:
        cfg = ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise SchemaError([(_loc(err["loc"]), err["msg"]) for err in exc.errors()]) from None
    violations = domain_violations(cfg, deltas)
    if violations:
        raise SchemaError(violations)
    return cfg


def parse_config(path: Optional[str] = None, deltas: Optional[Sequence[float]] = None) -> ExperimentConfig:
    """Load and validate an experiment config; no path gives all defaults."""
    data = load_mapping(path) if path else {}
    cfg = validate_config(data, deltas)
    logger.info("effective config %s", canonical_json(effective_config(cfg)))
    return cfg


def domain_violations(cfg: ExperimentConfig,
                      deltas: Optional[Sequence[float]] = None) -> List[Tuple[str, str]]:
    violations: List[Tuple[str, str]] = []
    pot = None
    try:
        pot = build_potential(cfg.potential)
    except ValueError as exc:
        violations.append(("potential", str(exc)))
    try:
        build_kernel(cfg.kernel)
    except ValueError as exc:
        violations.append(("kernel", str(exc)))
    grid = list(deltas) if deltas else (cfg.experiment.delta_grid or [cfg.kernel.delta])
    reach = max(0.0 if pot is None or pot.is_null else pot.range, cfg.kernel.radius / min(grid))
    if cfg.box.L < 2.0 * reach:
        violations.append((
            "box.L",
            f"L={cfg.box.L} violates L >= 2*max(R, R_a/delta_min) = {2.0 * reach} "
            f"(delta_min={min(grid)})",
        ))
    for name, fields in (("experiment.fields", cfg.experiment.fields),
                         ("experiment.functional.fields", cfg.experiment.functional.fields)):
        for k, fc in enumerate(fields):
            if fc.center is not None and len(fc.center) != cfg.box.d:
                violations.append((f"{name}.{k}.center", f"needs {cfg.box.d} coordinates"))
            if fc.radius is not None and 2 * fc.radius > cfg.box.L:
                violations.append((f"{name}.{k}.radius", "bump radius exceeds half the box side"))
    fn = cfg.experiment.functional
    if fn.weights is not None and len(fn.weights) != max(1, len(fn.fields)):
        violations.append(("experiment.functional.weights", "needs one weight per field"))
    if len(fn.coefficients) > 5:
        violations.append(("experiment.functional.coefficients", "degree at most 4"))
    return violations


def effective_config(cfg: ExperimentConfig) -> Dict[str, Any]:
    return cfg.model_dump(mode="json")


def config_hash(cfg: ExperimentConfig) -> str:
    return generate_hash(canonical_json(effective_config(cfg)))


def provenance(cfg: ExperimentConfig) -> Provenance:
    return Provenance.from_config(effective_config(cfg), cfg.seed)


def output_directory(cfg: ExperimentConfig) -> str:
    """Configured output directory unless GIBBSDYN_OUTPUT_DIR overrides it."""
    return os.environ.get(OUTPUT_DIR_ENV) or cfg.output.directory


# -- builders ----------------------------------------------------------------

def build_box(cfg: ExperimentConfig) -> TorusBox:
    return TorusBox(cfg.box.d, cfg.box.L)


def build_potential(pc: PotentialConfig) -> PairPotential:
    if pc.shape == "ideal":
        return Ideal()
    if pc.shape == "square_well":
        return SquareWell(hard_core=pc.hard_core, range=pc.range, neighbor_cap=pc.neighbor_cap, depth=pc.depth)
    if pc.shape == "smooth_bump":
        return SmoothBump(hard_core=pc.hard_core, neighbor_cap=pc.neighbor_cap, amplitude=pc.amplitude,
                          center=pc.center, width=pc.width)
    return SoftRepulsive(hard_core=pc.hard_core, range=pc.range, neighbor_cap=pc.neighbor_cap,
                         amplitude=pc.amplitude)


def build_kernel(kc: KernelConfig) -> HopKernel:
    return HopKernel(kc.shape, kc.radius, kc.amplitude, kc.delta)


def build_rate_spec(cfg: ExperimentConfig) -> RateSpec:
    kc = cfg.kawasaki
    variant = KawasakiS(kc.s) if kc.variant == "s" else KawasakiUV(kc.u, kc.v)
    return RateSpec(variant, build_kernel(cfg.kernel), cfg.activity)


def build_glauber_spec(cfg: ExperimentConfig) -> GlauberSpec:
    return GlauberSpec(cfg.glauber.s, cfg.activity, cfg.glauber.alpha)


def build_diffusion_params(cfg: ExperimentConfig) -> DiffusionParams:
    dc = cfg.diffusion
    return DiffusionParams(dc.s, dc.mobility, dc.dt, dc.guard)


def build_gibbs_params(cfg: ExperimentConfig) -> GibbsParams:
    sc = cfg.sampler
    return GibbsParams(
        activity=cfg.activity,
        potential=build_potential(cfg.potential),
        box=build_box(cfg),
        move_mix=sc.move_mix,
        sweeps=sc.sweeps,
        burn_in=sc.burn_in,
        thinning=sc.thinning,
        seed=cfg.seed,
        displacement=sc.displacement,
    )


def build_field(fc: FieldConfig, box: TorusBox) -> TestField:
    """A single bump; center defaults to the box center, radius to L/4."""
    center = fc.center if fc.center is not None else [box.side / 2.0] * box.dim
    radius = fc.radius if fc.radius is not None else box.side / 4.0
    return TestField.bump(center, radius, fc.amplitude)


def build_fields(fields: Sequence[FieldConfig], box: TorusBox) -> List[TestField]:
    return [build_field(fc, box) for fc in (fields or [FieldConfig()])]


def build_functional(cfg: ExperimentConfig) -> CylinderFunctional:
    fn = cfg.experiment.functional
    box = build_box(cfg)
    fields = build_fields(fn.fields, box)
    weights = tuple(fn.weights) if fn.weights is not None else tuple([1.0] * len(fields))
    outer: OuterFunction
    if fn.outer == "exp":
        outer = Exponential(weights, fn.offset)
    elif fn.outer == "tanh":
        outer = Tanh(weights, fn.offset)
    else:
        outer = Polynomial(weights, fn.offset, tuple(fn.coefficients))
    return CylinderFunctional(tuple(fields), outer)
