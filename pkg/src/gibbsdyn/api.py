from typing import Any, Dict, Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from . import __version__
from .config import BoxConfig, KawasakiConfig, KernelConfig, PotentialConfig, build_kernel, build_potential
from .errors import GibbsDynError
from .rates import KawasakiS, KawasakiUV, constants_summary
from .storage.models import canonical_json, generate_hash
from .verify.report import to_plain

app = FastAPI(title="gibbsdyn API", version=__version__)


class ConstantsRequest(BaseModel):
    box: BoxConfig = Field(default_factory=BoxConfig)
    potential: PotentialConfig = Field(default_factory=PotentialConfig)
    kernel: KernelConfig = Field(default_factory=KernelConfig)
    kawasaki: KawasakiConfig = Field(default_factory=KawasakiConfig)


class ConstantsResponse(BaseModel):
    B: float
    C: float
    z_threshold_1: Any
    z_threshold_2: Any
    nonnegative: bool
    kernel_l1_norm: float
    kernel_second_moment: float
    integrability: Dict[str, Any]


# Simple in-memory cache using dict for async-safe operations
_response_cache: Dict[str, Dict[str, Any]] = {}
_cache_max_size = 128


def _get_cache_key(request: ConstantsRequest) -> str:
    """Generate cache key from the canonical request."""
    return generate_hash(canonical_json(request.model_dump(mode="json")))


def _cache_get(key: str) -> Optional[Dict[str, Any]]:
    return _response_cache.get(key)


def _cache_set(key: str, value: Dict[str, Any]) -> None:
    """Set value in cache, evicting the oldest entry when full."""
    if len(_response_cache) >= _cache_max_size:
        oldest_key = next(iter(_response_cache))
        del _response_cache[oldest_key]
    _response_cache[key] = value


@app.post("/constants", response_model=ConstantsResponse)
async def constants_endpoint(request: ConstantsRequest):
    """Stability and integrability constants, activity thresholds and kernel moments."""
    cache_key = _get_cache_key(request)
    cached = _cache_get(cache_key)
    if cached is not None:
        return cached

    try:
        pot = build_potential(request.potential)
        kernel = build_kernel(request.kernel)
        kc = request.kawasaki
        variant = KawasakiS(kc.s) if kc.variant == "s" else KawasakiUV(kc.u, kc.v)
        summary = constants_summary(pot, kernel, request.box.d, {"kawasaki": variant})
    except (GibbsDynError, ValueError) as exc:
        raise HTTPException(status_code=422, detail=str(exc))

    result = to_plain(summary)
    _cache_set(cache_key, result)
    return result


@app.get("/health")
async def health_check():
    return {"status": "healthy", "version": __version__}


@app.get("/cache/stats")
async def cache_stats():
    return {
        "size": len(_response_cache),
        "max_size": _cache_max_size,
    }


@app.post("/cache/clear")
async def cache_clear():
    _response_cache.clear()
    return {"status": "cache cleared"}
