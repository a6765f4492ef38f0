import hashlib
import json
from dataclasses import dataclass
from typing import Any, Dict

from .. import __version__


def generate_hash(content: str) -> str:
    """Generate SHA256 hash for content."""
    return hashlib.sha256(content.encode()).hexdigest()


def canonical_json(data: Dict[str, Any]) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


@dataclass(frozen=True)
class Provenance:
    """Version, config hash and seed stamped on every artifact."""
    config_hash: str
    seed: int
    version: str = __version__

    @classmethod
    def from_config(cls, effective: Dict[str, Any], seed: int) -> "Provenance":
        return cls(generate_hash(canonical_json(effective)), int(seed))

    def header(self) -> str:
        return f"# gibbsdyn {self.version} config={self.config_hash} seed={self.seed}"

    def to_dict(self) -> Dict[str, Any]:
        return {"version": self.version, "config": self.config_hash, "seed": self.seed}
