"""Per-command run configuration."""
import logging
import os
from dataclasses import asdict, dataclass, field

from wavessm.errors import ConfigError
from wavessm.writers import ensure_dir, read_json, write_json

log = logging.getLogger(__name__)

RUN_FILE = "run.json"


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)
    rng_seed: int = 0
    output_dir: str = "out"

    @classmethod
    def from_object(cls, obj, command, params=None):
        """Defaults from a Config-style object (OUTPUT_DIR, SEED)."""
        return cls(
            command=command,
            params=dict(params or {}),
            rng_seed=int(getattr(obj, "SEED", 0)),
            output_dir=getattr(obj, "OUTPUT_DIR", "out"),
        )

    def update(self, params, seed=None, output_dir=None):
        self.params.update(params)
        if seed is not None:
            self.rng_seed = int(seed)
        if output_dir is not None:
            self.output_dir = output_dir
        return self

    def path(self, name):
        return os.path.join(ensure_dir(self.output_dir), name)

    def write(self):
        target = self.path(RUN_FILE)
        write_json(target, asdict(self))
        log.debug("wrote %s", target)
        return target


def load_config_file(path, allowed):
    """Flat JSON document of parameters; keys outside `allowed` are rejected."""
    doc = read_json(path)
    if not isinstance(doc, dict):
        raise ConfigError({"<document is not an object>"})
    unknown = set(doc) - set(allowed)
    if unknown:
        raise ConfigError(unknown)
    return {k.replace("-", "_"): v for k, v in doc.items()}
