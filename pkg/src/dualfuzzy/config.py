"""Run configuration: a flat ``key = value`` text file plus command-line overrides.

Lines are ``key = value``; blank lines and lines starting with ``#`` are
ignored.  Every key must be one of :data:`FIELDS`.  The resolved configuration
is written next to each command's outputs as ``run_config.txt`` so any result
can be reproduced from its own directory.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from pathlib import Path

from .encoder import EmbedConfig
from .shapes.generator import GeneratorConfig
from .training import LossConfig

CONFIG_NAME = "run_config.txt"


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    # data
    dataset: str = ""
    category: str = "table"
    n_objects: int = 20
    variants: int = 3
    tau: float = 0.05
    seed: int = 0
    # encoder
    dim: int = 16
    points: int = 1024
    nonneg: str = "softplus"
    # training
    mode: str = "ranking"
    alpha: float = 0.05
    epochs: int = 200
    batch_size: int = 8
    lr: float = 1e-3
    decay_rate: float = 0.7
    decay_steps: int = 200_000
    eval_every: int = 0
    checkpoint_every: int = 0
    # retrieval / evaluation
    checkpoint: str = ""
    cap: int = 512
    k: int = 5
    label_k: int = 0  # 0 means 10% of the candidates
    # checks
    check_triples: int = 100_000
    check_dims: str = "2,16,100"
    check_draws: int = 100
    # runtime
    threads: int = 1
    out: str = ""

    def generator(self) -> GeneratorConfig:
        return GeneratorConfig(self.category, self.n_objects, self.variants, self.tau)

    def embed(self) -> EmbedConfig:
        return EmbedConfig(dim=self.dim, points=self.points, nonneg=self.nonneg, seed=self.seed)

    def loss(self) -> LossConfig:
        return LossConfig(mode=self.mode, alpha=self.alpha, epochs=self.epochs,
                          batch_size=self.batch_size, lr=self.lr, decay_rate=self.decay_rate,
                          decay_steps=self.decay_steps, seed=self.seed,
                          eval_every=self.eval_every, checkpoint_every=self.checkpoint_every)

    def dims(self) -> tuple:
        try:
            return tuple(int(d) for d in self.check_dims.split(",") if d.strip())
        except ValueError:
            raise ConfigError(f"check_dims must be comma-separated integers, got {self.check_dims!r}")

    def validate(self) -> "RunConfig":
        try:
            self.generator().validate()
            self.embed().validate()
            self.loss().validate()
        except ValueError as err:
            raise ConfigError(str(err)) from None
        for key in ("cap", "k", "check_triples", "check_draws", "threads"):
            if getattr(self, key) < 1:
                raise ConfigError(f"{key} must be at least 1")
        if self.label_k < 0:
            raise ConfigError("label_k must be nonnegative")
        self.dims()
        return self

    def to_text(self) -> str:
        """Serialized form; ``out`` is omitted since the file lives in that directory."""
        return "".join(f"{k} = {v}\n" for k, v in asdict(self).items() if k != "out")


FIELDS = {f.name: f.type for f in fields(RunConfig)}
_CASTS = {"int": int, "float": float, "str": str}


def _coerce(key: str, raw: str):
    if key not in FIELDS:
        raise ConfigError(f"unknown config key {key!r}")
    cast = _CASTS[FIELDS[key]]
    try:
        return cast(raw.strip())
    except ValueError:
        raise ConfigError(f"{key}: cannot read {raw.strip()!r} as {FIELDS[key]}") from None


def parse_pairs(lines, source: str = "config") -> dict:
    values = {}
    for lineno, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, raw = line.split("=", 1)
        values[key.strip()] = _coerce(key.strip(), raw)
    return values


def load_config(path=None, overrides=None) -> RunConfig:
    """Defaults, then the file at ``path``, then ``overrides`` (a dict or ``key=value`` strings)."""
    values = {}
    if path:
        try:
            text = Path(path).read_text(encoding="utf-8")
        except FileNotFoundError:
            raise ConfigError(f"config file {path} not found") from None
        values.update(parse_pairs(text.splitlines(), str(path)))
    if isinstance(overrides, dict):
        values.update({k: _coerce(k, str(v)) for k, v in overrides.items()})
    elif overrides:
        values.update(parse_pairs(overrides, "--set"))
    return RunConfig(**values)


def write_config(config: RunConfig, directory) -> Path:
    path = Path(directory) / CONFIG_NAME
    path.write_text(config.to_text(), encoding="utf-8")
    return path
