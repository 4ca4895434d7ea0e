"""Run configuration: one JSON file per run."""

import json
from dataclasses import asdict, dataclass, field, fields
from typing import Optional

from .errors import ConfigurationError
from .flow import StepPolicy
from .initial import InitialDatum
from .spectral import check_nodes


@dataclass(frozen=True)
class OutputPolicy:
    """Where and what a run writes.

    Files go to ``<root>/<name>``; the environment variable APEF_OUT_DIR
    replaces `root`. ``snapshot_stride = 0`` keeps only the first and last
    curve; ``write = False`` keeps everything in memory.
    """

    root: str = "runs"
    csv: str = "diagnostics.csv"
    snapshot_stride: int = 0
    svg: bool = False
    normalize_translation: bool = True
    write: bool = True

    def __post_init__(self):
        if self.snapshot_stride < 0:
            raise ConfigurationError("snapshot_stride must be >= 0")


@dataclass(frozen=True)
class Stopping:
    eps_stat: float = 1e-6
    max_steps: Optional[int] = None

    def __post_init__(self):
        if not self.eps_stat > 0:
            raise ConfigurationError("eps_stat must be positive")
        if self.max_steps is not None and self.max_steps < 0:
            raise ConfigurationError("max_steps must be >= 0")


@dataclass(frozen=True)
class RunConfig:
    lam: float
    n: int
    t_end: float
    initial: InitialDatum
    policy: StepPolicy = field(default_factory=StepPolicy)
    outputs: OutputPolicy = field(default_factory=OutputPolicy)
    stopping: Stopping = field(default_factory=Stopping)
    seed: int = 0
    name: str = "run"

    def __post_init__(self):
        if not self.lam >= 0:
            raise ConfigurationError(f"lambda must be >= 0, got {self.lam}")
        check_nodes(self.n)
        if not self.t_end > 0:
            raise ConfigurationError("t_end must be positive")

    def to_dict(self):
        return {
            "name": self.name,
            "lambda": self.lam,
            "n": self.n,
            "t_end": self.t_end,
            "seed": self.seed,
            "initial": self.initial.to_dict(),
            "policy": asdict(self.policy),
            "outputs": asdict(self.outputs),
            "stopping": asdict(self.stopping),
        }

    @classmethod
    def from_dict(cls, obj):
        if not isinstance(obj, dict):
            raise ConfigurationError("config must be a JSON object")
        obj = dict(obj)
        known = {"name", "lambda", "n", "t_end", "seed", "initial", "policy", "outputs", "stopping"}
        extra = set(obj) - known
        if extra:
            raise ConfigurationError(f"unknown config keys: {sorted(extra)}")
        for key in ("lambda", "n", "t_end", "initial"):
            if key not in obj:
                raise ConfigurationError(f"config is missing {key!r}")
        return cls(
            lam=float(obj["lambda"]),
            n=_int(obj["n"], "n"),
            t_end=float(obj["t_end"]),
            initial=InitialDatum.from_dict(obj["initial"]),
            policy=_sub(StepPolicy, obj.get("policy", {}), "policy"),
            outputs=_sub(OutputPolicy, obj.get("outputs", {}), "outputs"),
            stopping=_sub(Stopping, obj.get("stopping", {}), "stopping"),
            seed=_int(obj.get("seed", 0), "seed"),
            name=str(obj.get("name", "run")),
        )

    def dumps(self):
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def loads(cls, text):
        try:
            obj = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config is not valid JSON: {exc}") from None
        return cls.from_dict(obj)

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.dumps())

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.loads(fh.read())


def _int(value, name):
    if isinstance(value, bool) or int(value) != value:
        raise ConfigurationError(f"{name} must be an integer")
    return int(value)


def _sub(kind, obj, name):
    if not isinstance(obj, dict):
        raise ConfigurationError(f"{name} must be an object")
    names = {f.name for f in fields(kind)}
    extra = set(obj) - names
    if extra:
        raise ConfigurationError(f"unknown {name} keys: {sorted(extra)}")
    try:
        return kind(**obj)
    except TypeError as exc:
        raise ConfigurationError(f"bad {name}: {exc}") from None
