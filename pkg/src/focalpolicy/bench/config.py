"""Sweep configuration: flat ``key = value`` text, repeated keys build lists."""

from __future__ import annotations

import os
from dataclasses import dataclass, field

from ..heuristics import KINDS

BASE_ALGORITHMS = ("wastar", "prefastar")
ALGORITHMS = BASE_ALGORITHMS + tuple(f"focal:{k}" for k in KINDS)


class ConfigError(ValueError):
    pass


def check_algorithm(name: str) -> str:
    if name in KINDS:
        name = f"focal:{name}"
    if name not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm {name!r}; valid: {', '.join(ALGORITHMS)}")
    return name


@dataclass
class ExperimentConfig:
    domain: str = "tile8"
    instances: int = 100
    instance_seed: int = 0
    full_space: bool = False
    instance_file: str | None = None
    opt_file: str | None = None
    algorithms: list = field(default_factory=lambda: ["wastar"])
    bounds: list = field(default_factory=lambda: [1.5])
    accuracies: list = field(default_factory=list)
    seeds: list = field(default_factory=lambda: [0])
    model: str | None = None
    model_acc: float = 0.875
    max_expansions: int = 10_000_000
    max_seconds: float = 300.0
    output: str | None = None
    wall_clock: bool = False
    workers: int = 1
    disc3_last_edge_only: bool = False

    @property
    def synthetic(self) -> bool:
        return self.model is None

    def worker_count(self) -> int:
        env = os.environ.get("POLICY_FOCAL_WORKERS")
        if env:
            try:
                return max(1, int(env))
            except ValueError:
                raise ConfigError(f"POLICY_FOCAL_WORKERS must be an integer, got {env!r}") from None
        return max(1, self.workers)


_LISTS = {"algorithm": "algorithms", "bound": "bounds", "accuracy": "accuracies", "seed": "seeds"}
_SCALARS = {
    "domain": str, "instances": int, "instance_seed": int, "full_space": "bool",
    "instance_file": str, "opt_file": str, "model": str, "model_acc": float,
    "max_expansions": int, "max_seconds": float, "output": str, "wall_clock": "bool",
    "workers": int, "disc3_last_edge_only": "bool",
}


def _bool(text: str) -> bool:
    low = text.lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def parse_config(text: str) -> ExperimentConfig:
    lists = {v: [] for v in _LISTS.values()}
    scalars = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        try:
            if key in _LISTS:
                if key == "algorithm":
                    lists["algorithms"].append(check_algorithm(value))
                elif key == "seed":
                    lists["seeds"].append(int(value))
                else:
                    lists[_LISTS[key]].append(float(value))
            elif key in _SCALARS:
                kind = _SCALARS[key]
                scalars[key] = _bool(value) if kind == "bool" else kind(value)
            else:
                valid = ", ".join(sorted(list(_LISTS) + list(_SCALARS)))
                raise ConfigError(f"line {lineno}: unknown key {key!r}; valid: {valid}")
        except ValueError as e:
            if isinstance(e, ConfigError):
                raise
            raise ConfigError(f"line {lineno}: bad value for {key}: {e}") from None
    cfg = ExperimentConfig(**scalars)
    for name, vals in lists.items():
        if vals:
            setattr(cfg, name, vals)
    validate(cfg)
    return cfg


def validate(cfg: ExperimentConfig):
    for a in cfg.algorithms:
        check_algorithm(a)
    if any(w < 1 for w in cfg.bounds):
        raise ConfigError("every bound must be >= 1")
    if cfg.synthetic:
        if not cfg.accuracies:
            raise ConfigError("synthetic sweeps need at least one 'accuracy' (or set 'model')")
        if any(not 0 <= a <= 1 for a in cfg.accuracies):
            raise ConfigError("accuracies must lie in [0, 1]")
    elif cfg.instance_file is None:
        raise ConfigError("learned-policy sweeps need an 'instance_file'")
    if cfg.instances < 1:
        raise ConfigError("instances must be positive")
