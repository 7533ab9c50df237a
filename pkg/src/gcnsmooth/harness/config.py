"""Experiment configuration, loaded from JSON with snake_case keys."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from ..errors import ConfigError
from ..synth import GraphRecipe


@dataclass
class ExperimentConfig:
    recipe: GraphRecipe = field(default_factory=lambda: GraphRecipe("latent"))
    alphas: list = field(default_factory=lambda: [0.1, 1.0, 5.0])
    sigma: float = 1.0
    L_max: int = 10
    replicates: int = 20
    train: float = 0.2
    validation: float = 0.2
    seed: int = 0
    estimators: list = field(default_factory=lambda: ["refit", "local_avg"])
    kinds: list = field(default_factory=lambda: ["S", "T"])
    w_grid: list = field(default_factory=lambda: [0.0, 0.25, 0.5, 0.75, 1.0])
    attachments: list = field(default_factory=lambda: ["level_edges(2,3)", "star(10)", "clique(10)", "cycle(4)"])
    splits: int = 50
    train_size: int = 500
    validation_size: int = 500
    output: Optional[str] = None
    plot: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if not 0 < self.train + self.validation <= 1 or self.train < 0 or self.validation <= 0:
            raise ConfigError(f"invalid split fractions train={self.train}, validation={self.validation}")
        if self.L_max < 1:
            raise ConfigError(f"L_max must be >= 1, got {self.L_max}")
        if self.replicates < 1:
            raise ConfigError(f"replicates must be >= 1, got {self.replicates}")
        if self.sigma < 0:
            raise ConfigError(f"sigma must be >= 0, got {self.sigma}")
        if self.splits < 1:
            raise ConfigError(f"splits must be >= 1, got {self.splits}")
        bad = [k for k in self.kinds if k not in ("S", "T")]
        if bad:
            raise ConfigError(f"unknown kinds {bad}")
        for name in self.estimators:
            parse_estimator(name)

    @property
    def graph_seed(self) -> int:
        return self.seed if self.recipe.seed is None else self.recipe.seed

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["recipe"] = {
            "family": self.recipe.family,
            "params": dict(self.recipe.params),
            "seed": self.recipe.seed,
            "spectral_columns": list(self.recipe.spectral_columns),
        }
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(d) - names
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        if "recipe" in d:
            r = d["recipe"]
            if isinstance(r, dict):
                r = dict(r)
                r.setdefault("seed", None)
                if "spectral_columns" in r:
                    r["spectral_columns"] = tuple(r["spectral_columns"])
                d["recipe"] = GraphRecipe(**r)
        return cls(**d)


def parse_estimator(name: str) -> tuple[str, Optional[float]]:
    """``"refit"`` -> ("gcn", None); ``"W=0.5"`` -> ("gcn", 0.5); ``"local_avg"``."""
    if name == "local_avg":
        return "local_avg", None
    if name == "refit":
        return "gcn", None
    if name.startswith("W="):
        try:
            return "gcn", float(name[2:])
        except ValueError:
            pass
    raise ConfigError(f"unknown estimator {name!r}; use 'refit', 'W=<value>' or 'local_avg'")


def load_config(path: Optional[str]) -> ExperimentConfig:
    if path is None:
        return ExperimentConfig()
    with open(Path(path)) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    return ExperimentConfig.from_dict(raw)
