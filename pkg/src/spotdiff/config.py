"""Run configuration: every generation, strategy and split knob in one validated record."""
from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import yaml

from .qsim import QuestionerConfig
from .scene import SceneConfig


class ConfigError(ValueError):
    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


@dataclass(frozen=True)
class RunConfig:
    n_pairs: int = 100
    seed: int = 0
    sample_points: int = 100
    min_gap: float = 0.3
    max_divergence: int = 3
    extreme_gate: int = 5
    refer_gate: int = 4
    max_rounds: int = 10
    min_objects: int = 8
    max_objects: int = 15
    epsilon: float = 0.0
    hint_prob: float = 0.5
    diff_category_prob: float = 0.5
    split_ratios: tuple[float, float, float] = (0.8, 0.1, 0.1)
    retry_budget: int = 50
    # not part of the config hash: moving the output must not change the data
    out_dir: str = field(default="spotdiff_out", compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "split_ratios", tuple(self.split_ratios))
        self.validate()

    def validate(self) -> None:
        def need(ok: bool, name: str, msg: str) -> None:
            if not ok:
                raise ConfigError(name, msg)

        for name in ("n_pairs", "seed", "sample_points", "max_divergence", "extreme_gate", "refer_gate",
                     "max_rounds", "min_objects", "max_objects", "retry_budget"):
            v = getattr(self, name)
            need(isinstance(v, int) and not isinstance(v, bool), name, f"expected an integer, got {v!r}")
        need(self.n_pairs >= 1, "n_pairs", "must be at least 1")
        need(self.seed >= 0, "seed", "must be non-negative")
        need(self.sample_points >= 1, "sample_points", "must be at least 1")
        need(self.min_gap >= 0, "min_gap", "must be non-negative")
        need(self.max_divergence >= 0, "max_divergence", "must be non-negative")
        need(self.max_rounds >= 1, "max_rounds", "must be at least 1")
        need(1 <= self.min_objects <= self.max_objects, "min_objects", "need 1 <= min_objects <= max_objects")
        need(self.retry_budget >= 1, "retry_budget", "must be at least 1")
        for name in ("epsilon", "hint_prob", "diff_category_prob"):
            v = getattr(self, name)
            need(isinstance(v, (int, float)) and 0.0 <= v <= 1.0, name, f"must lie in [0, 1], got {v!r}")
        r = self.split_ratios
        need(len(r) == 3 and all(isinstance(x, (int, float)) and x >= 0 for x in r),
             "split_ratios", "expected three non-negative numbers")
        need(abs(sum(r) - 1.0) < 1e-9, "split_ratios", f"must sum to 1, got {sum(r)}")

    # --- derived configs -------------------------------------------------

    def scene_config(self) -> SceneConfig:
        return SceneConfig(min_objects=self.min_objects, max_objects=self.max_objects,
                           sample_points=self.sample_points, min_gap=self.min_gap,
                           max_divergence=self.max_divergence, retry_budget=self.retry_budget,
                           diff_category_prob=self.diff_category_prob)

    def questioner_config(self) -> QuestionerConfig:
        return QuestionerConfig(extreme_gate=self.extreme_gate, refer_gate=self.refer_gate, hint_prob=self.hint_prob)

    # --- (de)serialisation -----------------------------------------------

    def to_dict(self, with_output: bool = True) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        d["split_ratios"] = list(self.split_ratios)
        if not with_output:
            del d["out_dir"]
        return d

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(with_output=False), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def replace(self, **changes: Any) -> "RunConfig":
        return dataclasses.replace(self, **changes)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        for k in d:
            if k not in known:
                raise ConfigError(k, "unknown field")
        try:
            return cls(**d)
        except TypeError as e:
            raise ConfigError("config", str(e)) from None

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        text = Path(path).read_text()
        try:
            data = json.loads(text) if str(path).endswith(".json") else yaml.safe_load(text)
        except (json.JSONDecodeError, yaml.YAMLError) as e:
            raise ConfigError("config", f"cannot parse {path}: {e}") from None
        if data is None:
            data = {}
        if not isinstance(data, dict):
            raise ConfigError("config", "top level must be a mapping")
        return cls.from_dict(data)
