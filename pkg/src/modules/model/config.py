from __future__ import annotations

from dataclasses import asdict, dataclass, fields, replace
from typing import Any

from src.helpers.errors import ConfigError
from src.modules.features import MACRO_FIELDS, MICRO_FIELDS

DEFAULT_LAYERS = 3


@dataclass(frozen=True)
class ModelConfig:
    """
    Architecture and ablation switches.

    `num_blocks` is accepted as a synonym of `num_layers`: both name the number of
    stacked spatial and temporal layers.
    """

    num_segments: int
    history: int = 12
    horizon: int = 12
    input_dim: int = 24
    dow_dim: int = 2
    tod_dim: int = 2
    adaptive_dim: int = 80
    num_layers: int | None = None
    num_blocks: int | None = None
    num_heads: int = 4
    dropout: float = 0.1
    steps_per_day: int = 192
    feed_forward_dim: int | None = None
    use_feed_forward: bool = True
    use_spatial: bool = True
    use_temporal: bool = True
    use_cross_attention: bool = True
    use_micro: bool = True
    micro_feature_mask: tuple[bool, ...] = (True,) * len(MICRO_FIELDS)
    input_residual: bool = True
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "micro_feature_mask", tuple(bool(m) for m in self.micro_feature_mask))
        layers, blocks = self.num_layers, self.num_blocks
        if layers is not None and blocks is not None and layers != blocks:
            raise ConfigError(f"num_blocks={blocks} conflicts with num_layers={layers}")
        resolved = layers if layers is not None else blocks if blocks is not None else DEFAULT_LAYERS
        object.__setattr__(self, "num_layers", resolved)
        object.__setattr__(self, "num_blocks", resolved)
        if self.feed_forward_dim is None:
            object.__setattr__(self, "feed_forward_dim", 4 * self.hidden_dim)

        if self.num_segments < 1:
            raise ConfigError(f"num_segments must be >= 1, got {self.num_segments}")
        if self.history < 1 or self.horizon < 1:
            raise ConfigError("history and horizon must be >= 1")
        if min(self.input_dim, self.dow_dim, self.tod_dim, self.adaptive_dim) < 0 or self.input_dim < 1:
            raise ConfigError("Embedding dimensions must be non-negative and input_dim >= 1")
        if self.num_layers < 1:
            raise ConfigError(f"num_layers must be >= 1, got {self.num_layers}")
        if self.num_heads < 1 or self.hidden_dim % self.num_heads:
            raise ConfigError(
                f"hidden_dim {self.hidden_dim} is not divisible by num_heads {self.num_heads}"
            )
        if not 0.0 <= self.dropout < 1.0:
            raise ConfigError(f"dropout must be in [0, 1), got {self.dropout}")
        if self.steps_per_day < 1:
            raise ConfigError("steps_per_day must be >= 1")
        if len(self.micro_feature_mask) != len(MICRO_FIELDS):
            raise ConfigError(f"micro_feature_mask needs {len(MICRO_FIELDS)} flags")

    @property
    def hidden_dim(self) -> int:
        return self.input_dim + self.dow_dim + self.tod_dim + self.adaptive_dim

    @property
    def head_dim(self) -> int:
        return self.hidden_dim // self.num_heads

    @property
    def macro_dim(self) -> int:
        return len(MACRO_FIELDS)

    @property
    def micro_dim(self) -> int:
        return len(MICRO_FIELDS)

    def with_overrides(self, **overrides) -> ModelConfig:
        if "num_layers" in overrides and "num_blocks" not in overrides:
            overrides["num_blocks"] = None
        if "num_blocks" in overrides and "num_layers" not in overrides:
            overrides["num_layers"] = None
        dims = {"input_dim", "dow_dim", "tod_dim", "adaptive_dim"}
        if dims & set(overrides) and "feed_forward_dim" not in overrides:
            overrides["feed_forward_dim"] = None
        return replace(self, **overrides)

    def to_dict(self) -> dict[str, Any]:
        data = asdict(self)
        data["micro_feature_mask"] = list(self.micro_feature_mask)
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> ModelConfig:
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"Unknown model config keys: {unknown}")
        return cls(**data)


# Architecture variants compared by the ablation study
ABLATION_VARIANTS: dict[str, dict[str, Any]] = {
    "full": {},
    "w/o temporal": {"use_temporal": False},
    "w/o spatial": {"use_spatial": False},
    "w/o cross-attention": {"use_cross_attention": False},
    "w/o micro": {"use_micro": False},
}


def feature_removal_variants() -> dict[str, dict[str, Any]]:
    """One variant per micro feature, with only that feature masked out."""
    variants = {}
    for k, name in enumerate(MICRO_FIELDS):
        mask = [True] * len(MICRO_FIELDS)
        mask[k] = False
        variants[f"w/o {name}"] = {"micro_feature_mask": tuple(mask)}
    return variants
