from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from src.logger import CustomLogger
from src.modules.features import WindowSet
from src.modules.numcore import DTYPE, softplus
from src.modules.objective.data import TDistForecast
from .config import ModelConfig
from .embedding import StreamEmbedding
from .layers import SPATIAL, TEMPORAL, MacroMicroLayer
from .scores import AttentionScores

logger = CustomLogger("model").get_logger()

MIN_DF = 2.0


@dataclass
class ModelBatch:
    """Model inputs: macro B×H×N×2, micro B×H×N×7, tod/dow B×H."""

    macro: torch.Tensor
    micro: torch.Tensor
    tod: torch.Tensor
    dow: torch.Tensor

    def __len__(self) -> int:
        return self.macro.shape[0]

    @classmethod
    def from_windows(cls, windows: WindowSet, indices=None) -> ModelBatch:
        if indices is None:
            indices = np.arange(len(windows))
        indices = np.asarray(indices, dtype=np.int64)
        return cls(
            macro=torch.as_tensor(windows.macro[indices], dtype=DTYPE),
            micro=torch.as_tensor(windows.micro[indices], dtype=DTYPE),
            tod=torch.as_tensor(windows.tod_index[indices], dtype=torch.long),
            dow=torch.as_tensor(windows.dow_index[indices], dtype=torch.long),
        )


def batch_targets(windows: WindowSet, indices=None) -> torch.Tensor:
    """Targets laid out B×N×F like the forecast."""
    target = windows.target if indices is None else windows.target[np.asarray(indices, dtype=np.int64)]
    return torch.as_tensor(target, dtype=DTYPE).transpose(1, 2)


@dataclass
class ForwardOutput:
    forecast: TDistForecast
    scores: AttentionScores


class MMCAformer(nn.Module):
    """
    Macro-micro cross-attention forecaster.

    embed both streams -> L spatial layers -> L temporal layers -> per-segment
    flatten of H×D -> mean, variance and degrees-of-freedom heads over F steps.
    The micro embedding is computed once and shared by every layer.
    """

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config

        # Initialization draws from a private seeded stream
        with torch.random.fork_rng(devices=[]):
            torch.manual_seed(config.seed)
            embed_args = (
                config.input_dim,
                config.dow_dim,
                config.tod_dim,
                config.adaptive_dim,
                config.history,
                config.num_segments,
                config.steps_per_day,
            )
            self.macro_embedding = StreamEmbedding(config.macro_dim, *embed_args)
            self.micro_embedding = StreamEmbedding(config.micro_dim, *embed_args) if config.use_micro else None

            layers = config.num_layers
            self.spatial_layers = nn.ModuleList(
                MacroMicroLayer(config, SPATIAL) for _ in range(layers if config.use_spatial else 0)
            )
            self.temporal_layers = nn.ModuleList(
                MacroMicroLayer(config, TEMPORAL) for _ in range(layers if config.use_temporal else 0)
            )

            flat = config.history * config.hidden_dim
            self.mean_head = nn.Linear(flat, config.horizon)
            self.variance_head = nn.Linear(flat, config.horizon)
            self.df_head = nn.Linear(flat, config.horizon)

        self.register_buffer(
            "micro_mask", torch.tensor(config.micro_feature_mask, dtype=DTYPE), persistent=False
        )
        self.to(DTYPE)
        self.dropout_generator = torch.Generator().manual_seed(config.seed)

        logger.info(f"Built MMCAformer with {self.parameter_count():,} parameters")

    def parameter_count(self) -> int:
        return sum(p.numel() for p in self.parameters())

    def reseed_dropout(self, seed: int):
        self.dropout_generator.manual_seed(seed)

    def embed(self, batch: ModelBatch) -> tuple[torch.Tensor, torch.Tensor | None]:
        steps = self.config.steps_per_day
        if batch.tod.numel() and int(batch.tod.max()) >= steps:
            raise ValueError(f"tod_index {int(batch.tod.max())} exceeds steps_per_day {steps}")
        z_macro = self.macro_embedding(batch.macro, batch.tod, batch.dow)
        z_micro = None
        if self.micro_embedding is not None:
            z_micro = self.micro_embedding(batch.micro * self.micro_mask, batch.tod, batch.dow)
        return z_macro, z_micro

    def forward(self, batch: ModelBatch, train: bool | None = None) -> ForwardOutput:
        if train is not None:
            self.train(train)
        z, z_micro = self.embed(batch)
        scores = AttentionScores()
        generator = self.dropout_generator

        for layer in self.spatial_layers:
            z, self_scores, cross_scores = layer(z, z_micro, generator)
            scores.spatial_self.append(self_scores)
            if cross_scores is not None:
                scores.spatial_cross.append(cross_scores)
        for layer in self.temporal_layers:
            z, self_scores, cross_scores = layer(z, z_micro, generator)
            scores.temporal_self.append(self_scores)
            if cross_scores is not None:
                scores.temporal_cross.append(cross_scores)

        b, h, n, d = z.shape
        flat = z.permute(0, 2, 1, 3).reshape(b, n, h * d)
        forecast = TDistForecast(
            mean=self.mean_head(flat),
            variance=softplus(self.variance_head(flat)),
            df=softplus(self.df_head(flat)) + MIN_DF,
        )
        return ForwardOutput(forecast, scores)
