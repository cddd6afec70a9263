from __future__ import annotations

import torch
from torch import nn

from src.modules.numcore import concat, embedding_lookup

DAYS_PER_WEEK = 7


class StreamEmbedding(nn.Module):
    """
    Embeds one input stream (macro or micro) into hidden_dim channels:
    projected features | day-of-week | time-of-day | adaptive (step, segment) embedding.
    """

    def __init__(
        self,
        feature_dim: int,
        input_dim: int,
        dow_dim: int,
        tod_dim: int,
        adaptive_dim: int,
        history: int,
        num_segments: int,
        steps_per_day: int,
    ):
        super().__init__()
        self.projection = nn.Linear(feature_dim, input_dim)
        self.dow_table = nn.Parameter(torch.empty(DAYS_PER_WEEK, dow_dim))
        self.tod_table = nn.Parameter(torch.empty(steps_per_day, tod_dim))
        self.adaptive = nn.Parameter(torch.empty(history, num_segments, adaptive_dim))
        for table in (self.dow_table, self.tod_table, self.adaptive):
            if table.numel():
                nn.init.xavier_uniform_(table)

    def forward(self, features: torch.Tensor, tod: torch.Tensor, dow: torch.Tensor) -> torch.Tensor:
        """features B×H×N×c, tod/dow B×H -> B×H×N×hidden_dim."""
        batch, history, segments, _ = features.shape
        parts = [self.projection(features)]
        if self.dow_table.shape[1]:
            dow_emb = embedding_lookup(self.dow_table, dow)
            parts.append(dow_emb.unsqueeze(2).expand(batch, history, segments, -1))
        if self.tod_table.shape[1]:
            tod_emb = embedding_lookup(self.tod_table, tod)
            parts.append(tod_emb.unsqueeze(2).expand(batch, history, segments, -1))
        if self.adaptive.shape[2]:
            parts.append(self.adaptive.expand(batch, -1, -1, -1))
        return concat(parts)
