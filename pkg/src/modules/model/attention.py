from __future__ import annotations

import math

import torch
from torch import nn

from src.modules.numcore import ShapeError, bmm, dropout, softmax, transpose


class MultiHeadAttention(nn.Module):
    """
    Scaled dot-product attention along the third axis of B×G×L×D inputs.

    Queries come from `query`, keys and values from `source`; the head outputs are
    concatenated and projected. Scores are returned as B×heads×G×L_q×L_k.
    """

    def __init__(self, hidden_dim: int, num_heads: int, dropout_p: float = 0.0):
        super().__init__()
        if hidden_dim % num_heads:
            raise ValueError(f"hidden_dim {hidden_dim} not divisible by {num_heads} heads")
        self.num_heads = num_heads
        self.head_dim = hidden_dim // num_heads
        self.dropout_p = dropout_p

        self.q_proj = nn.Linear(hidden_dim, hidden_dim)
        self.k_proj = nn.Linear(hidden_dim, hidden_dim)
        self.v_proj = nn.Linear(hidden_dim, hidden_dim)
        self.out_proj = nn.Linear(hidden_dim, hidden_dim)

    def _split(self, x: torch.Tensor) -> torch.Tensor:
        b, g, length, _ = x.shape
        # B×G×L×D -> B×heads×G×L×head_dim
        return x.view(b, g, length, self.num_heads, self.head_dim).permute(0, 3, 1, 2, 4)

    def forward(
        self,
        query: torch.Tensor,
        source: torch.Tensor,
        generator: torch.Generator | None = None,
    ) -> tuple[torch.Tensor, torch.Tensor]:
        if query.dim() != 4 or query.shape[:2] != source.shape[:2] or query.shape[3] != source.shape[3]:
            raise ShapeError("attention", query.shape, source.shape)

        q = self._split(self.q_proj(query))
        k = self._split(self.k_proj(source))
        v = self._split(self.v_proj(source))

        scores = bmm(q, transpose(k)) / math.sqrt(self.head_dim)
        probs = softmax(scores, dim=-1)
        attended = bmm(dropout(probs, self.dropout_p, generator, self.training), v)

        b, _, g, length, _ = attended.shape
        merged = attended.permute(0, 2, 3, 1, 4).reshape(b, g, length, -1)
        return self.out_proj(merged), probs
