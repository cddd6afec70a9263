from __future__ import annotations

import torch
from torch import nn

from src.modules.numcore import ShapeError, concat, dropout, layer_norm, relu
from .attention import MultiHeadAttention
from .config import ModelConfig

SPATIAL = "spatial"
TEMPORAL = "temporal"


class MacroMicroLayer(nn.Module):
    """
    One macro-micro attention layer along the segment axis (spatial) or the
    time axis (temporal).

    Self-attention mixes the macro stream; cross-attention then lets each macro
    query attend to the micro stream. The two are summed (plus the layer input
    when `input_residual`) and layer-normed, then passed through an optional
    feed-forward sublayer with its own residual and norm.
    """

    def __init__(self, config: ModelConfig, axis: str):
        super().__init__()
        if axis not in (SPATIAL, TEMPORAL):
            raise ValueError(f"Unknown attention axis {axis}")
        self.axis = axis
        self.config = config
        hidden = config.hidden_dim

        self.self_attention = MultiHeadAttention(hidden, config.num_heads, config.dropout)
        self.cross_attention = None
        self.fusion = None
        if config.use_micro and config.use_cross_attention:
            self.cross_attention = MultiHeadAttention(hidden, config.num_heads, config.dropout)
        elif config.use_micro:
            self.fusion = nn.Linear(2 * hidden, hidden)
        self.norm = nn.LayerNorm(hidden)

        self.feed_forward = None
        if config.use_feed_forward:
            self.feed_forward = nn.Sequential(
                nn.Linear(hidden, config.feed_forward_dim),
                nn.Linear(config.feed_forward_dim, hidden),
            )
            self.ff_norm = nn.LayerNorm(hidden)

    def _to_axis(self, z: torch.Tensor) -> torch.Tensor:
        # Attention runs over dim 2: segments for spatial, steps for temporal
        return z if self.axis == SPATIAL else z.transpose(1, 2)

    def forward(
        self,
        z_macro: torch.Tensor,
        z_micro: torch.Tensor | None,
        generator: torch.Generator | None = None,
    ) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor | None]:
        """
        B×H×N×D in, B×H×N×D out, plus the self and cross scores
        (B×heads×H×N×N spatial, B×heads×N×H×H temporal).
        """
        if z_micro is not None and z_micro.shape != z_macro.shape:
            raise ShapeError(f"{self.axis} layer", z_macro.shape, z_micro.shape)
        p, training = self.config.dropout, self.training

        x = self._to_axis(z_macro)
        z_self, self_scores = self.self_attention(x, x, generator)
        z_self = dropout(z_self, p, generator, training)

        fused = z_self
        cross_scores = None
        if z_micro is not None and self.cross_attention is not None:
            z_cross, cross_scores = self.cross_attention(z_self, self._to_axis(z_micro), generator)
            fused = fused + dropout(z_cross, p, generator, training)
        elif z_micro is not None and self.fusion is not None:
            z_cross = self.fusion(concat([z_self, self._to_axis(z_micro)]))
            fused = fused + dropout(z_cross, p, generator, training)
        if self.config.input_residual:
            fused = fused + x

        out = layer_norm(fused, self.norm.weight, self.norm.bias, self.norm.eps)
        if self.feed_forward is not None:
            hidden = relu(self.feed_forward[0](out))
            ff = dropout(self.feed_forward[1](hidden), p, generator, training)
            out = layer_norm(out + ff, self.ff_norm.weight, self.ff_norm.bias, self.ff_norm.eps)

        return self._to_axis(out), self_scores, cross_scores
