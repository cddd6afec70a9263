from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd
import torch

from src.helpers.math import Range

SCORE_COLUMNS = ("layer", "kind", "head", "axis_index", "query", "key", "score")
SCORE_KINDS = ("spatial_self", "spatial_cross", "temporal_self", "temporal_cross")

# Traffic condition of a segment by its observed speed (mph)
TRAFFIC_CONDITIONS = {
    "congested": Range(0.0, 40.0),
    "medium": Range(40.0, 55.0),
    "free_flow": Range(55.0, float("inf")),
}


@dataclass
class AttentionScores:
    """
    Attention probabilities per layer. Spatial entries are B×heads×H×N×N,
    temporal entries B×heads×N×H×H. Cross lists are empty when the micro
    stream or cross-attention is disabled.
    """

    spatial_self: list[torch.Tensor] = field(default_factory=list)
    spatial_cross: list[torch.Tensor] = field(default_factory=list)
    temporal_self: list[torch.Tensor] = field(default_factory=list)
    temporal_cross: list[torch.Tensor] = field(default_factory=list)

    def items(self):
        for kind in SCORE_KINDS:
            for layer, scores in enumerate(getattr(self, kind)):
                yield kind, layer, scores


class ScoreAccumulator:
    """Running mean of attention scores over windows."""

    def __init__(self):
        self.sums: dict[tuple[str, int], np.ndarray] = {}
        self.count = 0

    def add(self, scores: AttentionScores):
        batch = None
        for kind, layer, s in scores.items():
            batch = s.shape[0]
            total = s.detach().sum(dim=0).numpy()
            key = (kind, layer)
            self.sums[key] = self.sums[key] + total if key in self.sums else total
        if batch is not None:
            self.count += batch

    def mean(self) -> dict[tuple[str, int], np.ndarray]:
        return {k: v / max(self.count, 1) for k, v in self.sums.items()}


def scores_frame(mean_scores: dict[tuple[str, int], np.ndarray], segment_ids: list[str]) -> pd.DataFrame:
    """
    Long table `layer,kind,head,axis_index,query,key,score`.

    Spatial rows index time steps on `axis_index` and name segments as query/key;
    temporal rows index segments on `axis_index` and use step numbers as query/key.
    """
    frames = []
    for (kind, layer), scores in sorted(mean_scores.items()):
        heads, axis, q, k = scores.shape
        h_idx, a_idx, q_idx, k_idx = np.indices(scores.shape).reshape(4, -1)
        if kind.startswith("spatial"):
            axis_labels = a_idx
            query = np.asarray(segment_ids, dtype=object)[q_idx]
            key = np.asarray(segment_ids, dtype=object)[k_idx]
        else:
            axis_labels = np.asarray(segment_ids, dtype=object)[a_idx]
            query, key = q_idx, k_idx
        frames.append(
            pd.DataFrame(
                {
                    "layer": layer,
                    "kind": kind,
                    "head": h_idx,
                    "axis_index": axis_labels,
                    "query": query,
                    "key": key,
                    "score": scores.ravel(),
                }
            )
        )
    if not frames:
        return pd.DataFrame(columns=list(SCORE_COLUMNS))
    return pd.concat(frames, ignore_index=True)


def write_scores(path: Path, mean_scores, segment_ids: list[str]) -> None:
    scores_frame(mean_scores, segment_ids).to_csv(path, index=False, lineterminator="\n")


@dataclass
class ConditionAttention:
    """Cross-attention received by segments, summed per traffic condition."""

    sums: dict[str, float] = field(default_factory=lambda: {c: 0.0 for c in TRAFFIC_CONDITIONS})
    counts: dict[str, int] = field(default_factory=lambda: {c: 0 for c in TRAFFIC_CONDITIONS})

    def merge(self, other: ConditionAttention) -> ConditionAttention:
        for c in TRAFFIC_CONDITIONS:
            self.sums[c] += other.sums[c]
            self.counts[c] += other.counts[c]
        return self

    def means(self) -> dict[str, float | None]:
        return {c: (self.sums[c] / self.counts[c] if self.counts[c] else None) for c in TRAFFIC_CONDITIONS}


def cross_attention_by_condition(
    spatial_cross: list[torch.Tensor], speeds_mph: torch.Tensor
) -> ConditionAttention:
    """
    Attention each segment's micro features receive from all macro queries,
    relative to uniform attention (1.0 = uniform), grouped by that segment's
    observed speed at the same step.

    spatial_cross: per layer B×heads×H×N×N; speeds_mph: B×H×N.
    """
    result = ConditionAttention()
    if not spatial_cross:
        return result
    stacked = torch.stack([s.detach() for s in spatial_cross])
    num_segments = stacked.shape[-1]
    # Mean over layers, heads and queries, per key segment: B×H×N
    received = (stacked.mean(dim=(0, 2, 4)) * num_segments).numpy()
    speeds = speeds_mph.detach().numpy()
    for condition, span in TRAFFIC_CONDITIONS.items():
        mask = span.contains(speeds)
        result.sums[condition] += float(received[mask].sum())
        result.counts[condition] += int(mask.sum())
    return result
