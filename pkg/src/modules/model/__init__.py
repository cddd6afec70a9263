from .config import ModelConfig, ABLATION_VARIANTS, feature_removal_variants
from .attention import MultiHeadAttention
from .embedding import StreamEmbedding
from .layers import MacroMicroLayer, SPATIAL, TEMPORAL
from .network import MMCAformer, ModelBatch, ForwardOutput, batch_targets
from .scores import (
    AttentionScores,
    ScoreAccumulator,
    ConditionAttention,
    cross_attention_by_condition,
    scores_frame,
    write_scores,
    SCORE_COLUMNS,
    TRAFFIC_CONDITIONS,
)
from .checkpoint import save_checkpoint, load_checkpoint
