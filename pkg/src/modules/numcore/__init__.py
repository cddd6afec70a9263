from .ops import (
    Tensor,
    DTYPE,
    ShapeError,
    tensor,
    add,
    sub,
    mul,
    matmul,
    bmm,
    transpose,
    concat,
    slice_last,
    softmax,
    layer_norm,
    relu,
    softplus,
    tensor_lgamma,
    dropout,
    embedding_lookup,
    mean,
    sum,
)
from .special import (
    lgamma,
    digamma,
    student_t_cdf,
    student_t_quantile,
    student_t_quantiles,
)
