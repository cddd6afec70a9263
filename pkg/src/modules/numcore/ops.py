"""
Tensor ops used by the forecaster.

Tensors are float64 torch tensors; autograd records each op on the graph of the
current forward pass and backward accumulates into every parent's `.grad`.
The wrappers validate shapes up front so a mismatch names the op and both shapes.
"""

from __future__ import annotations

import torch
import torch.nn.functional as F

Tensor = torch.Tensor

DTYPE = torch.float64
LAYER_NORM_EPS = 1e-5


class ShapeError(ValueError):
    def __init__(self, op: str, *shapes):
        listed = " and ".join(str(tuple(s)) for s in shapes)
        super().__init__(f"{op}: incompatible shapes {listed}")
        self.op = op
        self.shapes = [tuple(s) for s in shapes]


def tensor(data, requires_grad: bool = False) -> Tensor:
    return torch.as_tensor(data, dtype=DTYPE).clone().requires_grad_(requires_grad)


def _broadcast(op: str, a: Tensor, b: Tensor):
    try:
        torch.broadcast_shapes(a.shape, b.shape)
    except RuntimeError:
        raise ShapeError(op, a.shape, b.shape) from None


def add(a: Tensor, b: Tensor) -> Tensor:
    _broadcast("add", a, b)
    return a + b


def sub(a: Tensor, b: Tensor) -> Tensor:
    _broadcast("sub", a, b)
    return a - b


def mul(a: Tensor, b: Tensor) -> Tensor:
    _broadcast("mul", a, b)
    return a * b


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.dim() != 2 or b.dim() != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError("matmul", a.shape, b.shape)
    return a @ b


def bmm(a: Tensor, b: Tensor) -> Tensor:
    """Batched matmul over matching (or broadcastable) leading dims."""
    if a.dim() < 2 or b.dim() < 2 or a.shape[-1] != b.shape[-2]:
        raise ShapeError("bmm", a.shape, b.shape)
    try:
        torch.broadcast_shapes(a.shape[:-2], b.shape[:-2])
    except RuntimeError:
        raise ShapeError("bmm", a.shape, b.shape) from None
    return torch.matmul(a, b)


def transpose(x: Tensor, dim0: int = -2, dim1: int = -1) -> Tensor:
    return x.transpose(dim0, dim1)


def concat(tensors: list[Tensor]) -> Tensor:
    """Concatenate along the last axis."""
    lead = tensors[0].shape[:-1]
    for t in tensors[1:]:
        if t.shape[:-1] != lead:
            raise ShapeError("concat", tensors[0].shape, t.shape)
    return torch.cat(tensors, dim=-1)


def slice_last(x: Tensor, start: int, stop: int) -> Tensor:
    if not 0 <= start <= stop <= x.shape[-1]:
        raise ShapeError("slice", x.shape, (start, stop))
    return x[..., start:stop]


def softmax(x: Tensor, dim: int = -1) -> Tensor:
    return torch.softmax(x, dim=dim)


def layer_norm(x: Tensor, weight: Tensor, bias: Tensor, eps: float = LAYER_NORM_EPS) -> Tensor:
    if weight.shape != x.shape[-1:] or bias.shape != x.shape[-1:]:
        raise ShapeError("layer_norm", x.shape, weight.shape)
    return F.layer_norm(x, x.shape[-1:], weight, bias, eps)


def relu(x: Tensor) -> Tensor:
    return torch.relu(x)


def softplus(x: Tensor) -> Tensor:
    return F.softplus(x)


def tensor_lgamma(x: Tensor) -> Tensor:
    """Log-gamma with digamma as its derivative."""
    return torch.lgamma(x)


def dropout(x: Tensor, p: float, generator: torch.Generator | None, training: bool) -> Tensor:
    """
    Inverted dropout: survivors are scaled by 1/(1-p) in training, identity otherwise.
    The mask is drawn from `generator`, so a fixed seed gives a fixed mask sequence.
    """
    if not 0.0 <= p < 1.0:
        raise ValueError(f"dropout probability must be in [0, 1), got {p}")
    if not training or p == 0.0:
        return x
    keep = torch.rand(x.shape, generator=generator, dtype=x.dtype) >= p
    return x * keep / (1.0 - p)


def embedding_lookup(table: Tensor, indices: Tensor) -> Tensor:
    indices = torch.as_tensor(indices, dtype=torch.long)
    if indices.numel() and (indices.min() < 0 or indices.max() >= table.shape[0]):
        raise ValueError(
            f"embedding_lookup: index range [{int(indices.min())}, {int(indices.max())}] "
            f"outside table of {table.shape[0]} rows"
        )
    return table[indices]


def mean(x: Tensor, dim=None) -> Tensor:
    return x.mean() if dim is None else x.mean(dim=dim)


def sum(x: Tensor, dim=None) -> Tensor:
    return x.sum() if dim is None else x.sum(dim=dim)
