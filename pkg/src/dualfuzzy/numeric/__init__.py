"""Dense float64 numerics: reverse-mode tape, Adam, gradient checking, containers."""

from . import autodiff as ad
from .autodiff import NonFiniteError, ShapeError, Tape, Tensor, forward_backward, value
from .gradcheck import GradCheckReport, grad_check, relative_error
from .optim import AdamState, adam_step

__all__ = [
    "ad",
    "AdamState",
    "GradCheckReport",
    "NonFiniteError",
    "ShapeError",
    "Tape",
    "Tensor",
    "adam_step",
    "forward_backward",
    "grad_check",
    "relative_error",
    "value",
]
