"""Tape-based reverse-mode differentiation over float64 numpy arrays.

Every primitive accepts either plain arrays or :class:`Tensor` objects.  When
no operand is a tensor the primitive simply evaluates with numpy, so model and
energy code can be written once and used both for inference and training.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

__all__ = [
    "ShapeError",
    "NonFiniteError",
    "Tape",
    "Tensor",
    "value",
    "forward_backward",
    "add",
    "sub",
    "mul",
    "div",
    "neg",
    "matmul",
    "relu",
    "softplus",
    "sq_hinge",
    "maximum",
    "minimum",
    "max_reduce",
    "sum",
    "l2_norm",
    "reshape",
    "transpose",
    "getitem",
]


class ShapeError(ValueError):
    """Operand shapes incompatible with a primitive."""

    def __init__(self, primitive: str, *shapes):
        self.primitive = primitive
        self.shapes = tuple(tuple(s) for s in shapes)
        super().__init__(f"{primitive}: incompatible shapes {', '.join(map(str, self.shapes))}")


class NonFiniteError(FloatingPointError):
    """A recorded intermediate contains NaN or Inf."""

    def __init__(self, node_index: int, primitive: str):
        self.node_index = node_index
        self.primitive = primitive
        super().__init__(f"non-finite output at node {node_index} ({primitive})")


@dataclass
class _Node:
    op: str
    parents: tuple  # node index per differentiable operand, None for constants
    vjp: Callable | None
    branch: np.ndarray | None = None


@dataclass
class Tape:
    """Ordered record of primitive applications.

    Nodes are appended in evaluation order, which is a topological order of the
    computation graph; :meth:`gradient` walks them strictly in reverse.
    """

    check_finite: bool = True
    nodes: list = field(default_factory=list)

    def leaf(self, data, name: str | None = None) -> "Tensor":
        arr = np.array(data, dtype=np.float64)
        return self._record("leaf" if name is None else f"leaf:{name}", arr, (), None)

    def _record(self, op, data, parents, vjp, branch=None) -> "Tensor":
        index = len(self.nodes)
        if self.check_finite and not np.all(np.isfinite(data)):
            raise NonFiniteError(index, op)
        self.nodes.append(_Node(op, tuple(_parent(p) for p in parents), vjp, branch))
        return Tensor(data, self, index)

    def gradient(self, output: "Tensor", seed=None) -> list:
        """Vector-Jacobian products for every node; ``None`` where unreached."""
        if output.tape is not self:
            raise ValueError("output tensor belongs to a different tape")
        grads: list = [None] * len(self.nodes)
        grads[output.index] = (
            np.ones_like(output.data) if seed is None else np.asarray(seed, dtype=np.float64)
        )
        for i in range(output.index, -1, -1):
            g = grads[i]
            node = self.nodes[i]
            if g is None or node.vjp is None:
                continue
            for j, pg in zip(node.parents, node.vjp(g)):
                if j is None or pg is None:
                    continue
                grads[j] = pg if grads[j] is None else grads[j] + pg
        return grads

    def branch_signature(self) -> bytes:
        """Digest of every piecewise branch taken (rectifiers, hinges, argmaxes)."""
        h = hashlib.sha1()
        for i, node in enumerate(self.nodes):
            if node.branch is not None:
                h.update(i.to_bytes(4, "little"))
                h.update(np.ascontiguousarray(node.branch).tobytes())
        return h.digest()


class Tensor:
    """Array value recorded on a tape."""

    __array_priority__ = 1000

    def __init__(self, data: np.ndarray, tape: Tape, index: int):
        self.data = data
        self.tape = tape
        self.index = index

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def T(self) -> "Tensor":
        return transpose(self)

    def __repr__(self):
        return f"Tensor(shape={self.shape}, node={self.index})"

    def __len__(self):
        return len(self.data)

    def __add__(self, o):
        return add(self, o)

    def __radd__(self, o):
        return add(o, self)

    def __sub__(self, o):
        return sub(self, o)

    def __rsub__(self, o):
        return sub(o, self)

    def __mul__(self, o):
        return mul(self, o)

    def __rmul__(self, o):
        return mul(o, self)

    def __truediv__(self, o):
        return div(self, o)

    def __rtruediv__(self, o):
        return div(o, self)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, o):
        return matmul(self, o)

    def __rmatmul__(self, o):
        return matmul(o, self)

    def __getitem__(self, idx):
        return getitem(self, idx)

    def sum(self, axis=None, keepdims=False):
        return sum(self, axis=axis, keepdims=keepdims)

    def max(self, axis=None, keepdims=False):
        return max_reduce(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)


def value(x) -> np.ndarray:
    """Underlying array of a tensor, or the array itself."""
    return x.data if isinstance(x, Tensor) else np.asarray(x, dtype=np.float64)


def _tape(*xs) -> Tape | None:
    tape = None
    for x in xs:
        if isinstance(x, Tensor):
            if tape is None:
                tape = x.tape
            elif x.tape is not tape:
                raise ValueError("operands recorded on different tapes")
    return tape


def _parent(x):
    return x.index if isinstance(x, Tensor) else None


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    if g.shape == shape:
        return g
    extra = g.ndim - len(shape)
    if extra:
        g = g.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and g.shape[i] != 1)
    if axes:
        g = g.sum(axis=axes, keepdims=True)
    return g.reshape(shape)


def _broadcast_check(name, a, b):
    try:
        np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(name, a.shape, b.shape) from None


# -- elementwise binary ---------------------------------------------------


def add(a, b):
    tape = _tape(a, b)
    av, bv = value(a), value(b)
    _broadcast_check("add", av, bv)
    out = av + bv
    if tape is None:
        return out
    return tape._record(
        "add", out, (a, b),
        lambda g: (_unbroadcast(g, av.shape), _unbroadcast(g, bv.shape)),
    )


def sub(a, b):
    tape = _tape(a, b)
    av, bv = value(a), value(b)
    _broadcast_check("sub", av, bv)
    out = av - bv
    if tape is None:
        return out
    return tape._record(
        "sub", out, (a, b),
        lambda g: (_unbroadcast(g, av.shape), _unbroadcast(-g, bv.shape)),
    )


def mul(a, b):
    tape = _tape(a, b)
    av, bv = value(a), value(b)
    _broadcast_check("mul", av, bv)
    out = av * bv
    if tape is None:
        return out
    return tape._record(
        "mul", out, (a, b),
        lambda g: (_unbroadcast(g * bv, av.shape), _unbroadcast(g * av, bv.shape)),
    )


def div(a, b):
    tape = _tape(a, b)
    av, bv = value(a), value(b)
    _broadcast_check("div", av, bv)
    with np.errstate(divide="ignore", invalid="ignore"):  # non-finite results are reported on record
        out = av / bv
    if tape is None:
        return out
    return tape._record(
        "div", out, (a, b),
        lambda g: (_unbroadcast(g / bv, av.shape), _unbroadcast(-g * out / bv, bv.shape)),
    )


def neg(a):
    tape = _tape(a)
    out = -value(a)
    if tape is None:
        return out
    return tape._record("neg", out, (a,), lambda g: (-g,))


def maximum(a, b):
    """Elementwise max; on ties the gradient goes to ``a``."""
    tape = _tape(a, b)
    av, bv = value(a), value(b)
    _broadcast_check("maximum", av, bv)
    pick_a = av >= bv
    out = np.where(pick_a, av, bv)
    if tape is None:
        return out
    return tape._record(
        "maximum", out, (a, b),
        lambda g: (_unbroadcast(g * pick_a, av.shape), _unbroadcast(g * ~pick_a, bv.shape)),
        branch=np.broadcast_to(pick_a, out.shape),
    )


def minimum(a, b):
    """Elementwise min; on ties the gradient goes to ``a``."""
    tape = _tape(a, b)
    av, bv = value(a), value(b)
    _broadcast_check("minimum", av, bv)
    pick_a = av <= bv
    out = np.where(pick_a, av, bv)
    if tape is None:
        return out
    return tape._record(
        "minimum", out, (a, b),
        lambda g: (_unbroadcast(g * pick_a, av.shape), _unbroadcast(g * ~pick_a, bv.shape)),
        branch=np.broadcast_to(pick_a, out.shape),
    )


def matmul(a, b):
    tape = _tape(a, b)
    av, bv = value(a), value(b)
    if av.ndim != 2 or bv.ndim != 2 or av.shape[1] != bv.shape[0]:
        raise ShapeError("matmul", av.shape, bv.shape)
    out = av @ bv
    if tape is None:
        return out
    need_a, need_b = isinstance(a, Tensor), isinstance(b, Tensor)
    return tape._record(
        "matmul", out, (a, b),
        lambda g: (g @ bv.T if need_a else None, av.T @ g if need_b else None),
    )


# -- elementwise unary ----------------------------------------------------


def relu(x):
    tape = _tape(x)
    xv = value(x)
    active = xv > 0
    out = np.where(active, xv, 0.0)
    if tape is None:
        return out
    return tape._record("relu", out, (x,), lambda g: (g * active,), branch=active)


def softplus(x):
    tape = _tape(x)
    xv = value(x)
    out = np.logaddexp(0.0, xv)
    if tape is None:
        return out
    # sigmoid, written to avoid overflow for large |x|
    sig = np.exp(xv - out)
    return tape._record("softplus", out, (x,), lambda g: (g * sig,))


def sq_hinge(x):
    """``max(0, x) ** 2``; derivative ``2 max(0, x)`` (zero at the kink)."""
    tape = _tape(x)
    xv = value(x)
    active = xv > 0
    pos = np.where(active, xv, 0.0)
    out = pos * pos
    if tape is None:
        return out
    return tape._record("sq_hinge", out, (x,), lambda g: (2.0 * g * pos,), branch=active)


# -- reductions and reshaping --------------------------------------------


def sum(x, axis=None, keepdims=False):  # noqa: A001 - mirrors numpy
    tape = _tape(x)
    xv = value(x)
    out = np.sum(xv, axis=axis, keepdims=keepdims)
    if tape is None:
        return out
    out = np.asarray(out)

    def vjp(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, xv.shape).copy(),)

    return tape._record("sum", out, (x,), vjp)


def max_reduce(x, axis=None, keepdims=False):
    """Max over ``axis``; the gradient is routed to the first maximiser."""
    tape = _tape(x)
    xv = value(x)
    if axis is None:
        flat = xv.reshape(-1)
        arg = np.argmax(flat)
        out = flat[arg].reshape((1,) * xv.ndim if keepdims else ())
        if tape is None:
            return out

        def vjp(g):
            gx = np.zeros(flat.shape)
            gx[arg] = np.asarray(g).reshape(())
            return (gx.reshape(xv.shape),)

        return tape._record("max_reduce", out, (x,), vjp, branch=np.array([arg]))

    axis = axis % xv.ndim
    arg = np.expand_dims(np.argmax(xv, axis=axis), axis)
    out = np.take_along_axis(xv, arg, axis=axis)
    if not keepdims:
        out = np.squeeze(out, axis=axis)
    if tape is None:
        return out

    def vjp(g):
        if not keepdims:
            g = np.expand_dims(g, axis)
        gx = np.zeros(xv.shape)
        np.put_along_axis(gx, arg, g, axis=axis)
        return (gx,)

    return tape._record("max_reduce", out, (x,), vjp, branch=arg)


def l2_norm(x, axis=-1, keepdims=False):
    tape = _tape(x)
    xv = value(x)
    out = np.sqrt(np.sum(xv * xv, axis=axis, keepdims=True))
    if tape is None:
        return out if keepdims else np.squeeze(out, axis=axis)
    safe = np.where(out > 0, out, 1.0)

    def vjp(g):
        if not keepdims:
            g = np.expand_dims(g, axis)
        return (g * np.where(out > 0, xv / safe, 0.0),)

    return tape._record(
        "l2_norm", out if keepdims else np.squeeze(out, axis=axis), (x,), vjp
    )


def reshape(x, shape):
    tape = _tape(x)
    xv = value(x)
    try:
        out = xv.reshape(shape)
    except ValueError:
        raise ShapeError("reshape", xv.shape, shape) from None
    if tape is None:
        return out
    return tape._record("reshape", out, (x,), lambda g: (g.reshape(xv.shape),))


def transpose(x, axes=None):
    tape = _tape(x)
    xv = value(x)
    out = np.transpose(xv, axes)
    if tape is None:
        return out
    inv = None if axes is None else tuple(np.argsort(axes))
    return tape._record("transpose", out, (x,), lambda g: (np.transpose(g, inv),))


def getitem(x, idx):
    tape = _tape(x)
    xv = value(x)
    out = np.array(xv[idx], dtype=np.float64)
    if tape is None:
        return out

    def vjp(g):
        gx = np.zeros(xv.shape)
        np.add.at(gx, idx, g)
        return (gx,)

    return tape._record("getitem", out, (x,), vjp)


# -- driver ---------------------------------------------------------------


def forward_backward(
    program: Callable,
    params: Mapping[str, np.ndarray],
    inputs: Mapping[str, np.ndarray] | None = None,
    *,
    return_tape: bool = False,
):
    """Evaluate ``program(params, inputs)`` and differentiate it w.r.t. ``params``.

    ``program`` receives a dict of parameter tensors and the ``inputs`` mapping
    unchanged (inputs are treated as constants) and must return a scalar.
    Returns ``(value, grads)``; parameters the program never touches get zero
    gradients.
    """
    tape = Tape()
    leaves = {k: tape.leaf(v, k) for k, v in params.items()}
    out = program(leaves, dict(inputs or {}))
    if not isinstance(out, Tensor):
        out_val = np.asarray(out, dtype=np.float64)
        if out_val.size != 1:
            raise ShapeError("forward_backward", out_val.shape, ())
        grads = {k: np.zeros_like(v.data) for k, v in leaves.items()}
        result = (float(out_val), grads)
        return result + (tape,) if return_tape else result
    if out.data.size != 1:
        raise ShapeError("forward_backward", out.shape, ())
    all_grads = tape.gradient(out)
    grads = {}
    for k, leaf in leaves.items():
        g = all_grads[leaf.index]
        grads[k] = np.zeros_like(leaf.data) if g is None else np.asarray(g, dtype=np.float64)
    result = (float(out.data.reshape(())), grads)
    return result + (tape,) if return_tape else result
