"""Reverse-mode automatic differentiation over float64 numpy arrays.

Every differentiable operation returns a new :class:`Tensor` that remembers
its parents and a closure mapping the output gradient to one gradient per
parent. :func:`backward` walks the recorded graph in reverse topological
order and accumulates gradients additively, so a tensor consumed ``k`` times
receives the sum of ``k`` contributions.
"""

from __future__ import annotations

import contextlib
from typing import Callable, Iterable, Sequence

import numpy as np

from ..errors import ContractError, DimensionError

DTYPE = np.float64

_grad_enabled = True


@contextlib.contextmanager
def no_grad():
    """Disable graph recording inside the block (inference mode)."""
    global _grad_enabled
    previous = _grad_enabled
    _grad_enabled = False
    try:
        yield
    finally:
        _grad_enabled = previous


def is_grad_enabled() -> bool:
    return _grad_enabled


class Tensor:
    """Dense float64 array with optional gradient tracking.

    ``data`` is an ``np.ndarray`` (row-major). ``grad`` is populated on leaf
    tensors by :func:`backward` and has the same shape as ``data``.
    """

    __slots__ = ("data", "grad", "requires_grad", "op", "_parents", "_backward")
    __array_priority__ = 100

    def __init__(self, data, requires_grad: bool = False, op: str = "leaf"):
        arr = np.asarray(data, dtype=DTYPE)
        if not arr.flags.c_contiguous:
            arr = np.ascontiguousarray(arr)
        self.data = arr
        self.grad: np.ndarray | None = None
        self.requires_grad = bool(requires_grad)
        self.op = op
        self._parents: tuple[Tensor, ...] = ()
        self._backward: Callable | None = None

    # ------------------------------------------------------------------ info
    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def is_leaf(self) -> bool:
        return self._backward is None

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        if self.data.size != 1:
            raise DimensionError(f"item() needs a single element, got shape {self.shape}")
        return float(self.data.reshape(()))

    def zero_grad(self) -> None:
        self.grad = None

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def __repr__(self) -> str:
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}, op={self.op}{flag})"

    def backward(self) -> dict:
        return backward(self)

    # -------------------------------------------------------------- operators
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, other)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, index):
        return getitem(self, index)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)

    def transpose(self, *axes):
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        return transpose(self, axes)

    def sum(self, axis=None, keepdims=False):
        return tensor_sum(self, axis, keepdims)

    def mean(self, axis=None, keepdims=False):
        return mean(self, axis, keepdims)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def make_node(data: np.ndarray, parents: Sequence[Tensor], backward_fn: Callable, op: str) -> Tensor:
    """Wrap ``data`` as the output of ``op``; records the graph edge if needed."""
    out = Tensor(data, op=op)
    if _grad_enabled and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward_fn
    return out


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    if grad.shape == shape:
        return grad
    extra = grad.ndim - len(shape)
    if extra:
        grad = grad.sum(axis=tuple(range(extra)))
    axes = tuple(i for i, n in enumerate(shape) if n == 1 and grad.shape[i] != 1)
    if axes:
        grad = grad.sum(axis=axes, keepdims=True)
    return grad.reshape(shape)


# ----------------------------------------------------------------- graph walk
def topological_order(root: Tensor) -> list[Tensor]:
    """Nodes reachable from ``root`` with every input before its consumer."""
    order: list[Tensor] = []
    seen: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in seen:
            continue
        seen.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if parent.requires_grad and id(parent) not in seen:
                stack.append((parent, False))
    return order


def backward(loss: Tensor) -> dict[Tensor, np.ndarray]:
    """Back-propagate from a scalar ``loss``.

    Leaf tensors with ``requires_grad`` get their ``.grad`` incremented; the
    returned map holds the gradient contributed by this call for each leaf.
    """
    if loss.data.size != 1:
        raise ContractError(f"backward() needs a scalar loss, got shape {loss.shape}")
    if not loss.requires_grad:
        return {}
    grads: dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}
    leaves: dict[Tensor, np.ndarray] = {}
    for node in reversed(topological_order(loss)):
        g = grads.pop(id(node), None)
        if g is None:
            continue
        if node._backward is None:
            leaves[node] = g
            continue
        for parent, pg in zip(node._parents, node._backward(g)):
            if pg is None or not parent.requires_grad:
                continue
            key = id(parent)
            if key in grads:
                grads[key] = grads[key] + pg
            else:
                grads[key] = pg
    for leaf, g in leaves.items():
        leaf.grad = g.copy() if leaf.grad is None else leaf.grad + g
    return leaves


# ------------------------------------------------------------ elementwise ops
def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    sa, sb = a.shape, b.shape

    def _bw(g):
        return _unbroadcast(g, sa), _unbroadcast(g, sb)

    return make_node(a.data + b.data, (a, b), _bw, "add")


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    sa, sb = a.shape, b.shape

    def _bw(g):
        return _unbroadcast(g, sa), _unbroadcast(-g, sb)

    return make_node(a.data - b.data, (a, b), _bw, "sub")


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    ad, bd = a.data, b.data

    def _bw(g):
        ga = _unbroadcast(g * bd, ad.shape) if a.requires_grad else None
        gb = _unbroadcast(g * ad, bd.shape) if b.requires_grad else None
        return ga, gb

    return make_node(ad * bd, (a, b), _bw, "mul")


def div(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    ad, bd = a.data, b.data

    def _bw(g):
        ga = _unbroadcast(g / bd, ad.shape) if a.requires_grad else None
        gb = _unbroadcast(-g * ad / (bd * bd), bd.shape) if b.requires_grad else None
        return ga, gb

    return make_node(ad / bd, (a, b), _bw, "div")


def sqrt(x: Tensor) -> Tensor:
    out = np.sqrt(x.data)

    def _bw(g):
        return (g * 0.5 / out,)

    return make_node(out, (x,), _bw, "sqrt")


def square(x: Tensor) -> Tensor:
    xd = x.data

    def _bw(g):
        return (2.0 * g * xd,)

    return make_node(xd * xd, (x,), _bw, "square")


def exp(x: Tensor) -> Tensor:
    out = np.exp(x.data)

    def _bw(g):
        return (g * out,)

    return make_node(out, (x,), _bw, "exp")


# -------------------------------------------------------------- reductions
def tensor_sum(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    shape = x.shape
    out = x.data.sum(axis=axis, keepdims=keepdims)

    def _bw(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, shape).copy(),)

    return make_node(out, (x,), _bw, "sum")


def mean(x: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    if axis is None:
        count = x.size
    else:
        axes = axis if isinstance(axis, tuple) else (axis,)
        count = int(np.prod([x.shape[a] for a in axes]))
    return mul(tensor_sum(x, axis, keepdims), 1.0 / count)


# ---------------------------------------------------------------- structure
def reshape(x: Tensor, shape) -> Tensor:
    src = x.shape
    out = x.data.reshape(shape)

    def _bw(g):
        return (g.reshape(src),)

    return make_node(out, (x,), _bw, "reshape")


def transpose(x: Tensor, axes) -> Tensor:
    axes = tuple(axes)
    inverse = tuple(np.argsort(axes))
    out = np.ascontiguousarray(x.data.transpose(axes))

    def _bw(g):
        return (np.ascontiguousarray(g.transpose(inverse)),)

    return make_node(out, (x,), _bw, "transpose")


def getitem(x: Tensor, index) -> Tensor:
    shape = x.shape

    def _bw(g):
        full = np.zeros(shape, dtype=DTYPE)
        if _has_advanced(index):
            np.add.at(full, index, g)
        else:
            full[index] += g
        return (full,)

    return make_node(np.ascontiguousarray(x.data[index]), (x,), _bw, "getitem")


def _has_advanced(index) -> bool:
    items = index if isinstance(index, tuple) else (index,)
    return any(isinstance(i, (list, np.ndarray)) for i in items)


def concat(tensors: Iterable[Tensor], axis: int = -1) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    ax = axis % tensors[0].ndim
    for t in tensors[1:]:
        if t.ndim != tensors[0].ndim or any(
            t.shape[i] != tensors[0].shape[i] for i in range(t.ndim) if i != ax
        ):
            raise DimensionError(
                f"concat along axis {axis}: shapes {tensors[0].shape} and {t.shape} disagree"
            )
    sizes = [t.shape[ax] for t in tensors]
    bounds = np.cumsum([0] + sizes)

    def _bw(g):
        return tuple(
            np.ascontiguousarray(np.take(g, range(bounds[i], bounds[i + 1]), axis=ax))
            for i in range(len(tensors))
        )

    return make_node(np.concatenate([t.data for t in tensors], axis=ax), tensors, _bw, "concat")


def stack(tensors: Sequence[Tensor], axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    expanded = [reshape(t, t.shape[:axis % (t.ndim + 1)] + (1,) + t.shape[axis % (t.ndim + 1):])
                for t in tensors]
    return concat(expanded, axis=axis)


def pad(x: Tensor, widths: Sequence[tuple[int, int]]) -> Tensor:
    """Zero padding; ``widths`` has one ``(before, after)`` pair per axis."""
    widths = tuple((int(a), int(b)) for a, b in widths)
    slices = tuple(slice(a, a + n) for (a, _), n in zip(widths, x.shape))

    def _bw(g):
        return (np.ascontiguousarray(g[slices]),)

    return make_node(np.pad(x.data, widths), (x,), _bw, "pad")


def matmul(a, b) -> Tensor:
    """Batched matrix product with numpy broadcasting over leading axes."""
    a, b = as_tensor(a), as_tensor(b)
    if a.shape[-1] != b.shape[-2 if b.ndim > 1 else 0]:
        raise DimensionError(f"matmul: shapes {a.shape} and {b.shape} are not aligned")
    ad, bd = a.data, b.data

    def _bw(g):
        ga = gb = None
        if a.requires_grad:
            ga = _unbroadcast(g @ np.swapaxes(bd, -1, -2), ad.shape)
        if b.requires_grad:
            gb = _unbroadcast(np.swapaxes(ad, -1, -2) @ g, bd.shape)
        return ga, gb

    return make_node(ad @ bd, (a, b), _bw, "matmul")
