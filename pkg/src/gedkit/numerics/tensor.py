"""Dense float64 tensors with reverse-mode differentiation over a dynamic tape.

Operations executed inside ``with Tape():`` are recorded when any input
requires a gradient; outside a tape they just compute values, which is the
inference path.
"""

from __future__ import annotations

import threading

import numpy as np
from scipy.special import expit


class ShapeError(ValueError):
    pass


_local = threading.local()


def _tape_stack() -> list:
    stack = getattr(_local, "stack", None)
    if stack is None:
        stack = _local.stack = []
    return stack


def active_tape() -> "Tape | None":
    stack = _tape_stack()
    return stack[-1] if stack else None


class Tape:
    """Ordered record of operations, each with a closure mapping the output
    gradient to input gradients."""

    def __init__(self):
        self.nodes = []

    def __enter__(self):
        _tape_stack().append(self)
        return self

    def __exit__(self, *exc):
        _tape_stack().pop()
        return False

    def __len__(self):
        return len(self.nodes)

    def backward(self, loss: "Tensor") -> None:
        if loss.data.size != 1:
            raise ShapeError(f"backward needs a scalar loss, got shape {loss.shape}")
        seed = np.ones_like(loss.data)
        if loss._tape is None:
            _accumulate(loss, seed)
            return
        if loss._tape is not self:
            raise ValueError("loss was recorded on a different tape")
        pending = {id(loss): seed}
        for out, parents, fn in reversed(self.nodes):
            g = pending.pop(id(out), None)
            if g is None:
                continue
            out.grad = g if out.grad is None else out.grad + g
            for p, pg in zip(parents, fn(g)):
                if pg is None or not p.requires_grad:
                    continue
                if p._tape is None:
                    _accumulate(p, pg)
                else:
                    prev = pending.get(id(p))
                    pending[id(p)] = pg if prev is None else prev + pg


def _accumulate(t: "Tensor", g: np.ndarray) -> None:
    g = np.asarray(g, dtype=np.float64).reshape(t.data.shape)
    t.grad = g.copy() if t.grad is None else t.grad + g


class Tensor:
    __slots__ = ("data", "requires_grad", "grad", "_tape")
    __array_priority__ = 1000

    def __init__(self, data, requires_grad: bool = False):
        self.data = np.array(data, dtype=np.float64)
        self.requires_grad = requires_grad
        self.grad = None
        self._tape = None

    @property
    def shape(self) -> tuple:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    @property
    def T(self) -> "Tensor":
        return transpose(self)

    def numpy(self) -> np.ndarray:
        return self.data.copy()

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() needs a single-element tensor, got shape {self.shape}")
        return float(self.data.reshape(-1)[0])

    def zero_grad(self) -> None:
        self.grad = np.zeros_like(self.data)

    def backward(self) -> None:
        backward(self)

    def __repr__(self):
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor({self.data!r}{flag})"

    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)

    def __rmatmul__(self, other):
        return matmul(other, self)

    def __getitem__(self, index):
        return getitem(self, index)


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _result(data: np.ndarray, parents: tuple, backward_fn) -> Tensor:
    out = Tensor.__new__(Tensor)
    out.data = np.asarray(data)
    out.grad = None
    tape = active_tape()
    if tape is not None and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._tape = tape
        tape.nodes.append((out, parents, backward_fn))
    else:
        out.requires_grad = False
        out._tape = None
    return out


def backward(loss: Tensor) -> None:
    """Populate ``.grad`` of every requiring tensor that ``loss`` depends on."""
    if loss.data.size != 1:
        raise ShapeError(f"backward needs a scalar loss, got shape {loss.shape}")
    if loss._tape is None:
        if not loss.requires_grad:
            raise ValueError("loss was not produced under an active tape")
        _accumulate(loss, np.ones_like(loss.data))
        return
    loss._tape.backward(loss)


def _unbroadcast(g: np.ndarray, shape: tuple) -> np.ndarray:
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


def _broadcast_shape(a: Tensor, b: Tensor) -> tuple:
    try:
        return np.broadcast_shapes(a.shape, b.shape)
    except ValueError:
        raise ShapeError(f"cannot broadcast {a.shape} with {b.shape}") from None


# elementwise arithmetic


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b)
    return _result(a.data + b.data, (a, b),
                   lambda g: (_unbroadcast(g, a.shape), _unbroadcast(g, b.shape)))


def sub(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b)
    return _result(a.data - b.data, (a, b),
                   lambda g: (_unbroadcast(g, a.shape), _unbroadcast(-g, b.shape)))


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b)
    return _result(a.data * b.data, (a, b),
                   lambda g: (_unbroadcast(g * b.data, a.shape), _unbroadcast(g * a.data, b.shape)))


def div(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    _broadcast_shape(a, b)
    return _result(a.data / b.data, (a, b),
                   lambda g: (_unbroadcast(g / b.data, a.shape),
                              _unbroadcast(-g * a.data / b.data**2, b.shape)))


def neg(a) -> Tensor:
    a = as_tensor(a)
    return _result(-a.data, (a,), lambda g: (-g,))


def square(a) -> Tensor:
    a = as_tensor(a)
    return _result(a.data * a.data, (a,), lambda g: (2.0 * a.data * g,))


# activations


def relu(x) -> Tensor:
    x = as_tensor(x)
    mask = x.data > 0
    return _result(np.where(mask, x.data, 0.0), (x,), lambda g: (g * mask,))


def sigmoid(x) -> Tensor:
    x = as_tensor(x)
    y = expit(x.data)
    return _result(y, (x,), lambda g: (g * y * (1.0 - y),))


def tanh(x) -> Tensor:
    x = as_tensor(x)
    y = np.tanh(x.data)
    return _result(y, (x,), lambda g: (g * (1.0 - y * y),))


def log(x) -> Tensor:
    x = as_tensor(x)
    return _result(np.log(x.data), (x,), lambda g: (g / x.data,))


def exp(x) -> Tensor:
    x = as_tensor(x)
    y = np.exp(x.data)
    return _result(y, (x,), lambda g: (g * y,))


# linear algebra and shape manipulation


def matmul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError(f"matmul expects 2-d operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul shape mismatch: {a.shape} @ {b.shape}")
    return _result(a.data @ b.data, (a, b), lambda g: (g @ b.data.T, a.data.T @ g))


def transpose(a) -> Tensor:
    a = as_tensor(a)
    if a.ndim != 2:
        raise ShapeError(f"transpose expects a 2-d tensor, got {a.shape}")
    return _result(a.data.T, (a,), lambda g: (g.T,))


def reshape(a, shape) -> Tensor:
    a = as_tensor(a)
    try:
        data = a.data.reshape(shape)
    except ValueError:
        raise ShapeError(f"cannot reshape {a.shape} to {shape}") from None
    return _result(data, (a,), lambda g: (g.reshape(a.shape),))


def concat(tensors, axis: int = 0) -> Tensor:
    ts = tuple(as_tensor(t) for t in tensors)
    if not ts:
        raise ShapeError("concat needs at least one tensor")
    try:
        data = np.concatenate([t.data for t in ts], axis=axis)
    except ValueError as exc:
        raise ShapeError(f"concat: {exc}") from None
    bounds = np.cumsum([t.shape[axis] for t in ts])[:-1]
    return _result(data, ts, lambda g: tuple(np.split(g, bounds, axis=axis)))


def getitem(a, index) -> Tensor:
    """Basic or integer-array indexing (slicing)."""
    a = as_tensor(a)

    def back(g):
        full = np.zeros_like(a.data)
        np.add.at(full, index, g)
        return (full,)

    return _result(a.data[index], (a,), back)


def take(a, indices, axis: int = 0) -> Tensor:
    """Gather rows (``axis=0``) by integer index; repeated indices accumulate in backward."""
    a = as_tensor(a)
    indices = np.asarray(indices, dtype=np.intp)
    if axis != 0:
        raise NotImplementedError("take only supports axis=0")

    def back(g):
        full = np.zeros_like(a.data)
        np.add.at(full, indices, g)
        return (full,)

    return _result(a.data[indices], (a,), back)


def sum(a, axis=None, keepdims: bool = False) -> Tensor:  # noqa: A001
    a = as_tensor(a)
    data = a.data.sum(axis=axis, keepdims=keepdims)

    def back(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        return (np.broadcast_to(g, a.shape).copy(),)

    return _result(np.asarray(data, dtype=np.float64), (a,), back)


def mean(a, axis=None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    count = a.data.size if axis is None else np.prod([a.shape[i] for i in np.atleast_1d(axis)])
    return mul(sum(a, axis=axis, keepdims=keepdims), 1.0 / count)


def einsum(subscripts: str, *operands) -> Tensor:
    """Einstein summation with explicit output, e.g. ``"pa,abk,pb->pk"``.

    Every index of an operand must appear in the output or in another
    operand, and no operand may repeat an index.
    """
    ops = tuple(as_tensor(o) for o in operands)
    if "->" not in subscripts:
        raise ValueError("einsum needs an explicit '->' output")
    lhs, out_spec = subscripts.replace(" ", "").split("->")
    specs = lhs.split(",")
    if len(specs) != len(ops):
        raise ValueError("einsum operand count does not match subscripts")
    for i, s in enumerate(specs):
        if len(set(s)) != len(s):
            raise NotImplementedError("repeated indices within an operand are not supported")
        others = set(out_spec).union(*(specs[j] for j in range(len(specs)) if j != i))
        if not set(s) <= others:
            raise NotImplementedError(f"index in {s!r} is summed out within its own operand")
    try:
        data = np.einsum(subscripts, *(o.data for o in ops), optimize=len(ops) > 2)
    except ValueError as exc:
        raise ShapeError(f"einsum: {exc}") from None

    def back(g):
        grads = []
        for i, s in enumerate(specs):
            if not ops[i].requires_grad:
                grads.append(None)
                continue
            rest = [specs[j] for j in range(len(ops)) if j != i]
            expr = ",".join([out_spec] + rest) + "->" + s
            grads.append(np.einsum(expr, g, *(ops[j].data for j in range(len(ops)) if j != i),
                                   optimize=len(ops) > 2))
        return tuple(grads)

    return _result(np.asarray(data, dtype=np.float64), ops, back)


def segment_sum(x, segment_ids, num_segments: int) -> Tensor:
    """Sum rows of ``x`` that share a segment id."""
    x = as_tensor(x)
    seg = np.asarray(segment_ids, dtype=np.intp)
    if seg.shape != (x.shape[0],):
        raise ShapeError("segment_ids must give one id per row")
    out = np.zeros((num_segments,) + x.shape[1:])
    np.add.at(out, seg, x.data)
    return _result(out, (x,), lambda g: (g[seg],))


def aggregate(x, src, dst, weight, num_rows: int) -> Tensor:
    """Weighted neighbour sum: ``out[dst[e]] += weight[e] * x[src[e]]`` for every edge ``e``."""
    x = as_tensor(x)
    src = np.asarray(src, dtype=np.intp)
    dst = np.asarray(dst, dtype=np.intp)
    w = np.asarray(weight, dtype=np.float64)[:, None]
    out = np.zeros((num_rows, x.shape[1]))
    np.add.at(out, dst, w * x.data[src])

    def back(g):
        gx = np.zeros_like(x.data)
        np.add.at(gx, src, w * g[dst])
        return (gx,)

    return _result(out, (x,), back)
