"""Dense float64 tensors with reverse-mode automatic differentiation.

Every public operation records its inputs and a backward closure on the
produced tensor, so calling ``backward()`` on a scalar loss walks the
recorded graph in reverse topological order and accumulates gradients
into every tensor created with ``requires_grad=True``.

Only the small op set the rest of the package needs is provided: 1-D and
2-D arrays, broadcasting between them, matmul, a handful of elementwise
nonlinearities, row softmax / log-softmax, row layer norm, concatenation,
slicing and row gathering. Finite differences live in ``gradcheck`` and
are a test oracle only; training always uses the analytic gradients
produced here.
"""

from __future__ import annotations

import numpy as np
from scipy.special import erf

_INV_SQRT2 = 1.0 / np.sqrt(2.0)
_INV_SQRT2PI = 1.0 / np.sqrt(2.0 * np.pi)


class ShapeError(ValueError):
    """Raised when operand shapes do not satisfy an operation's contract."""


class Tensor:
    """A float64 array plus the bookkeeping needed for backpropagation."""

    __slots__ = ("data", "requires_grad", "grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False, _parents=(), _backward=None):
        arr = np.asarray(data, dtype=np.float64)
        if arr.ndim > 2:
            raise ShapeError(f"tensors are at most 2-D, got shape {arr.shape}")
        self.data = arr
        self.requires_grad = bool(requires_grad)
        self.grad: np.ndarray | None = None
        self._parents = _parents
        self._backward = _backward

    # -- basic introspection ------------------------------------------------

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() needs a single-element tensor, got shape {self.shape}")
        return float(self.data.reshape(()))

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    # -- autodiff -----------------------------------------------------------

    def backward(self) -> None:
        """Accumulate gradients of this scalar into all upstream tensors."""
        if self.data.size != 1:
            raise ShapeError("backward() is only defined for scalar tensors")
        order = _toposort(self)
        self.grad = np.ones_like(self.data)
        for node in order:
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    def detach(self) -> "Tensor":
        return Tensor(self.data.copy())

    def _accumulate(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = g.copy()
        else:
            self.grad += g

    # -- operator sugar -----------------------------------------------------

    def __add__(self, other):
        return add(self, _as_tensor(other))

    def __radd__(self, other):
        return add(_as_tensor(other), self)

    def __sub__(self, other):
        return sub(self, _as_tensor(other))

    def __rsub__(self, other):
        return sub(_as_tensor(other), self)

    def __mul__(self, other):
        return mul(self, _as_tensor(other))

    def __rmul__(self, other):
        return mul(_as_tensor(other), self)

    def __truediv__(self, other):
        return div(self, _as_tensor(other))

    def __rtruediv__(self, other):
        return div(_as_tensor(other), self)

    def __neg__(self):
        return mul(self, Tensor(-1.0))

    def __matmul__(self, other):
        return matmul(self, other)


def _as_tensor(value) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def _toposort(root: Tensor) -> list[Tensor]:
    # Iterative DFS: training graphs routinely exceed the recursion limit.
    order: list[Tensor] = []
    visited: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if id(parent) not in visited:
                stack.append((parent, False))
    order.reverse()
    return order


def _unbroadcast(g: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum a gradient back down to ``shape`` after numpy broadcasting."""
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g.reshape(shape)


def _binary(a: Tensor, b: Tensor, out_data, da, db) -> Tensor:
    req = a.requires_grad or b.requires_grad
    out = Tensor(out_data, requires_grad=req)
    if req:
        out._parents = (a, b)

        def backward(g):
            if a.requires_grad:
                a._accumulate(_unbroadcast(da(g), a.shape))
            if b.requires_grad:
                b._accumulate(_unbroadcast(db(g), b.shape))

        out._backward = backward
    return out


def _unary(a: Tensor, out_data, da) -> Tensor:
    out = Tensor(out_data, requires_grad=a.requires_grad)
    if a.requires_grad:
        out._parents = (a,)

        def backward(g):
            a._accumulate(da(g))

        out._backward = backward
    return out


# -- arithmetic --------------------------------------------------------------


def add(a: Tensor, b: Tensor) -> Tensor:
    return _binary(a, b, a.data + b.data, lambda g: g, lambda g: g)


def sub(a: Tensor, b: Tensor) -> Tensor:
    return _binary(a, b, a.data - b.data, lambda g: g, lambda g: -g)


def mul(a: Tensor, b: Tensor) -> Tensor:
    return _binary(a, b, a.data * b.data, lambda g: g * b.data, lambda g: g * a.data)


def div(a: Tensor, b: Tensor) -> Tensor:
    return _binary(
        a,
        b,
        a.data / b.data,
        lambda g: g / b.data,
        lambda g: -g * a.data / (b.data * b.data),
    )


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError(f"matmul needs 2-D operands, got {a.shape} @ {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul inner dimensions differ: {a.shape} @ {b.shape}")
    return _binary(
        a,
        b,
        a.data @ b.data,
        lambda g: g @ b.data.T,
        lambda g: a.data.T @ g,
    )


def transpose(a: Tensor) -> Tensor:
    if a.ndim != 2:
        raise ShapeError(f"transpose needs a 2-D tensor, got {a.shape}")
    return _unary(a, a.data.T.copy(), lambda g: g.T)


def reshape(a: Tensor, shape: tuple[int, ...]) -> Tensor:
    old = a.shape
    return _unary(a, a.data.reshape(shape).copy(), lambda g: g.reshape(old))


# -- elementwise functions ----------------------------------------------------


def exp(a: Tensor) -> Tensor:
    out_data = np.exp(a.data)
    return _unary(a, out_data, lambda g: g * out_data)


def log(a: Tensor) -> Tensor:
    return _unary(a, np.log(a.data), lambda g: g / a.data)


def sqrt(a: Tensor) -> Tensor:
    out_data = np.sqrt(a.data)
    return _unary(a, out_data, lambda g: g * 0.5 / out_data)


def absolute(a: Tensor) -> Tensor:
    return _unary(a, np.abs(a.data), lambda g: g * np.sign(a.data))


def clamp_min(a: Tensor, floor: float) -> Tensor:
    mask = a.data > floor
    return _unary(a, np.where(mask, a.data, floor), lambda g: g * mask)


def gelu(a: Tensor) -> Tensor:
    """Exact (erf-based) GELU."""
    x = a.data
    cdf = 0.5 * (1.0 + erf(x * _INV_SQRT2))
    out_data = x * cdf

    def da(g):
        pdf = np.exp(-0.5 * x * x) * _INV_SQRT2PI
        return g * (cdf + x * pdf)

    return _unary(a, out_data, da)


# -- reductions ---------------------------------------------------------------


def tsum(a: Tensor, axis: int | None = None, keepdims: bool = False) -> Tensor:
    out_data = a.data.sum(axis=axis, keepdims=keepdims)
    shape = a.shape

    def da(g):
        if axis is None:
            return np.broadcast_to(g.reshape((1,) * len(shape)), shape).copy()
        expanded = g if keepdims else np.expand_dims(g, axis)
        return np.broadcast_to(expanded, shape).copy()

    return _unary(a, out_data, da)


def tmean(a: Tensor, axis: int | None = None, keepdims: bool = False) -> Tensor:
    count = a.data.size if axis is None else a.shape[axis]
    return mul(tsum(a, axis=axis, keepdims=keepdims), Tensor(1.0 / count))


# -- row softmax family -------------------------------------------------------


def softmax_rows(logits: Tensor) -> Tensor:
    """Row-wise softmax with per-row max subtraction for stability."""
    if logits.ndim != 2:
        raise ShapeError(f"softmax_rows needs a 2-D tensor, got {logits.shape}")
    shifted = logits.data - logits.data.max(axis=1, keepdims=True)
    e = np.exp(shifted)
    out_data = e / e.sum(axis=1, keepdims=True)

    def da(g):
        dot = (g * out_data).sum(axis=1, keepdims=True)
        return out_data * (g - dot)

    return _unary(logits, out_data, da)


def log_softmax_rows(logits: Tensor) -> Tensor:
    if logits.ndim != 2:
        raise ShapeError(f"log_softmax_rows needs a 2-D tensor, got {logits.shape}")
    shifted = logits.data - logits.data.max(axis=1, keepdims=True)
    lse = np.log(np.exp(shifted).sum(axis=1, keepdims=True))
    out_data = shifted - lse
    soft = np.exp(out_data)

    def da(g):
        return g - soft * g.sum(axis=1, keepdims=True)

    return _unary(logits, out_data, da)


def layer_norm_rows(x: Tensor, gain: Tensor, bias: Tensor, eps: float = 1e-5) -> Tensor:
    """Normalize each row to zero mean / unit variance, then scale and shift."""
    if x.ndim != 2:
        raise ShapeError(f"layer_norm_rows needs a 2-D tensor, got {x.shape}")
    mu = tmean(x, axis=1, keepdims=True)
    centered = sub(x, mu)
    var = tmean(mul(centered, centered), axis=1, keepdims=True)
    normed = div(centered, sqrt(add(var, Tensor(eps))))
    return add(mul(normed, gain), bias)


# -- structural ops -----------------------------------------------------------


def concat_rows(parts: list[Tensor]) -> Tensor:
    if not parts:
        raise ShapeError("concat_rows needs at least one tensor")
    widths = {p.shape[1] for p in parts}
    if len(widths) != 1:
        raise ShapeError(f"concat_rows column counts differ: {sorted(widths)}")
    out = Tensor(
        np.concatenate([p.data for p in parts], axis=0),
        requires_grad=any(p.requires_grad for p in parts),
    )
    if out.requires_grad:
        out._parents = tuple(parts)
        offsets = np.cumsum([0] + [p.shape[0] for p in parts])

        def backward(g):
            for part, start, stop in zip(parts, offsets[:-1], offsets[1:]):
                if part.requires_grad:
                    part._accumulate(g[start:stop])

        out._backward = backward
    return out


def concat_cols(parts: list[Tensor]) -> Tensor:
    if not parts:
        raise ShapeError("concat_cols needs at least one tensor")
    heights = {p.shape[0] for p in parts}
    if len(heights) != 1:
        raise ShapeError(f"concat_cols row counts differ: {sorted(heights)}")
    out = Tensor(
        np.concatenate([p.data for p in parts], axis=1),
        requires_grad=any(p.requires_grad for p in parts),
    )
    if out.requires_grad:
        out._parents = tuple(parts)
        offsets = np.cumsum([0] + [p.shape[1] for p in parts])

        def backward(g):
            for part, start, stop in zip(parts, offsets[:-1], offsets[1:]):
                if part.requires_grad:
                    part._accumulate(g[:, start:stop])

        out._backward = backward
    return out


def slice_rows(a: Tensor, start: int, stop: int) -> Tensor:
    def da(g):
        full = np.zeros_like(a.data)
        full[start:stop] = g
        return full

    return _unary(a, a.data[start:stop].copy(), da)


def slice_cols(a: Tensor, start: int, stop: int) -> Tensor:
    def da(g):
        full = np.zeros_like(a.data)
        full[:, start:stop] = g
        return full

    return _unary(a, a.data[:, start:stop].copy(), da)


def gather_rows(a: Tensor, indices) -> Tensor:
    """Select rows by integer index; backward scatter-adds (embedding lookup)."""
    idx = np.asarray(indices, dtype=np.intp)
    if idx.ndim != 1:
        raise ShapeError("gather_rows needs a flat index list")
    if idx.size and (idx.min() < 0 or idx.max() >= a.shape[0]):
        raise IndexError(f"row index out of range for shape {a.shape}")
    out_data = a.data[idx].copy() if idx.size else np.zeros((0,) + a.shape[1:])

    def da(g):
        full = np.zeros_like(a.data)
        np.add.at(full, idx, g)
        return full

    return _unary(a, out_data, da)
