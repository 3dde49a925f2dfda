"""Named trainable parameters and a minimal module registry.

A ``Parameter`` wraps a ``Tensor`` that always records gradients; the
``trainable`` flag only controls whether the optimizer updates it, so a
frozen parameter still participates in forward and backward passes.
``Module`` discovers parameters by walking attributes (including lists of
submodules) and derives each parameter's unique name from its attribute
path, mirroring how checkpoints and gradient reports refer to them.
"""

from __future__ import annotations

import numpy as np

from .tensor import Tensor


class Parameter:
    __slots__ = ("name", "tensor", "trainable")

    def __init__(self, data, name: str = "", trainable: bool = True):
        self.tensor = Tensor(np.array(data, dtype=np.float64), requires_grad=True)
        self.name = name
        self.trainable = trainable

    @property
    def data(self) -> np.ndarray:
        return self.tensor.data

    @property
    def grad(self):
        return self.tensor.grad

    def zero_grad(self) -> None:
        self.tensor.grad = None

    def __repr__(self) -> str:
        return f"Parameter({self.name or '<unnamed>'}, shape={self.tensor.shape}, trainable={self.trainable})"


class Module:
    """Base class whose attributes define the parameter tree."""

    def named_parameters(self, prefix: str = "") -> list[tuple[str, Parameter]]:
        found: list[tuple[str, Parameter]] = []
        for attr, value in vars(self).items():
            if attr.startswith("_"):
                continue  # private attributes are never parameters
            path = f"{prefix}{attr}"
            found.extend(_collect(path, value))
        names = [n for n, _ in found]
        if len(names) != len(set(names)):
            dupes = sorted({n for n in names if names.count(n) > 1})
            raise ValueError(f"duplicate parameter names: {dupes}")
        for name, param in found:
            param.name = name
        return found

    def parameters(self) -> list[Parameter]:
        return [p for _, p in self.named_parameters()]

    def freeze(self) -> None:
        for p in self.parameters():
            p.trainable = False

    def unfreeze(self) -> None:
        for p in self.parameters():
            p.trainable = True

    def zero_grad(self) -> None:
        for p in self.parameters():
            p.zero_grad()

    def state_arrays(self) -> dict[str, np.ndarray]:
        return {name: p.data for name, p in self.named_parameters()}

    def load_state_arrays(self, arrays: dict[str, np.ndarray]) -> None:
        for name, p in self.named_parameters():
            if name not in arrays:
                raise KeyError(f"missing tensor for parameter {name!r}")
            src = np.asarray(arrays[name], dtype=np.float64)
            if src.shape != p.data.shape:
                raise ValueError(
                    f"shape mismatch for {name!r}: checkpoint {src.shape} vs model {p.data.shape}"
                )
            p.tensor.data = src.copy()


def _collect(path: str, value) -> list[tuple[str, Parameter]]:
    if isinstance(value, Parameter):
        return [(path, value)]
    if isinstance(value, Module):
        return value.named_parameters(prefix=path + ".")
    if isinstance(value, (list, tuple)):
        found = []
        for i, item in enumerate(value):
            found.extend(_collect(f"{path}.{i}", item))
        return found
    return []
