"""Adam optimizer over named parameters.

Weight decay is decoupled (applied directly to the parameter, not mixed
into the moment estimates). Frozen parameters keep their values even when
a gradient happens to be present; trainable parameters without a gradient
are an error because it means the loss never touched them.
"""

from __future__ import annotations

import numpy as np

from .params import Parameter


class Adam:
    def __init__(
        self,
        params: list[Parameter],
        lr: float = 1e-3,
        betas: tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-8,
        weight_decay: float = 0.0,
    ):
        self.params = list(params)
        self.lr = lr
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self._m = {id(p): np.zeros_like(p.data) for p in self.params}
        self._v = {id(p): np.zeros_like(p.data) for p in self.params}
        self._t = 0

    def step(self) -> None:
        self._t += 1
        t = self._t
        for p in self.params:
            if not p.trainable:
                continue
            g = p.tensor.grad
            if g is None:
                raise ValueError(f"trainable parameter {p.name!r} has no gradient")
            m = self._m[id(p)]
            v = self._v[id(p)]
            m *= self.beta1
            m += (1.0 - self.beta1) * g
            v *= self.beta2
            v += (1.0 - self.beta2) * g * g
            m_hat = m / (1.0 - self.beta1**t)
            v_hat = v / (1.0 - self.beta2**t)
            update = m_hat / (np.sqrt(v_hat) + self.eps)
            if self.weight_decay:
                update = update + self.weight_decay * p.data
            p.tensor.data = p.data - self.lr * update

    def zero_grad(self) -> None:
        for p in self.params:
            p.zero_grad()
