"""Central finite-difference verification of analytic gradients.

The step for element i is ``step * max(1, |theta_i|)`` so tiny and large
parameters get comparable relative perturbations. Relative error uses
max(|analytic|, |numeric|, 1e-8) in the denominator, so parameters the
loss never touches report zero error instead of 0/0.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .params import Parameter
from .tensor import Tensor

REL_ERR_FLOOR = 1e-8


@dataclass
class GradReport:
    name: str
    max_rel_err: float
    worst_index: tuple[int, ...]
    analytic: float
    numeric: float

    def __str__(self) -> str:
        return (
            f"{self.name}: max rel err {self.max_rel_err:.3e} at {self.worst_index} "
            f"(analytic {self.analytic:.6e}, numeric {self.numeric:.6e})"
        )


def gradcheck(
    loss_fn: Callable[[], Tensor],
    params: list[Parameter],
    step: float = 1e-3,
) -> list[GradReport]:
    """Compare analytic gradients of ``loss_fn`` against central differences.

    ``loss_fn`` must be deterministic and close over the given parameters;
    it is re-evaluated twice per parameter element.
    """
    if step <= 0:
        raise ValueError("step must be positive")

    for p in params:
        p.zero_grad()
    loss = loss_fn()
    if loss.size != 1:
        raise ValueError("loss_fn must return a scalar tensor")
    loss.backward()

    analytic = {}
    for p in params:
        if p.tensor.grad is None:
            analytic[id(p)] = np.zeros_like(p.data)
        else:
            analytic[id(p)] = p.tensor.grad.copy()

    reports = []
    for p in params:
        a = analytic[id(p)]
        flat = p.data.reshape(-1)
        worst = (0.0, (0,), 0.0, 0.0)
        for i in range(flat.size):
            original = flat[i]
            h = step * max(1.0, abs(original))
            flat[i] = original + h
            f_plus = loss_fn().item()
            flat[i] = original - h
            f_minus = loss_fn().item()
            flat[i] = original
            numeric = (f_plus - f_minus) / (2.0 * h)
            a_i = float(a.reshape(-1)[i])
            rel = abs(a_i - numeric) / max(abs(a_i), abs(numeric), REL_ERR_FLOOR)
            if rel >= worst[0]:
                worst = (rel, np.unravel_index(i, p.data.shape), a_i, numeric)
        reports.append(
            GradReport(
                name=p.name,
                max_rel_err=worst[0],
                worst_index=tuple(int(j) for j in worst[1]),
                analytic=worst[2],
                numeric=worst[3],
            )
        )
    return reports
