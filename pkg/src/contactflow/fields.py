"""Analytic scalar test functions and vector fields with closed-form derivatives."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

PointFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ScalarTestFunction:
    """A non-negative C^2 function with analytic gradient and Hessian.

    ``value`` maps ``(N, dim)`` points to ``(N,)``; ``gradient`` to ``(N, dim)``;
    ``hessian`` to ``(N, dim, dim)``.  ``c2_bound`` majorises
    ``max(|phi|, |grad phi|, ||hess phi||)`` on the closed domain.
    """

    name: str
    value: PointFn
    gradient: PointFn
    hessian: PointFn
    c2_bound: float


@dataclass(frozen=True)
class VectorField:
    """A C^1 vector field with analytic Jacobian ``J[..., i, j] = d g_i / d x_j``.

    ``tangential`` records that ``g . nu = 0`` on the boundary.  ``sup_norm``
    is an upper bound for ``|g|``.
    """

    name: str
    value: PointFn
    jacobian: PointFn
    tangential: bool = False
    sup_norm: float = 1.0
    gradient_bound: float | None = None

    def divergence(self, x: np.ndarray) -> np.ndarray:
        J = self.jacobian(x)
        return np.trace(J, axis1=-2, axis2=-1)
