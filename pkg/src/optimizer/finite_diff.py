"""
Finite-Difference Gradients

Central differences with a one-sided fallback where a central stencil
would leave the box. Shared by hyperparameter fitting, acquisition
refinement and the gradient checks of the objective suite.
"""

from typing import Callable, Optional, Union

import numpy as np
from numpy.typing import NDArray


def fd_gradient(
    fun: Callable[[NDArray[np.float64]], float],
    x: NDArray[np.float64],
    step: Union[float, NDArray[np.float64]],
    lower: Optional[NDArray[np.float64]] = None,
    upper: Optional[NDArray[np.float64]] = None,
    f0: Optional[float] = None,
) -> NDArray[np.float64]:
    """
    Gradient of a scalar function by finite differences.

    Args:
        fun: Scalar function of a 1-d array
        x: Evaluation point
        step: Step size, scalar or per coordinate
        lower: Optional lower bounds; stencils never cross them
        upper: Optional upper bounds
        f0: fun(x) if already known (used by one-sided stencils)

    Returns:
        Gradient estimate with the shape of x
    """
    x = np.asarray(x, dtype=float)
    h = np.broadcast_to(np.asarray(step, dtype=float), x.shape)
    lo = np.full(x.shape, -np.inf) if lower is None else np.asarray(lower, dtype=float)
    hi = np.full(x.shape, np.inf) if upper is None else np.asarray(upper, dtype=float)
    grad = np.empty_like(x)
    for i in range(x.size):
        fwd_ok = x[i] + h[i] <= hi[i]
        bwd_ok = x[i] - h[i] >= lo[i]
        xp = x.copy()
        xm = x.copy()
        if fwd_ok and bwd_ok:
            xp[i] += h[i]
            xm[i] -= h[i]
            grad[i] = (fun(xp) - fun(xm)) / (2.0 * h[i])
            continue
        if f0 is None:
            f0 = fun(x)
        if fwd_ok:
            xp[i] += h[i]
            grad[i] = (fun(xp) - f0) / h[i]
        elif bwd_ok:
            xm[i] -= h[i]
            grad[i] = (f0 - fun(xm)) / h[i]
        else:
            # box narrower than the step
            grad[i] = 0.0
    return grad
