"""Finite-difference helpers shared by the grid modules."""
import numpy as np


def partial(values, h, axis):
    """Second-order derivative along a grid axis (central inside, one-sided at the edges)."""
    return np.gradient(values, h, axis=axis, edge_order=2)


def interior(values, margin=1, ndim=2):
    """Drop `margin` nodes at both ends of the first `ndim` axes."""
    index = tuple(slice(margin, -margin) if margin else slice(None) for _ in range(ndim))
    return values[index]


def max_interior(values, margin=1, ndim=2):
    core = interior(np.abs(values), margin, ndim)
    if core.size == 0:
        return 0.0
    return float(np.max(core))


def wedge(alpha, beta):
    """(alpha ^ beta)(d1, d2) for 1-forms given by their two axis components (stacked first)."""
    return alpha[0] * beta[1] - alpha[1] * beta[0]


def matrix_wedge(A, B):
    """Wedge of matrix-valued 1-forms: A(d1) B(d2) - A(d2) B(d1)."""
    return A[0] @ B[1] - A[1] @ B[0]


def convergence_order(coarse, fine, ratio=2.0):
    """Observed order from residuals on two grids whose spacing differs by `ratio`."""
    if fine <= 0 or coarse <= 0:
        return float('inf')
    return float(np.log(coarse / fine) / np.log(ratio))
