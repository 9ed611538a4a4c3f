"""Dense 3x3 tensor algebra for the constitutive equations.

Tensors are NumPy arrays of shape ``(..., 3, 3)``. All functions broadcast over
the leading axes, so a batch of states can be advanced with one call.
"""

from __future__ import annotations

import numpy as np
import numpy.typing as npt

from viscofit.core.errors import NonPositiveDeterminantError, SingularTensorError

Tensor2 = npt.NDArray[np.float64]

IDENTITY: Tensor2 = np.eye(3)
# Relative tolerance for symmetry and unimodularity checks.
TOLERANCE = 1e-12


def identity(batch: int | None = None) -> Tensor2:
    """Return the identity tensor, optionally stacked ``batch`` times."""
    if batch is None:
        return np.eye(3)
    return np.broadcast_to(np.eye(3), (batch, 3, 3)).copy()


def det(a: Tensor2) -> npt.NDArray[np.float64] | float:
    """Determinant by the rule of Sarrus."""
    return (
        a[..., 0, 0] * (a[..., 1, 1] * a[..., 2, 2] - a[..., 1, 2] * a[..., 2, 1])
        - a[..., 0, 1] * (a[..., 1, 0] * a[..., 2, 2] - a[..., 1, 2] * a[..., 2, 0])
        + a[..., 0, 2] * (a[..., 1, 0] * a[..., 2, 1] - a[..., 1, 1] * a[..., 2, 0])
    )


def trace(a: Tensor2) -> npt.NDArray[np.float64] | float:
    """Sum of the diagonal."""
    return a[..., 0, 0] + a[..., 1, 1] + a[..., 2, 2]


def transpose(a: Tensor2) -> Tensor2:
    """Swap the last two axes."""
    return np.swapaxes(a, -1, -2)


def product(a: Tensor2, b: Tensor2) -> Tensor2:
    """Single contraction ``a · b``."""
    return np.matmul(a, b)


def sym(a: Tensor2) -> Tensor2:
    """Symmetric part."""
    return 0.5 * (a + transpose(a))


def deviator(a: Tensor2) -> Tensor2:
    """Return ``a - tr(a)/3 · 1``."""
    return a - (trace(a) / 3.0)[..., None, None] * IDENTITY


def frobenius_norm(a: Tensor2) -> npt.NDArray[np.float64] | float:
    """Square root of the sum of squared components."""
    return np.sqrt(np.sum(a * a, axis=(-2, -1)))


def _adjugate(a: Tensor2) -> Tensor2:
    adj = np.empty_like(a)
    adj[..., 0, 0] = a[..., 1, 1] * a[..., 2, 2] - a[..., 1, 2] * a[..., 2, 1]
    adj[..., 0, 1] = a[..., 0, 2] * a[..., 2, 1] - a[..., 0, 1] * a[..., 2, 2]
    adj[..., 0, 2] = a[..., 0, 1] * a[..., 1, 2] - a[..., 0, 2] * a[..., 1, 1]
    adj[..., 1, 0] = a[..., 1, 2] * a[..., 2, 0] - a[..., 1, 0] * a[..., 2, 2]
    adj[..., 1, 1] = a[..., 0, 0] * a[..., 2, 2] - a[..., 0, 2] * a[..., 2, 0]
    adj[..., 1, 2] = a[..., 0, 2] * a[..., 1, 0] - a[..., 0, 0] * a[..., 1, 2]
    adj[..., 2, 0] = a[..., 1, 0] * a[..., 2, 1] - a[..., 1, 1] * a[..., 2, 0]
    adj[..., 2, 1] = a[..., 0, 1] * a[..., 2, 0] - a[..., 0, 0] * a[..., 2, 1]
    adj[..., 2, 2] = a[..., 0, 0] * a[..., 1, 1] - a[..., 0, 1] * a[..., 1, 0]
    return adj


def inverse(a: Tensor2) -> Tensor2:
    """Closed-form inverse via the adjugate.

    Raises:
        SingularTensorError: if any determinant in the batch is zero.

    """
    d = det(a)
    if np.any(d == 0.0):
        msg = "Cannot invert a tensor with zero determinant."
        raise SingularTensorError(msg)
    return _adjugate(a) / np.asarray(d)[..., None, None]


def unimodular(a: Tensor2) -> Tensor2:
    """Return the volume-preserving part ``(det a)^(-1/3) · a``.

    Raises:
        NonPositiveDeterminantError: if any determinant is not positive.

    """
    d = det(a)
    if np.any(~(np.asarray(d) > 0.0)):
        msg = "Unimodular part requires det > 0."
        raise NonPositiveDeterminantError(msg)
    return a * (np.asarray(d) ** (-1.0 / 3.0))[..., None, None]


def is_positive_definite(a: Tensor2) -> npt.NDArray[np.bool_] | bool:
    """Sylvester's criterion on the leading principal minors of the symmetric part."""
    s = sym(a)
    m1 = s[..., 0, 0]
    m2 = s[..., 0, 0] * s[..., 1, 1] - s[..., 0, 1] * s[..., 1, 0]
    return (m1 > 0.0) & (m2 > 0.0) & (det(s) > 0.0)


def symmetry_residual(a: Tensor2) -> npt.NDArray[np.float64] | float:
    """Return ``‖a - aᵀ‖``."""
    return frobenius_norm(a - transpose(a))


def dyad(u: npt.ArrayLike, v: npt.ArrayLike) -> Tensor2:
    """Tensor product ``u ⊗ v`` of two vectors."""
    return np.outer(np.asarray(u, dtype=float), np.asarray(v, dtype=float))


def basis(i: int) -> npt.NDArray[np.float64]:
    """Cartesian unit vector ``e_i`` (1-based)."""
    e = np.zeros(3)
    e[i - 1] = 1.0
    return e
