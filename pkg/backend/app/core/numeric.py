"""Dense complex linear-algebra kernels shared by the detectors and beamformers.

All kernels operate on double-precision complex arrays. Matrices may be passed
one at a time (shape ``rows x cols``) or as a stack with leading batch axes
(one matrix per subcarrier); the last two axes are always the matrix axes.

Regularized inverses are computed by Cholesky factorization followed by
forward/backward substitution. Inputs are Hermitian positive definite by
construction, so no pivoting is used and a failed factorization is reported as
``SingularMatrixError`` instead of being regularized further.
"""

from enum import Enum
from typing import Tuple, Union

import numpy as np
from scipy import linalg

from .errors import DimensionError, ParameterError, SingularMatrixError


class Side(str, Enum):
    """Which Gram product a regularized inverse is built from."""
    ROWS = "rows"   # (H H^H + rho I)^-1
    COLS = "cols"   # (H^H H + rho I)^-1


def as_complex(a) -> np.ndarray:
    """Return ``a`` as a complex128 array (no copy when already complex128)."""
    return np.asarray(a, dtype=np.complex128)


def herm(a: np.ndarray) -> np.ndarray:
    """Conjugate transpose over the last two axes."""
    return np.conj(np.swapaxes(a, -1, -2))


def gram(h: np.ndarray) -> np.ndarray:
    """Return the Gram matrix ``H^H H`` (cols x cols, Hermitian PSD)."""
    h = as_complex(h)
    return herm(h) @ h


def _cholesky(m: np.ndarray):
    try:
        return linalg.cho_factor(m, lower=True, check_finite=True)
    except (linalg.LinAlgError, ValueError) as exc:
        raise SingularMatrixError(f"Cholesky factorization failed for {m.shape[0]}x{m.shape[1]} matrix: {exc}") from exc


def _check_square(m: np.ndarray) -> None:
    if m.ndim < 2 or m.shape[-1] != m.shape[-2]:
        raise SingularMatrixError(f"expected square matrix, got shape {m.shape}")


def hpd_inverse(m: np.ndarray) -> np.ndarray:
    """Invert a Hermitian positive-definite matrix (or stack of matrices)."""
    m = as_complex(m)
    _check_square(m)
    out = np.empty_like(m)
    identity = np.eye(m.shape[-1], dtype=np.complex128)
    for index in np.ndindex(m.shape[:-2]):
        factor = _cholesky(m[index])
        inv = linalg.cho_solve(factor, identity)
        # restore exact Hermitian symmetry lost to rounding
        out[index] = 0.5 * (inv + herm(inv))
    return out


def hpd_solve(m: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``M x = b`` for Hermitian positive-definite ``M`` (stacks allowed).

    ``b`` may be a vector (``n``) or a matrix (``n x k``) per batch entry.
    """
    m = as_complex(m)
    b = as_complex(b)
    _check_square(m)
    vector = b.ndim == m.ndim - 1
    rhs = b[..., None] if vector else b
    out = np.empty(np.broadcast_shapes(m.shape[:-2], rhs.shape[:-2]) + rhs.shape[-2:], dtype=np.complex128)
    m = np.broadcast_to(m, out.shape[:-2] + m.shape[-2:])
    rhs = np.broadcast_to(rhs, out.shape)
    for index in np.ndindex(out.shape[:-2]):
        out[index] = linalg.cho_solve(_cholesky(m[index]), rhs[index])
    return out[..., 0] if vector else out


def reg_inverse(h: np.ndarray, rho: float, side: Union[Side, str]) -> np.ndarray:
    """Return ``(H H^H + rho I)^-1`` (side=rows) or ``(H^H H + rho I)^-1`` (side=cols)."""
    if not rho > 0:
        raise ParameterError(f"regularization rho must be positive, got {rho}")
    side = Side(side)
    h = as_complex(h)
    if side is Side.ROWS:
        product = h @ herm(h)
    else:
        product = herm(h) @ h
    product = product + rho * np.eye(product.shape[-1], dtype=np.complex128)
    return hpd_inverse(product)


def as_columns(h: np.ndarray, y) -> Tuple[np.ndarray, bool]:
    """Return ``y`` as a block of column vectors for ``h`` and whether it was a single vector.

    A vector has one axis fewer than ``h`` (e.g. ``S`` for an ``S x U`` matrix);
    anything else must already be a ``... x rows x K`` block.
    """
    y = as_complex(y)
    if y.ndim == h.ndim - 1:
        return y[..., None], True
    if y.ndim != h.ndim:
        raise DimensionError(f"data of shape {y.shape} does not fit matrix of shape {h.shape}")
    return y, False


def restore_columns(x: np.ndarray, vector: bool) -> np.ndarray:
    """Undo ``as_columns`` on a result block."""
    return x[..., 0] if vector else x
