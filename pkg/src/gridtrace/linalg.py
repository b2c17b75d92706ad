"""Dense linear algebra kernels used throughout the package.

Everything here is deterministic: same input bits, same output bits.
Eigenvectors follow a fixed sign convention (first nonzero component
positive) so that downstream artifacts are reproducible run to run.

The tridiagonal solver targets the near-Toeplitz system produced by the
disturbance reconstruction scheme,

        | 10  1          |
        |  1 10  1       |
        |       ..       |  x = rhs,
        |     1 10  1    |
        |        1  11   |

whose last diagonal entry absorbs a constant-extrapolation closure at
the right end of the reconstruction window.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError

#: Relative threshold under which a matrix is accepted as symmetric.
SYMMETRY_TOL = 1e-12

#: Default relative singular-value cutoff for rank decisions.
RANK_TOL = 1e-10


@dataclass(frozen=True)
class EigenResult:
    """Spectral factorization of a symmetric matrix.

    ``values`` are sorted in descending order and ``vectors[:, j]`` is the
    unit eigenvector for ``values[j]``.
    """

    values: np.ndarray
    vectors: np.ndarray


@dataclass(frozen=True)
class LstsqResult:
    """Least-squares solution plus a rank diagnosis of the design matrix."""

    x: np.ndarray
    rank: int
    rank_deficient: bool


def _fix_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip columns so the first nonzero component of each is positive."""
    fixed = vectors.copy()
    for j in range(fixed.shape[1]):
        col = fixed[:, j]
        scale = np.max(np.abs(col))
        if scale == 0.0:
            continue
        nonzero = np.nonzero(np.abs(col) > 1e-12 * scale)[0]
        if nonzero.size and col[nonzero[0]] < 0.0:
            fixed[:, j] = -col
    return fixed


def sym_eig(matrix: np.ndarray) -> EigenResult:
    """Eigendecomposition of a symmetric matrix.

    Parameters
    ----------
    matrix:
        Square array, symmetric within ``SYMMETRY_TOL`` relative to its
        largest entry.

    Returns
    -------
    EigenResult
        Eigenvalues in descending order with orthonormal, sign-fixed
        eigenvectors as columns.

    Raises
    ------
    ValueError
        If the input is not square or not symmetric.
    NumericalError
        If the underlying factorization fails to converge.
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    scale = max(1.0, float(np.max(np.abs(a)))) if a.size else 1.0
    if a.size and float(np.max(np.abs(a - a.T))) > SYMMETRY_TOL * scale:
        raise ValueError("matrix is not symmetric within tolerance")
    sym = 0.5 * (a + a.T)
    try:
        values, vectors = np.linalg.eigh(sym)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - hard to trigger
        raise NumericalError(f"eigendecomposition failed to converge: {exc}") from exc
    order = np.argsort(values)[::-1]
    return EigenResult(values=values[order], vectors=_fix_signs(vectors[:, order]))


def matrix_rank(matrix: np.ndarray, tol: float = RANK_TOL) -> int:
    """Numerical rank: singular values above ``tol`` times the largest one."""
    if tol <= 0.0:
        raise ValueError(f"rank tolerance must be positive, got {tol}")
    a = np.atleast_2d(np.asarray(matrix, dtype=float))
    if a.size == 0:
        return 0
    sigma = np.linalg.svd(a, compute_uv=False)
    if sigma[0] == 0.0:
        return 0
    return int(np.count_nonzero(sigma > tol * sigma[0]))


def solve_least_squares(
    a: np.ndarray,
    b: np.ndarray,
    ridge: float = 0.0,
    weights: np.ndarray | None = None,
    tol: float = RANK_TOL,
) -> LstsqResult:
    """Minimize ``|A x - b|^2 + ridge * |W x|^2``.

    ``weights`` is the diagonal of ``W`` (identity when omitted).  With
    ``ridge=0`` and a rank-deficient ``A`` the minimum-norm solution is
    returned and flagged; with ``ridge>0`` the augmented system
    ``[A; sqrt(ridge) W]`` is solved instead, which is always well posed
    for positive weights.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2:
        raise ValueError(f"design matrix must be 2-D, got shape {a.shape}")
    if b.shape[0] != a.shape[0]:
        raise ValueError(f"shape mismatch: A is {a.shape}, b is {b.shape}")
    if ridge < 0.0:
        raise ValueError(f"ridge must be nonnegative, got {ridge}")

    rank = matrix_rank(a, tol=tol)
    deficient = rank < a.shape[1]

    if ridge > 0.0:
        if weights is None:
            w = np.ones(a.shape[1])
        else:
            w = np.asarray(weights, dtype=float)
            if w.shape != (a.shape[1],):
                raise ValueError(
                    f"weights must have shape ({a.shape[1]},), got {w.shape}"
                )
        stacked = np.vstack([a, np.sqrt(ridge) * np.diag(w)])
        padded = np.concatenate([b, np.zeros((a.shape[1],) + b.shape[1:])])
        x, *_ = np.linalg.lstsq(stacked, padded, rcond=tol)
    else:
        x, *_ = np.linalg.lstsq(a, b, rcond=tol)
    return LstsqResult(x=x, rank=rank, rank_deficient=deficient)


def solve_reconstruction_toeplitz(rhs: np.ndarray) -> np.ndarray:
    """Solve the (1, 10, 1) tridiagonal system with final diagonal 11.

    Uses the standard forward-elimination / back-substitution recurrence;
    the matrix is strictly diagonally dominant, so no pivoting is needed.
    """
    d = np.asarray(rhs, dtype=float)
    if d.ndim != 1 or d.size == 0:
        raise ValueError(f"rhs must be a nonempty vector, got shape {d.shape}")
    n = d.size
    diag = np.full(n, 10.0)
    diag[-1] = 11.0

    # Forward sweep: eliminate the subdiagonal (all ones).
    upper = np.empty(n)
    work = np.empty(n)
    upper[0] = 1.0 / diag[0]
    work[0] = d[0] / diag[0]
    for i in range(1, n):
        denom = diag[i] - upper[i - 1]
        upper[i] = 1.0 / denom
        work[i] = (d[i] - work[i - 1]) / denom

    x = np.empty(n)
    x[-1] = work[-1]
    for i in range(n - 2, -1, -1):
        x[i] = work[i] - upper[i] * x[i + 1]
    return x


def finite_diff(series: np.ndarray, dt: float, order: int) -> np.ndarray:
    """First or second time derivative of a uniformly sampled series.

    Second-order centered stencils in the interior with one-sided stencils
    of matching order at the endpoints; both families reproduce
    polynomials up to degree two exactly.  Time runs along the last axis.
    """
    if order not in (1, 2):
        raise ValueError(f"order must be 1 or 2, got {order}")
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    f = np.asarray(series, dtype=float)
    n = f.shape[-1]
    if n < 3:
        raise ValueError(f"need at least 3 samples, got {n}")

    out = np.empty_like(f)
    if order == 1:
        out[..., 1:-1] = (f[..., 2:] - f[..., :-2]) / (2.0 * dt)
        out[..., 0] = (-3.0 * f[..., 0] + 4.0 * f[..., 1] - f[..., 2]) / (2.0 * dt)
        out[..., -1] = (3.0 * f[..., -1] - 4.0 * f[..., -2] + f[..., -3]) / (2.0 * dt)
        return out

    out[..., 1:-1] = (f[..., 2:] - 2.0 * f[..., 1:-1] + f[..., :-2]) / dt**2
    if n >= 4:
        out[..., 0] = (
            2.0 * f[..., 0] - 5.0 * f[..., 1] + 4.0 * f[..., 2] - f[..., 3]
        ) / dt**2
        out[..., -1] = (
            2.0 * f[..., -1] - 5.0 * f[..., -2] + 4.0 * f[..., -3] - f[..., -4]
        ) / dt**2
    else:
        # Three samples: the parabola through them has constant curvature.
        curv = (f[..., 0] - 2.0 * f[..., 1] + f[..., 2]) / dt**2
        out[..., 0] = curv
        out[..., -1] = curv
    return out
