"""Clustered spectrum of the network Laplacian.

The Laplacian eigenvalues are grouped into numerically distinct values
-omega_k^2 with omega_1 = 0 < omega_2 < ... ; each group keeps its
multiplicity and an orthonormal eigenvector block.  Modal coordinates,
closed-form envelopes and the initial-condition fit all work per group.

An observation set S is *strategic* when, for every group, the rows of
the eigenvector block restricted to S still have full column rank; this
is exactly the condition under which observed healthy data pins down
all modal initial conditions.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .linalg import _fix_signs, sym_eig

#: Relative gap under which neighboring eigenvalues merge into one group.
CLUSTER_TOL = 1e-8

#: Default rank tolerance for the strategic-set test.
STRATEGIC_TOL = 1e-8


@dataclass(frozen=True)
class SpectralDecomposition:
    """Grouped eigenstructure of a (negative semi-definite) Laplacian.

    ``vectors[:, offsets[k]:offsets[k] + multiplicities[k]]`` is the
    orthonormal eigenvector block of frequency ``omegas[k]``.
    """

    omegas: np.ndarray
    multiplicities: np.ndarray
    vectors: np.ndarray
    offsets: np.ndarray

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    @property
    def n_clusters(self) -> int:
        return self.omegas.size

    @property
    def max_multiplicity(self) -> int:
        return int(self.multiplicities.max())

    def group(self, k: int) -> np.ndarray:
        """Eigenvector block of cluster ``k`` (0-based), shape (n, m_k)."""
        start = self.offsets[k]
        return self.vectors[:, start : start + self.multiplicities[k]]


def decompose(lap: np.ndarray, cluster_tol: float = CLUSTER_TOL) -> SpectralDecomposition:
    """Group the eigendecomposition of a Laplacian by distinct eigenvalue.

    Raises ``ValueError`` when the zero mode is missing (input is not a
    Laplacian) or appears with multiplicity above one (graph would be
    disconnected).  Emits a warning when two neighboring groups are
    separated by less than 100x the clustering tolerance, since the
    grouping is then sensitive to roundoff.
    """
    if cluster_tol <= 0.0:
        raise ValueError(f"cluster_tol must be positive, got {cluster_tol}")
    eig = sym_eig(lap)
    values, vectors = eig.values, eig.vectors
    n = values.size
    scale = max(1.0, float(np.abs(values).max()))

    # Walk the descending eigenvalues and split on relative gaps.
    boundaries = [0]
    for j in range(1, n):
        if values[j - 1] - values[j] > cluster_tol * scale:
            boundaries.append(j)
    boundaries.append(n)

    omegas, mults, offsets, blocks = [], [], [], []
    for k in range(len(boundaries) - 1):
        lo, hi = boundaries[k], boundaries[k + 1]
        mean = float(values[lo:hi].mean())
        omegas.append(np.sqrt(max(0.0, -mean)))
        mults.append(hi - lo)
        offsets.append(lo)
        block = vectors[:, lo:hi]
        if hi - lo > 1:
            # Re-orthonormalize inside the degenerate group.
            block, _ = np.linalg.qr(block)
            block = _fix_signs(block)
        blocks.append(block)

    if abs(-(omegas[0] ** 2)) > cluster_tol * scale:
        raise ValueError(
            "zero eigenvalue missing: input does not look like a connected-graph Laplacian"
        )
    if mults[0] != 1:
        raise ValueError(
            f"zero eigenvalue has multiplicity {mults[0]}: graph is disconnected"
        )

    gaps = [
        omegas[k + 1] ** 2 - omegas[k] ** 2 for k in range(len(omegas) - 1)
    ]
    if gaps and min(gaps) < 100.0 * cluster_tol * scale:
        warnings.warn(
            "eigenvalue groups are nearly degenerate; clustering may be "
            "sensitive to the tolerance",
            stacklevel=2,
        )

    return SpectralDecomposition(
        omegas=np.array(omegas),
        multiplicities=np.array(mults, dtype=int),
        vectors=np.hstack(blocks),
        offsets=np.array(offsets, dtype=int),
    )


def first_nonstrategic_cluster(
    spec: SpectralDecomposition, observed, tol: float = STRATEGIC_TOL
) -> tuple[int, int] | None:
    """First cluster whose observed rows lose rank, as (index, rank), or None."""
    rows = np.asarray(sorted(observed), dtype=int) - 1
    if rows.size == 0:
        raise ValueError("observed set must be nonempty")
    if rows.min() < 0 or rows.max() >= spec.n:
        raise ValueError(f"observed vertices must lie in 1..{spec.n}")
    for k in range(spec.n_clusters):
        block = spec.group(k)[rows, :]
        # The eigenvector columns are unit vectors, so compare singular
        # values against an absolute cutoff: a block made of genuinely
        # zero components must not count as full rank just because its
        # own largest singular value is roundoff-sized.
        sigma = np.linalg.svd(block, compute_uv=False)
        rank = int(np.count_nonzero(sigma > tol))
        if rank < spec.multiplicities[k]:
            return k, rank
    return None


def is_strategic(spec: SpectralDecomposition, observed, tol: float = STRATEGIC_TOL) -> bool:
    """Can observations on this set pin down every modal coordinate?"""
    return first_nonstrategic_cluster(spec, observed, tol=tol) is None
