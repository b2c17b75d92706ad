"""Reconstruction of unobserved motion and identification of its sources.

After detection, the observed rows carry a residual (data minus healthy
prediction) that is driven by the disturbance through the network coupling.
Two routes recover what happened at the unobserved vertices:

* With a dominantly absorbent observation set, the coupling block between
  observed and unobserved vertices has full column rank and the unobserved
  residuals follow from a per-time least-squares solve.
* With a merely absorbent set, the unobserved residuals are expanded in a
  shifted Legendre basis and fitted through a regularized least-squares
  problem; the penalty keeps the expansion quiet over the pre-event window.

Either way, the disturbance series itself is then recovered by a quadrature
scheme built on triangular impulse-response weights.  Multiplying the
residual equation by the triangle supported on one step pair and integrating
removes every derivative of the reconstructed states; a quadrature rule that
is exact for quadratics turns the result into a tridiagonal system for the
forcing samples.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre as npleg

from .detection import DetectionReport
from .dynamics import Observations, StateTrajectory, TimeGrid
from .errors import NotAbsorbentError, NumericalError
from .graphs import Graph, VertexPartition, is_absorbent, laplacian, laplacian_submatrix
from .linalg import RANK_TOL, finite_diff, matrix_rank, solve_reconstruction_toeplitz

DEFAULT_ORDER = 8
DEFAULT_ALPHA = 1e-2
DEFAULT_RATIO = 3.0
ONSET_BAND_MARGIN = 5.0
MIN_EXTENSION_STEPS = 20


@dataclass(frozen=True)
class ResidualData:
    """Forcing-balance data extracted from the observed rows.

    ``values[j, i]`` holds, for observed vertex ``vertices[j]`` at time
    ``times[i]``, the second derivative plus damping term of the observed
    residual minus the coupling contribution of the other observed rows.
    What remains balances the coupling of the unobserved rows plus any
    forcing applied directly at the observed vertex.
    """

    vertices: tuple[int, ...]
    start_index: int
    end_index: int
    times: np.ndarray
    values: np.ndarray
    observed_residuals: np.ndarray


def residual_data(
    obs: Observations,
    healthy: StateTrajectory,
    lap: np.ndarray,
    eta: float,
    grid: TimeGrid,
    start_index: int,
    end_index: int,
) -> ResidualData:
    """Differentiate the observed residuals into forcing-balance form.

    Derivatives are taken on the full observation record so that interior
    stencils cover the requested range ``(start_index, end_index]``.
    """
    if end_index <= start_index:
        raise ValueError("end_index must exceed start_index")
    if end_index > grid.steps:
        raise ValueError("end_index is beyond the simulation horizon")
    if obs.times.size < 3:
        raise ValueError("residual data needs at least three samples")

    rows = [v - 1 for v in obs.vertices]
    xr = obs.values - healthy.values[rows]
    vel = finite_diff(xr, grid.dt, order=1)
    acc = finite_diff(xr, grid.dt, order=2)
    lap_ss = lap[np.ix_(rows, rows)]
    balance = acc + eta * vel - lap_ss @ xr

    window = slice(start_index + 1, end_index + 1)
    return ResidualData(
        vertices=obs.vertices,
        start_index=start_index,
        end_index=end_index,
        times=grid.times[window].copy(),
        values=balance[:, window].copy(),
        observed_residuals=xr,
    )


def identify_da(
    rd: ResidualData,
    lap: np.ndarray,
    partition: VertexPartition,
    tol: float = RANK_TOL,
) -> np.ndarray:
    """Recover unobserved residuals by a per-time least-squares solve.

    Requires a dominantly absorbent observation set so that the coupling
    block has full column rank and the solve is unambiguous.
    """
    if not partition.unobserved:
        return np.zeros((0, rd.values.shape[1]))
    sub = laplacian_submatrix(lap, rd.vertices, partition.unobserved)
    n_unobs = len(partition.unobserved)
    rank = matrix_rank(sub, tol=tol)
    if rank < n_unobs or len(rd.vertices) < n_unobs:
        raise NotAbsorbentError(
            "observation set is not dominantly absorbent: the coupling block "
            f"has rank {rank} for {n_unobs} unobserved vertices; "
            "use the expansion-based identification instead"
        )
    return np.linalg.pinv(sub) @ rd.values


@dataclass(frozen=True)
class LegendreBasis:
    """Shifted Legendre polynomials tabulated on a sampling grid.

    The polynomials are orthogonal on ``(0, horizon)`` with squared norms
    ``horizon / (2 l + 1)``; ``table[l, i]`` stores the value of degree ``l``
    at ``times[i]``.
    """

    order: int
    horizon: float
    times: np.ndarray
    table: np.ndarray
    norms: np.ndarray

    def evaluate(self, t: np.ndarray) -> np.ndarray:
        """Values of every basis polynomial at arbitrary times."""
        s = 2.0 * np.asarray(t, dtype=float) / self.horizon - 1.0
        return npleg.legvander(s, self.order).T

    def gram(self, horizon: float) -> np.ndarray:
        """Trapezoid Gram matrix of the basis restricted to ``(0, horizon)``.

        On a strict sub-interval the polynomials are not orthogonal, so the
        full matrix is kept.
        """
        mask = self.times <= horizon + 1e-12
        if mask.sum() < 2:
            raise ValueError("gram horizon leaves fewer than two samples")
        sub = self.table[:, mask]
        w = np.full(mask.sum(), self.times[1] - self.times[0])
        w[0] *= 0.5
        w[-1] *= 0.5
        return (sub * w) @ sub.T

    def project(self, series: np.ndarray) -> np.ndarray:
        """Continuous-projection coefficients of a sampled signal."""
        series = np.asarray(series, dtype=float)
        if series.shape[-1] != self.times.size:
            raise ValueError("series does not match the basis sampling")
        w = np.full(self.times.size, self.times[1] - self.times[0])
        w[0] *= 0.5
        w[-1] *= 0.5
        return (series * w) @ self.table.T / self.norms

    def synthesize(self, coefficients: np.ndarray) -> np.ndarray:
        """Sampled signal represented by expansion coefficients."""
        return np.asarray(coefficients, dtype=float) @ self.table


def legendre_basis(order: int, horizon: float, grid: TimeGrid) -> LegendreBasis:
    if order < 0:
        raise ValueError("order must be non-negative")
    if horizon <= 0.0:
        raise ValueError("horizon must be positive")
    count = int(round(horizon / grid.dt))
    if abs(count * grid.dt - horizon) > 1e-9 * max(1.0, horizon) or count > grid.steps:
        raise ValueError("horizon must be a grid time within the simulation window")
    times = grid.times[: count + 1]
    s = 2.0 * times / horizon - 1.0
    table = npleg.legvander(s, order).T
    norms = horizon / (2.0 * np.arange(order + 1) + 1.0)
    return LegendreBasis(order=order, horizon=horizon, times=times, table=table, norms=norms)


def assemble_expansion_system(
    lap: np.ndarray,
    partition: VertexPartition,
    basis: LegendreBasis,
    rd: ResidualData,
) -> tuple[np.ndarray, np.ndarray]:
    """Stack the residual balance into one linear system for the coefficients.

    Row blocks run over observed vertices with time advancing inside each
    block; column blocks run over unobserved vertices with the polynomial
    degree advancing inside each block.
    """
    if basis.times.size <= rd.end_index:
        raise ValueError("basis table does not cover the identification range")
    sub = laplacian_submatrix(lap, rd.vertices, partition.unobserved)
    p_block = basis.table[:, rd.start_index + 1 : rd.end_index + 1].T
    return np.kron(sub, p_block), rd.values.reshape(-1)


def solve_regularized(
    c_matrix: np.ndarray,
    data: np.ndarray,
    alpha: float,
    basis: LegendreBasis,
    healthy_horizon: float,
) -> np.ndarray:
    """Solve the coefficient fit with a quiet-window penalty.

    The penalty charges each unobserved vertex for expansion energy inside
    ``(0, healthy_horizon)``, where the residual is known to vanish.  For
    positive ``alpha`` the normal matrix is positive definite; this is
    asserted through its Cholesky factorization.
    """
    if alpha <= 0.0:
        raise ValueError("alpha must be positive")
    width = basis.order + 1
    if c_matrix.shape[1] % width:
        raise ValueError("system width is not a multiple of the basis size")
    n_unobs = c_matrix.shape[1] // width
    normal = c_matrix.T @ c_matrix + alpha * np.kron(np.eye(n_unobs), basis.gram(healthy_horizon))
    try:
        np.linalg.cholesky(normal)
    except np.linalg.LinAlgError as exc:
        raise NumericalError("regularized normal matrix is not positive definite") from exc
    coefficients = np.linalg.solve(normal, c_matrix.T @ data)
    return coefficients.reshape(n_unobs, width)


@dataclass(frozen=True)
class LocalizationResult:
    """Vertices whose reconstructed residual behaves like a source."""

    vertices: tuple[int, ...]
    status: str
    onset_indices: tuple[int | None, ...]
    magnitudes: tuple[float, ...]
    bands: tuple[float, ...]


def localize(
    candidates: tuple[int, ...],
    residuals: np.ndarray,
    grid: TimeGrid,
    window: int = 10,
    rho: float = DEFAULT_RATIO,
) -> LocalizationResult:
    """Flag source vertices from reconstructed residual series.

    A vertex whose row is directly forced leaves the quiet band before the
    purely coupled rows and with larger magnitude.  The rule flags every row
    that crosses its band within ``window`` steps of the earliest crossing
    and whose magnitude reaches ``rho`` times the median of the remaining
    rows.  ``residuals`` must start at time zero so the quiet interval can
    calibrate the bands.
    """
    residuals = np.atleast_2d(np.asarray(residuals, dtype=float))
    if len(candidates) != residuals.shape[0]:
        raise ValueError("one residual row per candidate vertex is required")
    if residuals.shape[1] <= grid.healthy_steps + 1:
        raise ValueError("residual series must extend past the quiet interval")
    if not candidates:
        return LocalizationResult((), "quiet", (), (), ())

    scale = max(float(np.abs(residuals).max()), 1.0)
    quiet = residuals[:, : grid.healthy_steps + 1]
    bands = ONSET_BAND_MARGIN * quiet.std(axis=1) + 1e-12 * scale

    onsets: list[int | None] = []
    for row, band in zip(np.abs(residuals), bands):
        hits = np.nonzero(row[grid.healthy_steps + 1 :] > band)[0]
        onsets.append(grid.healthy_steps + 1 + int(hits[0]) if hits.size else None)

    crossed = [i for i, onset in enumerate(onsets) if onset is not None]
    if not crossed:
        return LocalizationResult(
            (), "quiet", tuple(onsets), tuple([0.0] * len(candidates)), tuple(bands)
        )

    first = min(onsets[i] for i in crossed)
    stop = min(first + window + 1, residuals.shape[1])
    magnitudes = np.abs(residuals[:, first:stop]).max(axis=1)

    early = [i for i in crossed if onsets[i] <= first + window]
    rest = [i for i in range(len(candidates)) if i not in early]
    # Rows that stay quiet provide the passive reference level; when every
    # row crosses early the weakest early row takes that role instead.
    if rest:
        reference = float(np.median(magnitudes[rest]))
    else:
        reference = float(magnitudes[early].min()) if len(early) > 1 else 0.0
    flagged = [i for i in early if magnitudes[i] >= rho * reference]
    if not flagged:
        flagged = early

    return LocalizationResult(
        vertices=tuple(candidates[i] for i in sorted(flagged)),
        status="localized",
        onset_indices=tuple(onsets),
        magnitudes=tuple(float(m) for m in magnitudes),
        bands=tuple(float(b) for b in bands),
    )


def triangle_quadrature(g_a: float, g_mid: float, g_b: float, a: float, b: float) -> float:
    """Integral of a function against the triangle weight on ``(a, b)``.

    The triangle vanishes at both ends and dips to ``-(b - a)/4`` at the
    midpoint.  With samples of the integrand at the ends and the midpoint
    the rule is exact whenever the integrand is a polynomial of degree at
    most two.
    """
    if b <= a:
        raise ValueError("interval must satisfy a < b")
    mid_weight = -(b - a) / 4.0
    return (g_a + 10.0 * g_mid + g_b) / 12.0 * mid_weight * (b - a) / 2.0


def passivity_constant(degree: int, dt: float) -> float:
    """Gain linking a passive vertex's first response to its neighbor average.

    At the first active step a vertex without direct forcing responds with
    this fraction of the mean residual of its neighbors.
    """
    if degree < 1:
        raise ValueError("degree must be at least one")
    if dt <= 0.0:
        raise ValueError("dt must be positive")
    return 1.0 / (1.0 + 12.0 / (degree * dt * dt))


def _exact_triangle_values(eta: float, dt: float) -> tuple[float, float, float]:
    """Center value and end slopes of the exact damped impulse response."""
    c = np.expm1(eta * dt) / (eta * np.expm1(2.0 * eta * dt))
    center = -c * np.expm1(eta * dt)
    slope_left = -c * eta
    slope_right = np.exp(eta * dt) - c * eta * np.exp(2.0 * eta * dt)
    return float(center), float(slope_left), float(slope_right)


def reconstruct_disturbance(
    xr_field: np.ndarray,
    lap: np.ndarray,
    grid: TimeGrid,
    start_index: int,
    end_index: int,
    vertex: int,
    eta: float | None = None,
    phi_form: str = "affine",
) -> np.ndarray:
    """Recover the forcing series at one vertex from the full residual field.

    ``xr_field`` must carry every vertex row over grid indices up to
    ``end_index + 1``.  Each time step contributes one equation obtained by
    integrating the residual dynamics against a triangle weight; the
    resulting tridiagonal system starts from zero forcing at the window
    start and holds the final sample flat one step beyond the window end.
    The affine triangle is the consistent default; the exact damped form is
    available for diagnostics and requires ``eta``.
    """
    if end_index <= start_index:
        raise ValueError("empty reconstruction range")
    if xr_field.shape[1] <= end_index + 1:
        raise ValueError("residual field must extend one step past end_index")
    if not 1 <= vertex <= xr_field.shape[0]:
        raise ValueError(f"vertex {vertex} outside the field")
    dt = grid.dt
    if phi_form == "affine":
        center = -dt / 2.0
        slope_left, slope_right = -0.5, 0.5
    elif phi_form == "exact":
        if eta is None or eta <= 0.0:
            raise ValueError("the exact triangle needs a positive eta")
        center, slope_left, slope_right = _exact_triangle_values(eta, dt)
    else:
        raise ValueError(f"unknown phi_form {phi_form!r}")

    m = vertex - 1
    idx = np.arange(start_index + 1, end_index + 1)
    left, mid, right = xr_field[:, idx - 1], xr_field[:, idx], xr_field[:, idx + 1]
    bracket = right[m] * slope_right - left[m] * slope_left
    coupling = lap[m] @ (left + 10.0 * mid + right)
    data = mid[m] - bracket - (dt * center / 12.0) * coupling
    return solve_reconstruction_toeplitz(12.0 / (dt * center) * data)


@dataclass(frozen=True)
class IdentificationResult:
    """Everything recovered after a detection: states, sources, forcings."""

    mode: str
    observed: tuple[int, ...]
    unobserved: tuple[int, ...]
    start_index: int
    end_index: int
    times: np.ndarray
    residuals: np.ndarray
    localization: LocalizationResult
    disturbances: np.ndarray
    diagnostics: dict

    @property
    def localized(self) -> tuple[int, ...]:
        return self.localization.vertices


def _duplicate_columns(sub: np.ndarray, labels: tuple[int, ...]) -> list[tuple[int, int]]:
    pairs = []
    for i in range(len(labels)):
        for j in range(i + 1, len(labels)):
            if np.array_equal(sub[:, i], sub[:, j]):
                pairs.append((labels[i], labels[j]))
    return pairs


def identify(
    graph: Graph,
    eta: float,
    obs: Observations,
    healthy: StateTrajectory,
    grid: TimeGrid,
    report: DetectionReport,
    mode: str = "auto",
    order: int = DEFAULT_ORDER,
    alpha: float = DEFAULT_ALPHA,
    extension_steps: int | None = None,
    rho: float = DEFAULT_RATIO,
) -> IdentificationResult:
    """Run the full post-detection pipeline.

    Picks the per-time solve when the observation set is dominantly
    absorbent and the regularized expansion otherwise, then localizes
    source vertices and reconstructs a forcing series for every unobserved
    vertex.
    """
    if not report.detected:
        raise ValueError("nothing to identify: no disturbance was detected")
    lap = laplacian(graph)
    partition = VertexPartition.from_observed(graph.n, obs.vertices)
    sub = laplacian_submatrix(lap, obs.vertices, partition.unobserved)
    n_unobs = len(partition.unobserved)

    mode = {"da": "dominant", "absorbent": "expansion"}.get(mode, mode)
    if mode == "auto":
        dominant = (
            n_unobs == 0
            or (len(obs.vertices) >= n_unobs and matrix_rank(sub) == n_unobs)
        )
        mode = "dominant" if dominant else "expansion"
    if mode not in ("dominant", "expansion"):
        raise ValueError(f"unknown identification mode {mode!r}")

    window = report.window
    extension = extension_steps if extension_steps is not None else max(
        MIN_EXTENSION_STEPS, 2 * window
    )
    start_index = grid.healthy_steps
    end_index = min(report.onset_index + extension, grid.steps - 1)
    if end_index <= start_index:
        raise ValueError("identification range collapsed; extend the horizon")

    diagnostics: dict = {
        "mode": mode,
        "coupling_rank": int(matrix_rank(sub)) if n_unobs else 0,
        "duplicate_columns": _duplicate_columns(sub, partition.unobserved),
    }

    if mode == "dominant":
        rd_full = residual_data(obs, healthy, lap, eta, grid, 0, end_index + 1)
        recovered = identify_da(rd_full, lap, partition)
        series = np.hstack([np.zeros((n_unobs, 1)), recovered])
        if n_unobs:
            diagnostics["condition"] = float(np.linalg.cond(sub))
        rd = residual_data(obs, healthy, lap, eta, grid, start_index, end_index)
    else:
        if not is_absorbent(graph, obs.vertices):
            raise NotAbsorbentError(
                "expansion-based identification needs an absorbent observation "
                "set: every unobserved vertex must be adjacent to an observed one"
            )
        rd = residual_data(obs, healthy, lap, eta, grid, start_index, end_index)
        horizon = float(grid.times[end_index])
        basis = legendre_basis(order, horizon, grid)
        c_matrix, data = assemble_expansion_system(lap, partition, basis, rd)
        coefficients = solve_regularized(c_matrix, data, alpha, basis, grid.healthy)
        inside = basis.synthesize(coefficients)
        beyond = coefficients @ basis.evaluate(grid.times[end_index + 1 : end_index + 2])
        series = np.hstack([inside, beyond])
        diagnostics.update(
            {
                "system_rank": int(matrix_rank(c_matrix)),
                "condition": float(np.linalg.cond(c_matrix)),
                "alpha": alpha,
                "order": order,
                "expansion_horizon": horizon,
            }
        )

    localization = localize(partition.unobserved, series, grid, window=window, rho=rho)

    xr_field = np.zeros((graph.n, end_index + 2))
    rows = [v - 1 for v in obs.vertices]
    xr_field[rows] = rd.observed_residuals[:, : end_index + 2]
    for j, label in enumerate(partition.unobserved):
        xr_field[label - 1] = series[j]

    count = end_index - start_index
    disturbances = np.zeros((n_unobs, count))
    for j, label in enumerate(partition.unobserved):
        # The exact impulse-response weights keep the damping term inside
        # the integral identity; with the affine triangle the dropped term
        # grows into an order-eta relative bias over long windows.
        disturbances[j] = reconstruct_disturbance(
            xr_field, lap, grid, start_index, end_index, label, eta=eta, phi_form="exact"
        )

    return IdentificationResult(
        mode=mode,
        observed=obs.vertices,
        unobserved=partition.unobserved,
        start_index=start_index,
        end_index=end_index,
        times=grid.times[start_index + 1 : end_index + 1].copy(),
        residuals=series[:, start_index + 1 : end_index + 1].copy(),
        localization=localization,
        disturbances=disturbances,
        diagnostics=diagnostics,
    )
