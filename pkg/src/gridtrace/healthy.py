"""Recovery of the pre-event trajectory from partial observations.

Before any disturbance acts, every vertex follows the homogeneous dynamics
fixed by the initial displacement and velocity.  Fitting those two vectors to
the observed rows over the quiet window therefore reconstructs the whole
network trajectory, including the rows that were never measured.  The fit
minimises the time-integrated squared mismatch on the observed rows; with a
strategic observation set the minimiser is unique.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import (
    GRID_CONSISTENCY_TOL,
    Observations,
    StateTrajectory,
    TimeGrid,
    modal_envelopes,
    modal_homogeneous_solution,
    simulate_forward,
)
from .errors import NumericalError
from .spectral import SpectralDecomposition, first_nonstrategic_cluster

DEFAULT_RIDGE_SCALE = 1e-12


@dataclass(frozen=True)
class GradientSystem:
    """Normal equations of the quiet-window least-squares fit.

    The unknown vector stacks the modal initial positions followed by the
    modal initial velocities, both in flat mode order (clusters concatenated,
    columns within a cluster in eigendecomposition order).
    """

    matrix: np.ndarray
    rhs: np.ndarray
    cluster_index: np.ndarray

    @property
    def size(self) -> int:
        return self.matrix.shape[0]


def _trapezoid_weights(times: np.ndarray) -> np.ndarray:
    w = np.full(times.size, times[1] - times[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    return w


def _check_alignment(obs: Observations, grid: TimeGrid) -> None:
    if obs.times.size != grid.steps + 1:
        raise ValueError(
            f"observations carry {obs.times.size} samples but the grid has {grid.steps + 1}"
        )
    if np.abs(obs.times - grid.times).max() > GRID_CONSISTENCY_TOL:
        raise ValueError("observation times do not lie on the simulation grid")


def _window_baseline(baseline, n_obs: int, grid: TimeGrid) -> np.ndarray:
    window = grid.healthy_steps + 1
    if baseline is None:
        return np.zeros((n_obs, window))
    baseline = np.asarray(baseline, dtype=float)
    if baseline.shape == (n_obs, grid.steps + 1):
        return baseline[:, :window]
    if baseline.shape == (n_obs, window):
        return baseline
    raise ValueError(
        f"baseline must cover the observed rows over the quiet window, got {baseline.shape}"
    )


def assemble_gradient_system(
    spec: SpectralDecomposition,
    eta: float,
    obs: Observations,
    grid: TimeGrid,
    baseline=None,
) -> GradientSystem:
    """Build the normal equations for the quiet-window state fit.

    ``baseline`` is the response to any known pre-event forcing at the
    observed rows; it is subtracted from the data so that only the
    homogeneous part remains to be explained.
    """
    _check_alignment(obs, grid)
    window = grid.healthy_steps + 1
    times = grid.times[:window]
    weights = _trapezoid_weights(times)

    rows = [v - 1 for v in obs.vertices]
    v_obs = spec.vectors[rows, :]
    target = obs.values[:, :window] - _window_baseline(baseline, len(rows), grid)

    env_a, env_b = modal_envelopes(spec.omegas, eta, times)
    # Pairwise window integrals of the envelope products, one entry per
    # cluster pair; the flat-mode system inherits them through cluster_index.
    int_aa = (env_a * weights) @ env_a.T
    int_ab = (env_a * weights) @ env_b.T
    int_bb = (env_b * weights) @ env_b.T

    kidx = np.repeat(np.arange(spec.n_clusters), spec.multiplicities)
    gram = v_obs.T @ v_obs
    pairs = np.ix_(kidx, kidx)
    top = np.hstack([gram * int_aa[pairs], gram * int_ab[pairs]])
    bottom = np.hstack([gram * int_ab[pairs].T, gram * int_bb[pairs]])
    matrix = np.vstack([top, bottom])

    proj_a = target @ (env_a * weights).T
    proj_b = target @ (env_b * weights).T
    rhs = np.concatenate(
        [
            np.einsum("np,np->p", v_obs, proj_a[:, kidx]),
            np.einsum("np,np->p", v_obs, proj_b[:, kidx]),
        ]
    )
    return GradientSystem(matrix=matrix, rhs=rhs, cluster_index=kidx)


@dataclass(frozen=True)
class HealthyFit:
    """Initial state recovered from the quiet window."""

    modal_positions: np.ndarray
    modal_velocities: np.ndarray
    x0: np.ndarray
    v0: np.ndarray
    strategic: bool
    regularized: bool
    residual_rms: float


def identify_initial_conditions(
    spec: SpectralDecomposition,
    eta: float,
    obs: Observations,
    grid: TimeGrid,
    baseline=None,
    ridge: float | None = None,
) -> HealthyFit:
    """Fit initial displacement and velocity to the observed quiet window.

    When the observation set is not strategic the normal equations are
    singular and a small ridge term selects one representative minimiser;
    the returned fit is flagged accordingly.
    """
    system = assemble_gradient_system(spec, eta, obs, grid, baseline)
    strategic = first_nonstrategic_cluster(spec, obs.vertices) is None

    solution = None
    regularized = False
    if strategic:
        try:
            np.linalg.cholesky(system.matrix)
            solution = np.linalg.solve(system.matrix, system.rhs)
        except np.linalg.LinAlgError:
            solution = None
    if solution is None:
        regularized = True
        lam = ridge if ridge is not None else (
            DEFAULT_RIDGE_SCALE * np.trace(system.matrix) / system.size
        )
        try:
            solution = np.linalg.solve(
                system.matrix + lam * np.eye(system.size), system.rhs
            )
        except np.linalg.LinAlgError as exc:
            raise NumericalError("quiet-window normal equations could not be solved") from exc

    n = spec.n
    y0, yd0 = solution[:n], solution[n:]
    x0 = spec.vectors @ y0
    v0 = spec.vectors @ yd0

    window = grid.healthy_steps + 1
    rows = [v - 1 for v in obs.vertices]
    predicted = modal_homogeneous_solution(spec, eta, x0, v0, grid.times[:window]).values[rows]
    predicted += _window_baseline(baseline, len(rows), grid)
    residual_rms = float(np.sqrt(np.mean((predicted - obs.values[:, :window]) ** 2)))

    return HealthyFit(
        modal_positions=y0,
        modal_velocities=yd0,
        x0=x0,
        v0=v0,
        strategic=strategic,
        regularized=regularized,
        residual_rms=residual_rms,
    )


def compute_healthy_state(
    spec: SpectralDecomposition,
    eta: float,
    fit: HealthyFit,
    grid: TimeGrid,
    lap: np.ndarray | None = None,
    forcing: np.ndarray | None = None,
    substeps: int = 4,
) -> StateTrajectory:
    """Extend the fitted pre-event state over the whole horizon.

    With no known forcing this is the closed-form homogeneous solution; a
    known source adds its zero-state response integrated on a refined grid.
    """
    free = modal_homogeneous_solution(spec, eta, fit.x0, fit.v0, grid.times)
    if forcing is None:
        return free
    if lap is None:
        raise ValueError("the coupling matrix is required when forcing is given")
    driven = simulate_forward(lap, eta, forcing, grid, substeps=substeps)
    return StateTrajectory(
        times=grid.times,
        values=free.values + driven.values,
        velocities=free.velocities + driven.velocities,
    )
