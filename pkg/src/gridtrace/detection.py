"""Disturbance detection by residual monitoring.

Once the pre-event state has been fitted, the observed rows are compared
against their predicted continuation.  A disturbance anywhere in the network
eventually bends the observed rows away from that prediction, so the first
time a windowed residual exceeds a threshold marks the disturbance onset, up
to one window of latency.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dynamics import Observations, StateTrajectory, TimeGrid

THRESHOLD_FLOOR = 1e-8
THRESHOLD_MARGIN = 5.0
DEFAULT_WINDOW = 10


@dataclass(frozen=True)
class DetectionReport:
    """Outcome of a residual scan.

    ``residuals[i]`` is the windowed residual for the window starting at
    ``start_times[i]``; the scan covers every admissible start, including the
    quiet interval used for calibration.
    """

    detected: bool
    onset_index: int | None
    onset_time: float | None
    threshold: float
    window: int
    start_times: np.ndarray
    residuals: np.ndarray


def _windowed_residual(deviation_sq: np.ndarray, dt: float, window: int) -> np.ndarray:
    """Mean over rows of the windowed L2 norms of the deviation.

    Each window integral uses the trapezoid rule on ``window + 1`` samples;
    a cumulative sum makes the sweep over all starts linear in the series
    length.
    """
    increments = 0.5 * dt * (deviation_sq[:, :-1] + deviation_sq[:, 1:])
    cumulative = np.concatenate(
        [np.zeros((deviation_sq.shape[0], 1)), np.cumsum(increments, axis=1)], axis=1
    )
    integrals = cumulative[:, window:] - cumulative[:, :-window]
    return np.sqrt(np.maximum(integrals, 0.0)).mean(axis=0)


def detect(
    obs: Observations,
    healthy: StateTrajectory,
    grid: TimeGrid,
    window: int = DEFAULT_WINDOW,
    epsilon: float | None = None,
) -> DetectionReport:
    """Scan for the first window where observations leave the healthy track.

    The scan starts at the end of the quiet interval.  With ``epsilon`` unset
    the threshold is calibrated from the quiet interval itself: five times
    the 99th percentile of its windowed residuals, with a small floor so an
    exactly reproduced track never triggers.
    """
    if window < 1:
        raise ValueError("window must be at least one step")
    if window > grid.steps - grid.healthy_steps:
        raise ValueError("window does not fit between the quiet interval and the horizon")
    if obs.times.size != grid.steps + 1:
        raise ValueError("observations do not cover the simulation grid")

    rows = [v - 1 for v in obs.vertices]
    deviation_sq = (obs.values - healthy.values[rows]) ** 2
    residuals = _windowed_residual(deviation_sq, grid.dt, window)
    start_times = grid.times[: residuals.size]

    if epsilon is None:
        quiet_count = grid.healthy_steps - window + 1
        if quiet_count <= 0:
            raise ValueError(
                "automatic thresholding needs at least one full window inside "
                "the quiet interval"
            )
        quiet = residuals[:quiet_count]
        epsilon = max(THRESHOLD_MARGIN * float(np.percentile(quiet, 99)), THRESHOLD_FLOOR)
    elif epsilon <= 0.0:
        raise ValueError("epsilon must be positive")

    onset_index = None
    scan = residuals[grid.healthy_steps :]
    hits = np.nonzero(scan > epsilon)[0]
    if hits.size:
        onset_index = grid.healthy_steps + int(hits[0])

    return DetectionReport(
        detected=onset_index is not None,
        onset_index=onset_index,
        onset_time=None if onset_index is None else float(grid.times[onset_index]),
        threshold=float(epsilon),
        window=window,
        start_times=start_times,
        residuals=residuals,
    )
