"""Forward dynamics of the damped networked wave equation.

The state X(t) of the network obeys

    X'' + eta X' - L X = F(t),          X(0) = X0,  X'(0) = V0,

with L the (negative semi-definite) graph Laplacian and eta > 0 a uniform
damping rate.  In the eigenbasis of L every modal coordinate is an
independent damped oscillator

    y'' + eta y' + omega^2 y = f(t),

whose homogeneous solutions are spanned by two envelopes fixed by
y(0)=1, y'(0)=0 and y(0)=0, y'(0)=1.  With the discriminant
D = eta^2 - 4 omega^2 and r = (-eta + sqrt(D))/2, rb = -(eta + sqrt(D))/2:

    overdamped  (D > 0):  A = (rb e^{rt} - r e^{rb t}) / (rb - r)
                          B = (e^{rb t} - e^{rt}) / (rb - r)
    critical    (D = 0):  A = (1 + eta t / 2) e^{-eta t / 2}
                          B = t e^{-eta t / 2}
    oscillatory (D < 0):  A = e^{-eta t/2} (cos(st/2) + (eta/s) sin(st/2))
                          B = (2/s) e^{-eta t/2} sin(st/2),   s = sqrt(-D)

The derivative envelopes follow from the ODE itself: A' = -omega^2 B and
B' = A - eta B, so velocities come for free.

Numerical integration uses the classical fourth-order Runge-Kutta method
on the first-order system (X, X'), with forcing samples interpolated
linearly between grid points.  That interpolation caps the observable
convergence order at two whenever the forcing varies, which is all the
downstream identification machinery needs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .spectral import SpectralDecomposition

#: Discriminants smaller than this in magnitude use the critical branch.
CRITICAL_TOL = 1e-12

#: Relative slack when checking grid durations against step counts.
GRID_CONSISTENCY_TOL = 1e-9

DISTURBANCE_KINDS = ("sine_halfperiod", "step", "samples")


@dataclass(frozen=True)
class TimeGrid:
    """Uniform sampling of (0, T) with a designated healthy prefix (0, T0)."""

    dt: float
    steps: int
    healthy_steps: int

    def __post_init__(self):
        if self.dt <= 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if not 1 < self.healthy_steps < self.steps:
            raise ValueError(
                f"need 1 < healthy_steps < steps, got "
                f"healthy_steps={self.healthy_steps}, steps={self.steps}"
            )

    @classmethod
    def from_durations(cls, total: float, dt: float, healthy: float) -> "TimeGrid":
        if dt <= 0.0:
            raise ValueError(f"dt must be positive, got {dt}")
        steps = round(total / dt)
        healthy_steps = round(healthy / dt)
        for name, duration, count in (("T", total, steps), ("T0", healthy, healthy_steps)):
            if abs(count * dt - duration) > GRID_CONSISTENCY_TOL * max(1.0, abs(duration)):
                raise ValueError(f"{name}={duration} is not a whole number of steps of dt={dt}")
        return cls(dt=dt, steps=steps, healthy_steps=healthy_steps)

    @property
    def total(self) -> float:
        return self.steps * self.dt

    @property
    def healthy(self) -> float:
        return self.healthy_steps * self.dt

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.steps + 1) * self.dt


@dataclass(frozen=True)
class StateTrajectory:
    """States and velocities sampled on a common set of times."""

    times: np.ndarray
    values: np.ndarray
    velocities: np.ndarray

    def __post_init__(self):
        n_t = self.times.shape[0]
        if self.values.ndim != 2 or self.values.shape[1] != n_t:
            raise ValueError(
                f"values shape {self.values.shape} inconsistent with {n_t} samples"
            )
        if self.velocities.shape != self.values.shape:
            raise ValueError("velocities must match values in shape")
        if not (np.all(np.isfinite(self.values)) and np.all(np.isfinite(self.velocities))):
            raise ValueError("trajectory contains non-finite entries")

    @property
    def n(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class DisturbanceProfile:
    """Forcing applied to one vertex starting at a given onset time.

    ``sine_halfperiod`` ramps as amplitude * sin(pi (t - onset) / duration)
    after the onset; ``step`` jumps to the amplitude; ``samples`` uses an
    explicit series aligned with the scenario grid.
    """

    vertex: int
    kind: str = "sine_halfperiod"
    amplitude: float = 1.0
    onset: float = 0.0
    duration: float | None = None
    samples: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in DISTURBANCE_KINDS:
            raise ValueError(f"unknown disturbance kind {self.kind!r}")
        if self.vertex < 1:
            raise ValueError(f"vertex labels start at 1, got {self.vertex}")
        if self.onset < 0.0:
            raise ValueError(f"onset must be nonnegative, got {self.onset}")
        if self.kind == "samples" and self.samples is None:
            raise ValueError("kind 'samples' requires a sample array")

    def sample(self, grid: TimeGrid) -> np.ndarray:
        t = grid.times
        if self.kind == "samples":
            values = np.asarray(self.samples, dtype=float)
            if values.shape != t.shape:
                raise ValueError(
                    f"sampled disturbance has {values.shape[0]} values, "
                    f"grid has {t.shape[0]}"
                )
            return values.copy()
        if self.kind == "step":
            return np.where(t > self.onset, self.amplitude, 0.0)
        duration = self.duration if self.duration is not None else grid.total
        if duration <= 0.0:
            raise ValueError(f"duration must be positive, got {duration}")
        phase = np.pi * (t - self.onset) / duration
        return np.where(t > self.onset, self.amplitude * np.sin(phase), 0.0)


def modal_envelopes(
    omegas: np.ndarray, eta: float, times: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Envelope pairs (A_k, B_k) for each frequency, shape (K, len(times)).

    Branches on the sign of the discriminant; discriminants within
    ``CRITICAL_TOL`` of zero take the critical branch, and the three
    branches agree continuously across the switch.
    """
    if eta <= 0.0:
        raise ValueError(f"damping must be positive, got {eta}")
    om = np.atleast_1d(np.asarray(omegas, dtype=float))
    t = np.asarray(times, dtype=float)
    a = np.empty((om.size, t.size))
    b = np.empty((om.size, t.size))
    for k, omega in enumerate(om):
        disc = eta * eta - 4.0 * omega * omega
        if abs(disc) < CRITICAL_TOL:
            decay = np.exp(-0.5 * eta * t)
            a[k] = (1.0 + 0.5 * eta * t) * decay
            b[k] = t * decay
        elif disc > 0.0:
            root = np.sqrt(disc)
            r = 0.5 * (-eta + root)
            rb = -0.5 * (eta + root)
            er, erb = np.exp(r * t), np.exp(rb * t)
            a[k] = (rb * er - r * erb) / (rb - r)
            b[k] = (erb - er) / (rb - r)
        else:
            s = np.sqrt(-disc)
            decay = np.exp(-0.5 * eta * t)
            a[k] = decay * (np.cos(0.5 * s * t) + (eta / s) * np.sin(0.5 * s * t))
            b[k] = (2.0 / s) * decay * np.sin(0.5 * s * t)
    return a, b


def modal_envelope_derivatives(
    omegas: np.ndarray,
    eta: float,
    envelopes: tuple[np.ndarray, np.ndarray],
) -> tuple[np.ndarray, np.ndarray]:
    """Time derivatives (A', B') via the identities A' = -omega^2 B, B' = A - eta B."""
    a, b = envelopes
    om = np.atleast_1d(np.asarray(omegas, dtype=float))
    da = -(om[:, None] ** 2) * b
    db = a - eta * b
    return da, db


def modal_homogeneous_solution(
    spec: SpectralDecomposition,
    eta: float,
    x0: np.ndarray,
    v0: np.ndarray,
    times: np.ndarray,
) -> StateTrajectory:
    """Closed-form unforced evolution from initial states and velocities."""
    x0 = np.asarray(x0, dtype=float)
    v0 = np.asarray(v0, dtype=float)
    if x0.shape != (spec.n,) or v0.shape != (spec.n,):
        raise ValueError(
            f"initial conditions must have shape ({spec.n},), got {x0.shape} and {v0.shape}"
        )
    t = np.asarray(times, dtype=float)
    y0 = spec.vectors.T @ x0
    yd0 = spec.vectors.T @ v0
    env = modal_envelopes(spec.omegas, eta, t)
    denv = modal_envelope_derivatives(spec.omegas, eta, env)
    reps = np.asarray(spec.multiplicities, dtype=int)
    a, b = (np.repeat(e, reps, axis=0) for e in env)
    da, db = (np.repeat(e, reps, axis=0) for e in denv)
    coeffs = a * y0[:, None] + b * yd0[:, None]
    dcoeffs = da * y0[:, None] + db * yd0[:, None]
    return StateTrajectory(
        times=t, values=spec.vectors @ coeffs, velocities=spec.vectors @ dcoeffs
    )


def simulate_forward(
    lap: np.ndarray,
    eta: float,
    forcing: np.ndarray,
    grid: TimeGrid,
    x0: np.ndarray | None = None,
    v0: np.ndarray | None = None,
    substeps: int = 1,
) -> StateTrajectory:
    """Integrate the forced system over the grid with classical Runge-Kutta.

    ``forcing`` holds one row per vertex sampled at the grid times; stage
    evaluations between samples use linear interpolation.  ``substeps``
    subdivides every grid interval internally while only grid points are
    stored, which tightens the integration error without changing the
    output sampling.
    """
    if eta <= 0.0:
        raise ValueError(f"damping must be positive, got {eta}")
    if substeps < 1:
        raise ValueError(f"substeps must be at least 1, got {substeps}")
    lap = np.asarray(lap, dtype=float)
    n = lap.shape[0]
    f = np.asarray(forcing, dtype=float)
    if f.shape != (n, grid.steps + 1):
        raise ValueError(
            f"forcing must have shape ({n}, {grid.steps + 1}), got {f.shape}"
        )
    x = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float).copy()
    v = np.zeros(n) if v0 is None else np.asarray(v0, dtype=float).copy()
    if x.shape != (n,) or v.shape != (n,):
        raise ValueError("initial conditions do not match the Laplacian size")

    # Forcing at half-substep resolution, linearly interpolated once.
    fine = 2 * grid.steps * substeps
    t_half = np.arange(fine + 1) * (grid.total / fine)
    f_half = np.empty((n, fine + 1))
    for row in range(n):
        f_half[row] = np.interp(t_half, grid.times, f[row])

    h = grid.dt / substeps
    values = np.empty((n, grid.steps + 1))
    velocities = np.empty((n, grid.steps + 1))
    values[:, 0] = x
    velocities[:, 0] = v

    def accel(state: np.ndarray, velocity: np.ndarray, force: np.ndarray) -> np.ndarray:
        return lap @ state - eta * velocity + force

    for i in range(grid.steps):
        for s in range(substeps):
            base = 2 * (i * substeps + s)
            f0, fm, f1 = f_half[:, base], f_half[:, base + 1], f_half[:, base + 2]
            k1x, k1v = v, accel(x, v, f0)
            k2x = v + 0.5 * h * k1v
            k2v = accel(x + 0.5 * h * k1x, k2x, fm)
            k3x = v + 0.5 * h * k2v
            k3v = accel(x + 0.5 * h * k2x, k3x, fm)
            k4x = v + h * k3v
            k4v = accel(x + h * k3x, k4x, f1)
            x = x + (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
            v = v + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
        values[:, i + 1] = x
        velocities[:, i + 1] = v
    return StateTrajectory(times=grid.times, values=values, velocities=velocities)


@dataclass(frozen=True)
class Observations:
    """Sampled states on the observed vertices, possibly noisy."""

    vertices: tuple[int, ...]
    times: np.ndarray
    values: np.ndarray

    def row(self, vertex: int) -> np.ndarray:
        return self.values[self.vertices.index(vertex)]


def generate_observations(
    traj: StateTrajectory,
    observed,
    noise_std: float = 0.0,
    seed: int = 0,
) -> Observations:
    """Extract observed-vertex rows and add i.i.d. Gaussian noise if asked."""
    vertices = tuple(sorted({int(v) for v in observed}))
    if not vertices:
        raise ValueError("observed set must be nonempty")
    if vertices[0] < 1 or vertices[-1] > traj.n:
        raise ValueError(f"observed vertices must lie in 1..{traj.n}")
    if noise_std < 0.0:
        raise ValueError(f"noise_std must be nonnegative, got {noise_std}")
    rows = np.array([traj.values[v - 1] for v in vertices])
    if noise_std > 0.0:
        rng = np.random.default_rng(seed)
        rows = rows + rng.normal(0.0, noise_std, size=rows.shape)
    return Observations(vertices=vertices, times=traj.times.copy(), values=rows)


def impulse_response_phi(
    times: np.ndarray,
    center: float,
    dt: float,
    eta: float,
    affine: bool = True,
) -> np.ndarray:
    """Localized test function used by the reconstruction quadrature.

    Supported on (center - dt, center + dt) and vanishing at both ends.
    The affine variant is the triangle-like function with slopes -1/2 and
    +1/2 and center value -dt/2; the exact variant solves the adjoint
    two-point problem for the damped operator and approaches the affine
    one as eta * dt goes to zero.
    """
    if dt <= 0.0:
        raise ValueError(f"dt must be positive, got {dt}")
    t = np.asarray(times, dtype=float)
    tau = t - center
    inside = (tau >= -dt) & (tau <= dt)
    out = np.zeros_like(tau)
    if affine:
        left = inside & (tau <= 0.0)
        right = inside & (tau > 0.0)
        out[left] = -0.5 * (tau[left] + dt)
        out[right] = 0.5 * (tau[right] - dt)
        return out
    if eta <= 0.0:
        raise ValueError(f"exact variant needs positive damping, got {eta}")
    c = (np.exp(eta * dt) - 1.0) / (eta * (np.exp(2.0 * eta * dt) - 1.0))
    tau_in = tau[inside]
    heavy = np.where(tau_in > 0.0, (np.exp(eta * tau_in) - 1.0) / eta, 0.0)
    out[inside] = heavy - c * (np.exp(eta * (tau_in + dt)) - 1.0)
    return out
