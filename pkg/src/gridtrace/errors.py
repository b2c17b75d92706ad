"""Exception hierarchy shared across the package.

The command line layer maps these onto process exit codes, so keep the
split stable: configuration problems, violated mathematical
preconditions, and numerical breakdowns are distinct failure families.
"""

from __future__ import annotations


class GridtraceError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(GridtraceError):
    """A scenario configuration is malformed or inconsistent (exit code 2)."""


class PreconditionError(GridtraceError):
    """A mathematical precondition of the requested operation fails (exit code 3)."""


class NotStrategicError(PreconditionError):
    """The observation set cannot pin down modal initial conditions.

    Carries the offending eigenvalue cluster so the operator knows which
    part of the spectrum is under-observed.
    """

    def __init__(self, cluster_index: int, omega: float, multiplicity: int, rank: int):
        self.cluster_index = cluster_index
        self.omega = omega
        self.multiplicity = multiplicity
        self.rank = rank
        super().__init__(
            f"observation set is not strategic: eigenvalue cluster "
            f"{cluster_index} (omega={omega:.6g}, multiplicity {multiplicity}) "
            f"is observed with rank {rank} < {multiplicity}"
        )


class NotAbsorbentError(PreconditionError):
    """The observation set does not cover the network for identification."""


class NumericalError(GridtraceError):
    """A numerical routine failed beyond recovery (exit code 4)."""
