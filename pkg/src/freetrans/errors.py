"""Exception hierarchy shared across the solver library.

The CLI maps these onto process exit codes, so solver internals must raise
the specific class rather than a bare ValueError.
"""


class FreetransError(Exception):
    """Base class for all library errors."""


class ConfigurationError(FreetransError):
    """Invalid domain, grid, operator or run configuration."""


class ShapeError(FreetransError):
    """Array dimensions incompatible with the operator or grid."""


class OutOfLatticeError(FreetransError):
    """A stencil offset points outside the lattice."""


class StencilDomainError(FreetransError):
    """A second-difference stencil was requested at a non-interior point."""


class DegenerateEllipticityError(FreetransError):
    """An operator matrix is singular; no positive ellipticity certificate."""


class BarrierViolationError(FreetransError):
    """The explicit barriers fail their sign certificate on the grid."""


class DivergenceError(FreetransError):
    """The explicit relaxation diverged (CFL condition violated)."""


class StabilityFailureError(FreetransError):
    """A computed solution escaped the barrier envelope."""
