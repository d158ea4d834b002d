"""Exception hierarchy shared by every module."""


class QCSpectralError(Exception):
    """Base class for all errors raised by qcspectral."""


class DomainError(QCSpectralError, ValueError):
    """An argument lies outside the admissible range of an operation."""


class ResourceLimitError(QCSpectralError):
    """A request would exceed the configured size limits (e.g. mesh too fine)."""


class MeshError(QCSpectralError, ValueError):
    """A triangulation violates orientation, conformity or boundary invariants."""


class AssemblyError(QCSpectralError):
    """Coefficient or weight evaluation failed while assembling a matrix."""


class SolverError(QCSpectralError):
    """The eigensolver failed or did not reach the residual tolerance."""
