"""Exception hierarchy shared by every workbench module."""


class WorkbenchError(Exception):
    """Base class for all workbench errors."""


class StructuralError(WorkbenchError, ValueError):
    """Shapes, dimensions or structural data are inconsistent."""


class PreconditionError(WorkbenchError, ValueError):
    """An operation was called outside its domain (e.g. a non-unit vector)."""


class DegeneratePlane(PreconditionError):
    """The plane spanned by two vectors is degenerate for the metric."""


class SymmetryError(PreconditionError):
    """A matrix that must be symmetric is not."""


class NotLightlike(PreconditionError):
    """A vector expected to be null has nonzero squared norm."""


class InapplicableHypotheses(WorkbenchError):
    """The hypotheses of the statement being checked do not hold."""


class RecoveryFailure(WorkbenchError):
    """The almost Hermitian structure could not be recovered."""
