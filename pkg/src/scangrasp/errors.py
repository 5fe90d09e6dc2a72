class ScanGraspError(Exception):
    """Base class for all library errors."""


class DegenerateInputError(ScanGraspError, ValueError):
    """Input geometry is degenerate (zero normal, collinear points, parallel planes)."""


class InsufficientInputError(ScanGraspError, ValueError):
    """Too few points (or fits) to carry out the requested operation."""


class FitFailure(ScanGraspError):
    """A model could not be fitted to the data."""


class NotAnEllipseError(FitFailure):
    """Conic coefficients describe a parabola, hyperbola or an imaginary ellipse."""


class AmbiguousShapeError(ScanGraspError):
    """Per-scan fits match none of the shape rules."""

    def __init__(self, message, labels=None):
        super().__init__(message)
        self.labels = labels


class NoPrincipalDirectionError(ScanGraspError):
    """No seed point satisfies the turn-angle condition."""


class InternalInconsistencyError(ScanGraspError):
    """A caller handed a reconstruction routine fits its classifier would never produce."""
