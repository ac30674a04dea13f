"""Exception types raised across the package."""


class KposeError(ValueError):
    """Base class for all domain errors."""


# rotation
class NotARotation(KposeError):
    pass


class DegenerateInput(KposeError):
    pass


class RankDeficient(KposeError):
    pass


# camera / multiplex
class EmptyMultiplex(KposeError):
    pass


class EmptyTarget(KposeError):
    pass


# mesh
class ParseError(KposeError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class IndexOutOfRange(ParseError):
    pass


class BadCount(KposeError):
    pass


class IsolatedVertex(KposeError):
    pass


class Infeasible(KposeError):
    pass


# raster / metrics / heatmap
class EmptyMesh(KposeError):
    pass


class ShapeMismatch(KposeError):
    pass


class EmptyForeground(KposeError):
    pass


class WeightMismatch(KposeError):
    pass


class EmptySequence(KposeError):
    pass


# pnp
class Degenerate(KposeError):
    pass


class PlanarAmbiguity(KposeError):
    """Coplanar 3D points: two depth-reflected poses explain the data.

    Both candidates are attached as ``candidates``; pick one using extra
    correspondences.
    """

    def __init__(self, candidates):
        super().__init__("coplanar 3D points admit two reflected solutions")
        self.candidates = candidates


class NoConsensus(KposeError):
    pass
