"""Exception types raised across tropkit."""


class TropkitError(Exception):
    """Base class for all domain errors."""


class DimensionGuardExceeded(TropkitError):
    pass


class EmptyPolyhedron(TropkitError):
    pass


class ZeroVector(TropkitError):
    pass


class NotACodimOneFace(TropkitError):
    pass


class IntersectionAxiomViolated(TropkitError):
    def __init__(self, i, j, message=None):
        self.i = i
        self.j = j
        super().__init__(message or f"cells {i} and {j} do not meet in a common face")


class PointNotOnSupport(TropkitError):
    pass


class NotPureDimensional(TropkitError):
    pass


class MissingPiece(TropkitError):
    def __init__(self, cell):
        self.cell = cell
        super().__init__(f"no piece given for maximal cell {cell}")


class ContinuityViolated(TropkitError):
    def __init__(self, face, point):
        self.face = face
        self.point = point
        super().__init__(f"pieces disagree on face {face} at {point}")


class NotBalanced(TropkitError):
    def __init__(self, report):
        self.report = report
        super().__init__(
            "cycle is not balanced at faces "
            + ", ".join(str(v.face) for v in report.violations)
        )


class NonConstantWeights(TropkitError):
    pass


class SupportNotContained(TropkitError):
    pass


class NotGeneric(TropkitError):
    def __init__(self, certificate):
        self.certificate = certificate
        super().__init__(f"hyperplane contains cells {list(certificate.offenders)}")


class Exhausted(TropkitError):
    def __init__(self, message, certificate=None):
        self.certificate = certificate
        super().__init__(message)


class QuadraticNotSupported(TropkitError):
    pass


class TraceAborted(TropkitError):
    """Raised by the slicing trace when a hypothesis of the maximum principle fails."""

    def __init__(self, verdict):
        self.verdict = verdict
        super().__init__(f"trace aborted: {verdict.status}")
