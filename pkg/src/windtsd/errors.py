"""Exception hierarchy shared by every stage of the pipeline."""


class WindTsdError(Exception):
    """Base class for all package errors."""


class ShapeMismatch(WindTsdError, ValueError):
    pass


# ingest
class IngestError(WindTsdError, ValueError):
    pass


class MissingColumn(IngestError):
    pass


class NonUniformTimestep(IngestError):
    pass


class NonFiniteValue(IngestError):
    pass


class NegativeSpeed(IngestError):
    pass


class LevelOutOfRange(IngestError):
    pass


class IntervalNotDivisor(IngestError):
    pass


# decompositions
class DecompositionError(WindTsdError, ValueError):
    pass


class NotSymmetric(DecompositionError):
    pass


class IndefiniteBeyondTolerance(DecompositionError):
    pass


class ZeroEigenvalue(DecompositionError):
    pass


class TooFewRealizations(DecompositionError):
    pass


class NotCentered(DecompositionError):
    pass


class SingularWeightMatrix(DecompositionError):
    pass


# density
class TooFewObservations(WindTsdError, ValueError):
    pass


class DegenerateModel(WindTsdError, ValueError):
    pass


# diagnostics
class SeriesTooShort(WindTsdError, ValueError):
    pass


class LengthMismatch(WindTsdError, ValueError):
    pass


class ZeroSourceNorm(WindTsdError, ValueError):
    pass


# model files
class CorruptModel(WindTsdError):
    pass


class UnsupportedVersion(CorruptModel):
    pass
