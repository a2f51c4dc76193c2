"""Exception hierarchy shared across the package.

All library errors derive from RenyiError so callers (notably the CLI) can
distinguish data problems, numerical failures, and infeasible instances.
"""


class RenyiError(Exception):
    """Base class for all errors raised by this package."""


class DataError(RenyiError):
    """Malformed or contract-violating input data."""


class NumericalError(RenyiError):
    """A solver failed to produce a trustworthy result."""


# -- schema / dataset -------------------------------------------------------

class MissingLabelColumn(DataError):
    pass


class UnknownCategory(DataError):
    pass


class NonBinaryLabel(DataError):
    pass


class EmptyDataset(DataError):
    pass


class RaggedRow(DataError):
    pass


class IndexOutOfAlphabet(DataError):
    pass


class DuplicatePair(DataError):
    pass


class SelfPair(DataError):
    pass


class LengthMismatch(DataError):
    pass


# -- marginals / joints ------------------------------------------------------

class InvalidDistribution(DataError):
    pass


class InstanceTooLarge(DataError):
    pass


class DegeneratePrior(DataError):
    pass


# -- solvers -----------------------------------------------------------------

class SingularSystem(NumericalError):
    pass


class MaxIterationsExceeded(NumericalError):
    pass


class DimensionMismatch(DataError):
    pass


class Infeasible(RenyiError):
    """The marginal constraint system admits no probability distribution."""


class NonPositiveLambda(DataError):
    pass


# -- model files -------------------------------------------------------------

class FormatVersionMismatch(DataError):
    pass


class CorruptModel(DataError):
    pass
