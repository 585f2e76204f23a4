"""Exception hierarchy.

Everything raised on bad input derives from :class:`DataError`, which the
CLI maps to exit code 2.
"""


class FCAODError(Exception):
    """Base class for all package errors."""


class DataError(FCAODError, ValueError):
    """Input data or arguments violate an operation's preconditions."""


class IndexOutOfRange(DataError, IndexError):
    pass


class LengthMismatch(DataError):
    pass


class EmptyTable(DataError):
    pass


class NonFinite(DataError):
    pass


class ColumnMismatch(DataError):
    pass


class CSVFormatError(DataError):
    pass


class AlphaTooLarge(DataError):
    pass


class DuplicateAgenda(DataError):
    pass


class EmptyAgenda(DataError):
    pass


class EmptyAgendaSpace(DataError):
    pass


class NegativeWeight(DataError):
    pass


class ZeroMass(DataError):
    pass


class InvalidGamma(DataError):
    pass


class NonPositiveBal(DataError):
    pass


class NoOutliersInTrain(DataError):
    pass


class DegenerateLabels(DataError):
    pass


class EmptyLabels(DataError):
    pass


class UnknownObject(DataError, KeyError):
    pass


class UnknownAgenda(DataError, KeyError):
    pass


class InvalidAttributePair(DataError):
    pass


class ModelFormatError(DataError):
    pass
