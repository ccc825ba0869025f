"""Exception types raised by the dcrv library.

Every error carries a stable ``code`` (its class name) and an ``exit_code``
used by the command line tool: 2 for input validation, 3 for resource caps.
"""


class DCRVError(ValueError):
    exit_code = 2

    @property
    def code(self) -> str:
        return type(self).__name__

    def to_dict(self) -> dict:
        return {"error": self.code, "message": str(self)}


class SumNotOne(DCRVError):
    pass


class OutOfRange(DCRVError):
    pass


class TooFewCategories(DCRVError):
    pass


class IndexOutOfRange(DCRVError):
    pass


class CountOutOfRange(DCRVError):
    pass


class InvalidCounts(DCRVError):
    pass


class InvalidSequence(DCRVError):
    pass


class BadPositions(DCRVError):
    pass


class BadPosition(DCRVError):
    pass


class UOutOfRange(DCRVError):
    pass


class NonFinite(DCRVError):
    pass


class DegenerateVariance(DCRVError):
    pass


class DegenerateCells(DCRVError):
    pass


class TableTooLarge(DCRVError):
    exit_code = 3


class EnumerationTooLarge(DCRVError):
    exit_code = 3


class SequenceTooLong(DCRVError):
    exit_code = 3
