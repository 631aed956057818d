"""Exception types raised across the package."""


class BspError(Exception):
    """Base class for all package errors."""


class ContractError(BspError, ValueError):
    """An operation was handed data that does not match its declared layout."""


class ScheduleError(BspError, RuntimeError):
    """A communication superstep is not a permutation of the index set."""


class StructureError(BspError, ValueError):
    """Algorithms with incompatible superstep structure were combined."""


class DivisibilityError(BspError, ValueError):
    """A divisibility requirement of an algorithm constructor failed.

    ``clause`` holds the violated requirement, e.g. ``"p² | n"``.
    """

    def __init__(self, clause, detail=""):
        self.clause = clause
        msg = f"Require {clause} violated"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)
