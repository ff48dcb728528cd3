"""Exception types shared across the package."""


class SharpCQError(Exception):
    """Base class for all errors raised by sharpcq."""


class ParseError(SharpCQError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


class ArityMismatch(SharpCQError):
    pass


class FreeVarNotInBody(SharpCQError):
    pass


class UnknownVariable(SharpCQError):
    pass


class MissingRelation(SharpCQError):
    pass


class InvalidWidth(SharpCQError):
    pass


class InvalidSelection(SharpCQError):
    pass


class WidthAssumptionViolated(SharpCQError):
    """A consistency-based decision disagreed with a direct homomorphism check."""


class SearchBudgetExceeded(SharpCQError):
    """A search hit a configured cap before it could finish."""


class NoDecompositionWithinBudget(SharpCQError):
    pass


class StateCapExceeded(SharpCQError):
    pass


class UncoveredEdge(SharpCQError):
    pass


class FrontierNotCovered(SharpCQError):
    pass


class IncompleteDecomposition(SharpCQError):
    pass


class IncompatibleDecomposition(SharpCQError):
    pass


class InvalidHybridDecomposition(SharpCQError):
    pass
