"""Exception hierarchy shared by every module."""


class CRNError(Exception):
    """Base class for all toolkit errors."""


class InvalidNetwork(CRNError):
    pass


class SelfTransfer(InvalidNetwork):
    """A reaction (or lifted box transfer) has identical reactant and product."""


class NotWeaklyReversible(CRNError):
    pass


class NotPLRDK(CRNError):
    """Branching reactions carry different kinetic-order rows."""


class NonpositiveState(CRNError):
    pass


class ShapeMismatch(CRNError):
    """The model does not have the land-atmosphere reversible pair of the DAC network."""


class ClassMismatch(CRNError):
    pass


class DegenerateClass(CRNError):
    pass


class PNullShape(CRNError):
    pass


class DimensionTooLarge(CRNError):
    pass


class NotIndependent(CRNError):
    pass


class Infeasible(CRNError):
    pass


class Unbounded(CRNError):
    pass


class NoRoot(CRNError):
    pass


class NoConvergence(CRNError):
    pass


class StepSizeUnderflow(CRNError):
    def __init__(self, message, t=None, state=None):
        super().__init__(message)
        self.t = t
        self.state = state


class ParseError(CRNError):
    def __init__(self, message, line=None, column=None):
        loc = f"line {line}" if line is not None else ""
        if column is not None:
            loc += f", column {column}"
        super().__init__(f"{loc}: {message}" if loc else message)
        self.line = line
        self.column = column


class UndeclaredSpecies(ParseError):
    pass


class NonpositiveRate(ParseError):
    pass
