"""Exception types shared across the package."""


class FpoError(Exception):
    """Base class for all package errors."""


class CycleError(FpoError):
    """The generating relation contains a directed cycle."""

    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__("relation has a cycle: " + " < ".join(map(str, self.cycle)))


class InvalidFpoError(FpoError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid FPO: " + "; ".join(self.violations))


class ClassMismatchError(FpoError):
    """Two FPOs of different [m,n] class were compared."""


class BudgetExceeded(FpoError):
    """A bounded search ran out of nodes before reaching a verdict."""

    def __init__(self, budget):
        self.budget = budget
        super().__init__(f"search budget of {budget} nodes exceeded")


class FopValidationError(FpoError):
    """A map is not frame- and order-preserving."""

    def __init__(self, reason, witness=None):
        self.reason = reason
        self.witness = witness
        msg = reason if witness is None else f"{reason}: {witness}"
        super().__init__(msg)


class NotEquivalentError(FpoError):
    pass


class NotMinimalError(FpoError):
    pass


class UnknownName(FpoError):
    pass


class NotCausalRelevantError(FpoError):
    pass


class DiagramError(FpoError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("invalid diagram: " + "; ".join(self.violations))


class QuotientCycleError(FpoError):
    def __init__(self, blocks):
        self.blocks = list(blocks)
        super().__init__("coarse-graining creates a cycle through blocks " + " -> ".join(map(str, self.blocks)))


class LocalisationError(FpoError):
    pass


class DimensionError(FpoError):
    pass


class NotCliffordError(FpoError):
    def __init__(self, witness):
        self.witness = witness
        super().__init__(f"gate is not Clifford: conjugate of {witness} is not a Pauli string")
