"""Exception hierarchy shared by the solvers and the command line."""


class SpectraError(Exception):
    """Base class for all errors raised by this package."""


class IllConditioned(SpectraError):
    """Cholesky factorisation failed at the working precision.

    Raising ``decimal_digits`` is the usual cure.
    """


class NoConvergence(SpectraError):
    pass


class InsufficientCoefficients(SpectraError):
    pass


class ResourceLimit(SpectraError):
    pass


class SymmetryViolation(SpectraError):
    """An assembled Hamiltonian matrix is not symmetric to working precision."""


class AmbiguousClassification(SpectraError):
    pass


class ReproductionFailure(SpectraError):
    def __init__(self, table_id, mismatches):
        self.table_id = table_id
        self.mismatches = list(mismatches)
        cells = ", ".join(m.describe() for m in self.mismatches)
        super().__init__(f"table {table_id}: {len(self.mismatches)} mismatched cell(s): {cells}")


class InvalidConfig(SpectraError):
    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
