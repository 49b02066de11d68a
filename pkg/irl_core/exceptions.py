"""
Domain errors raised by the IRL core.
"""

from typing import Optional


class IrlLabError(ValueError):
    """Base class for every domain error"""


class NegativeEntry(IrlLabError):
    """Transition matrix has a negative entry"""

    def __init__(self, i: int, j: int, value: float):
        self.i, self.j, self.value = i, j, value
        super().__init__(f"Negative transition entry {value:.3g} at ({i}, {j})")


class RowSumViolation(IrlLabError):
    """Transition row does not sum to one"""

    def __init__(self, i: int, total: float):
        self.i, self.total = i, total
        super().__init__(f"Row {i} sums to {total!r}, expected 1")


class DimensionMismatch(IrlLabError):
    """Array shape does not match the instance"""

    def __init__(self, expected, got):
        self.expected, self.got = expected, got
        super().__init__(f"Expected shape {expected}, got {got}")


class SingularSystem(IrlLabError):
    """(I - gamma P) could not be solved"""


class ZeroReward(IrlLabError):
    """Reward vector has zero 1-norm"""

    def __init__(self):
        super().__init__("Reward vector has zero 1-norm")


class LpFailure(IrlLabError):
    """LP did not reach an optimal solution"""

    def __init__(self, status: str, context: str = ""):
        self.status = status
        suffix = f" ({context})" if context else ""
        super().__init__(f"LP finished with status '{status}'{suffix}")


class TooLarge(IrlLabError):
    """Enumeration or iteration guard exceeded"""


class UnsupportedCode(IrlLabError):
    """Facets are only known for simplex and icosahedron codes"""


class DegenerateFacet(IrlLabError):
    """Leave-one-out vertex set is rank deficient"""

    def __init__(self, vertex: int, rank: int):
        self.vertex, self.rank = vertex, rank
        super().__init__(f"Leave-one-out set for vertex {vertex} has rank {rank}")


class InfeasibleSeparation(IrlLabError):
    """eps too small for the requested beta"""


class BetaTooLarge(IrlLabError):
    """beta leaves no admissible eps"""


class InvalidRow(IrlLabError):
    """Constructed transition row leaves the probability simplex"""

    def __init__(self, row: int, min_entry: float):
        self.row, self.min_entry = row, min_entry
        super().__init__(f"Row {row} has entry {min_entry:.3g} below zero")


class EpsTooLarge(IrlLabError):
    """n * eps must stay below one"""


class DegenerateDenominator(IrlLabError):
    """Bound denominator is not positive"""


class VacuousBound(IrlLabError):
    """Ensemble size does not exceed one"""

    def __init__(self, eta: float):
        self.eta = eta
        super().__init__(f"Ensemble size {eta:.4g} <= 1 gives a vacuous bound")


class AbsoluteContinuityViolation(IrlLabError):
    """P puts mass where Q has none"""

    def __init__(self, row: Optional[int], col: int):
        self.row, self.col = row, col
        where = f"({row}, {col})" if row is not None else f"[{col}]"
        super().__init__(f"P > 0 but Q = 0 at {where}")


class ZeroEntry(IrlLabError):
    """Reference row has a zero entry"""


class GenerationTimeout(IrlLabError):
    """Rejection sampler exhausted its draw budget"""

    def __init__(self, draws: int, target: float):
        self.draws, self.target = draws, target
        super().__init__(f"No instance with beta near {target:.4g} after {draws} draws")


class UnknownSolver(IrlLabError):
    """No solver registered under this name"""

    def __init__(self, name: str, known):
        self.name = name
        super().__init__(f"Unknown solver '{name}'. Known: {', '.join(sorted(known))}")
