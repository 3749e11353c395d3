"""Exception hierarchy shared by every module of the package."""


class GateGraphError(Exception):
    """Base class for all package errors."""


class InputError(GateGraphError, ValueError):
    """Malformed or inconsistent input."""


class NotSymmetric(InputError):
    pass


class NonBinaryEntry(InputError):
    pass


class EmptyGraph(InputError):
    pass


class MissingSelfLoop(InputError):
    def __init__(self, vertex):
        super().__init__(f"vertex {vertex} has no self-loop")
        self.vertex = vertex


class BadLabeling(InputError):
    pass


class WrongVertexCount(InputError):
    pass


class GeometryMismatch(InputError):
    pass


class ElementGeometryMismatch(GeometryMismatch):
    pass


class NodeConflict(InputError):
    pass


class IllegalNodeForLabel(InputError):
    pass


class DanglingElementIndex(InputError):
    pass


class BadWeight(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class NotOrthonormal(InputError):
    pass


class NotPSD(InputError):
    pass


class EmptyNullspace(InputError):
    pass


class NonPositiveInput(InputError):
    pass


class AlphaMismatch(InputError):
    pass


class NotE1GateGraph(InputError):
    pass


class ComputationError(GateGraphError, RuntimeError):
    """Numerical or resource failure (as opposed to bad input)."""


class SolverNoConvergence(ComputationError):
    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class BudgetExceeded(ComputationError):
    pass


class InternalInvariant(ComputationError):
    pass
