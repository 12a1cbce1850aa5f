"""Exception hierarchy. Every error carries a short ``code`` used by the CLI."""


class OhmPathError(Exception):
    @property
    def code(self) -> str:
        return type(self).__name__


class GraphError(OhmPathError, ValueError):
    pass


class MalformedGraph(GraphError):
    pass


class SelfLoop(GraphError):
    pass


class DuplicateArc(GraphError):
    pass


class EndpointOutOfRange(GraphError):
    pass


class TooFewNodes(GraphError):
    pass


class DisconnectedGraph(GraphError):
    pass


class NoHamiltonianPath(GraphError):
    pass


class InconsistentEndpoints(GraphError):
    pass


class PathNotInGraph(GraphError):
    pass


class DimensionMismatch(OhmPathError, ValueError):
    pass


class ConductanceOutOfRange(OhmPathError, ValueError):
    pass


class SolverFailure(OhmPathError, ArithmeticError):
    pass


class NonSmoothPoint(OhmPathError, ArithmeticError):
    pass


class InfeasibleConstraint(OhmPathError, ValueError):
    pass


class TooManyArcs(OhmPathError, ValueError):
    pass


class UnknownNode(GraphError):
    pass
