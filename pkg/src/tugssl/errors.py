"""Exception types shared across the package."""


class ArgumentError(ValueError):
    """Invalid argument value (bad vertex index, out-of-range parameter, ...)."""


class StructuralError(RuntimeError):
    """The graph or label set lacks a structural property an operation needs.

    Examples are an isolated vertex, a connected component without labels, or
    a visited vertex with no labeled neighbor.
    """
