#  This file is part of repunet-lab.
#  repunet-lab is free software released under terms of the MIT license. See LICENSE.md.


class RepunetError(Exception):
    pass


class DimensionMismatchError(RepunetError, ValueError):
    """An input point or array does not match the input dimension of a network or rule."""

    def __init__(self, expected: int, actual: int):
        self.expected = expected
        """Input dimension the object was built for."""
        self.actual = actual
        """Dimension of the offending input."""
        super().__init__(f"Expected points of dimension {expected}, got {actual}")


class UnsupportedOrderError(RepunetError, ValueError):
    """A derivative of order higher than the activation power was requested."""

    def __init__(self, order: int, k: int):
        self.order = order
        """Total order |alpha| that was requested."""
        self.k = k
        """Largest supported order."""
        super().__init__(f"Derivative order {order} exceeds the supported order k={k}")


class ConstraintError(RepunetError, ValueError):
    """A network violates the parameter constraints of a penalty regime."""

    def __init__(self, kind: str, message: str, neuron: int | None = None):
        self.kind = kind
        """Name of the penalty regime whose constraints were checked."""
        self.neuron = neuron
        """Index of the offending neuron, if the violation is local to one."""
        where = f" (neuron {neuron})" if neuron is not None else ""
        super().__init__(f"{kind}{where}: {message}")


class DegenerateNeuronError(ConstraintError):
    """A neuron has an all-zero inner weight and cannot be normalised onto the unit sphere."""

    def __init__(self, kind: str, neuron: int):
        super().__init__(kind, "inner weight is zero and cannot be normalised", neuron)


class ModelFormatError(RepunetError, ValueError):
    """A model or dataset file could not be parsed."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"Failed to parse '{path}': {message}")


class QuadratureSizeError(RepunetError, ValueError):
    pass


class ConfigError(RepunetError, ValueError):
    pass


class DomainError(RepunetError, ValueError):
    pass


class DivergenceError(RepunetError, ArithmeticError):
    """The Tikhonov objective became non-finite during optimisation."""

    def __init__(self, iteration: int, restart: int):
        self.iteration = iteration
        """Iteration at which the objective stopped being finite."""
        self.restart = restart
        """Index of the restart that diverged."""
        super().__init__(f"Objective diverged at iteration {iteration} of restart {restart}")
