"""Exception hierarchy shared by every galilax module."""


class GalilaxError(Exception):
    """Base class for all package errors."""


class InvalidInputError(GalilaxError, ValueError):
    pass


class SingularityError(GalilaxError):
    """Two bodies coincide under a potential that is singular at r = 0."""

    def __init__(self, pair, time=None, message=None):
        self.pair = tuple(int(i) for i in pair)
        self.time = time
        if message is None:
            message = f"collision between bodies {self.pair[0]} and {self.pair[1]}"
            if time is not None:
                message += f" at t = {time:.12g}"
        super().__init__(message)


class IntegrationError(GalilaxError):
    def __init__(self, message, time=None):
        self.time = time
        if time is not None:
            message = f"{message} (t = {time:.12g})"
        super().__init__(message)


class ConsistencyError(GalilaxError):
    """A reconstructed quantity (e.g. b recovered from K) left its admissible set."""


class ToleranceInconsistencyError(GalilaxError):
    """Rank decisions at the chosen tolerance contradict each other."""


class DecompositionError(GalilaxError):
    def __init__(self, message, residual=None):
        self.residual = residual
        super().__init__(message)


class UnsupportedCaseError(GalilaxError):
    pass
