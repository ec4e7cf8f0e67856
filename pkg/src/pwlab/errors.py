"""Exception hierarchy shared by every pwlab module."""


class PwlabError(Exception):
    """Base class for all laboratory errors."""


class NonFiniteResult(PwlabError, ArithmeticError):
    pass


class GridMismatch(PwlabError, ValueError):
    pass


class InvalidParams(PwlabError, ValueError):
    pass


class RadiusTooSmall(PwlabError, ValueError):
    pass


class BracketFailure(PwlabError, ValueError):
    """No sign change on a unit bracket; usually means A <= sup|g|."""


class NonSimpleZero(PwlabError, ValueError):
    pass


class IndexOutOfRange(PwlabError, IndexError):
    pass


class GridTooCoarse(PwlabError, ValueError):
    pass


class UnsupportedK(PwlabError, ValueError):
    pass


class LiftingIllConditioned(PwlabError, ArithmeticError):
    pass


class RankDeficient(PwlabError, ArithmeticError):
    pass


class AnchorVanishes(PwlabError):
    """A block anchor is (numerically) zero, so phases cannot be chained."""

    def __init__(self, n, magnitude=0.0):
        self.n = n
        self.magnitude = magnitude
        super().__init__(f"anchor of block {n} vanishes (|v_1| = {magnitude:.3e})")


class UScalingFailed(PwlabError):
    pass


class ConfigInvalid(PwlabError, ValueError):
    pass


class IoFailure(PwlabError, OSError):
    pass


class ExperimentFailed(PwlabError):
    """A module error raised while running a named experiment."""

    def __init__(self, experiment, cause):
        self.experiment = experiment
        self.cause = cause
        super().__init__(f"experiment {experiment!r} failed: {type(cause).__name__}: {cause}")
