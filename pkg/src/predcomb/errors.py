"""Exception types shared across the package."""


class PredcombError(Exception):
    """Base class for every error raised by predcomb."""


class HorizonTooSmall(PredcombError, ValueError):
    pass


class AlphabetMismatch(PredcombError, ValueError):
    pass


class NotFiniteMemory(PredcombError, TypeError):
    pass


class BudgetExceeded(PredcombError):
    def __init__(self, what, count, limit):
        self.what = what
        self.count = count
        self.limit = limit
        super().__init__(f"{what}: {count} items exceeds budget {limit}")


class PhaseMismatch(PredcombError, ValueError):
    pass


class LevelUndefined(PredcombError, ValueError):
    pass


class ClaimViolated(PredcombError, AssertionError):
    """An A-set reached 2**k members. Never expected; indicates a defect."""

    def __init__(self, sigma, family, size):
        self.sigma = sigma
        self.family = family
        self.size = size
        super().__init__(f"|A_sigma^k| = {size} at sigma={sigma!r} for {family!r}")


class HypothesisFails(PredcombError):
    """The weak-prediction hypothesis fails for some (g, j, block)."""

    def __init__(self, g_index, j, block):
        self.g_index = g_index
        self.j = j
        self.block = block
        super().__init__(f"pi^(g#{g_index},{j}) misses the whole block {block}")


class NodeAbsent(PredcombError, KeyError):
    pass


class WindowOverflow(PredcombError):
    def __init__(self, node, traces):
        self.node = node
        self.traces = traces
        super().__init__(f"node {node!r} carries {traces} window traces")


class InvalidCondition(PredcombError, ValueError):
    pass


class BucketMismatch(PredcombError, ValueError):
    pass


class VerificationFailed(PredcombError, AssertionError):
    pass


class NoCommonExtension(PredcombError):
    pass


class LinkednessViolated(PredcombError):
    def __init__(self, cell, sigma):
        self.cell = cell
        self.sigma = sigma
        super().__init__(f"cell {cell} excludes every value at {sigma!r}")


class UnknownSuite(PredcombError, KeyError):
    pass
