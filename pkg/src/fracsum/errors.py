"""Exception hierarchy shared by every fracsum module."""


class FracsumError(Exception):
    """Base class for all errors raised by fracsum."""


class DimensionMismatch(FracsumError, ValueError):
    pass


class PreconditionViolated(FracsumError, ValueError):
    """A lemma verifier was called outside the lemma's hypotheses."""

    def __init__(self, hypothesis, detail=""):
        self.hypothesis = hypothesis
        msg = f"precondition violated: {hypothesis}"
        if detail:
            msg += f" ({detail})"
        super().__init__(msg)


class EpsOutOfRange(PreconditionViolated):
    def __init__(self, eps, n):
        super().__init__("eps <= 1/|A|", f"eps={eps!r}, |A|={n}")
        self.eps = eps
        self.n = n


class Unbounded(FracsumError, RuntimeError):
    pass


class NotContracting(FracsumError, ValueError):
    def __init__(self, index, bound):
        self.index = index
        self.bound = bound
        super().__init__(f"map {index} is not a contraction (operator norm bound {bound!r} >= 1)")


class NotSimilitude(FracsumError, ValueError):
    pass


class SingularSystem(FracsumError, RuntimeError):
    pass


class BudgetExceeded(FracsumError, RuntimeError):
    def __init__(self, count, budget):
        self.count = count
        self.budget = budget
        super().__init__(f"cover needs {count} cylinders, budget is {budget}")


class BoxTooSmall(FracsumError, ValueError):
    pass


class CellMismatch(FracsumError, ValueError):
    pass


class AllocationLimit(FracsumError, MemoryError):
    def __init__(self, requested, cap):
        self.requested = requested
        self.cap = cap
        super().__init__(f"raster needs {requested} bytes, cap is {cap}")


class EmptyRaster(FracsumError, ValueError):
    pass


class MisalignedOrigins(FracsumError, ValueError):
    pass


class DegenerateSet(FracsumError, ValueError):
    pass


class WitnessFailed(FracsumError, RuntimeError):
    def __init__(self, reason, radius=None, required=None):
        self.reason = reason
        self.radius = radius
        self.required = required
        msg = f"packing witness failed: {reason}"
        if radius is not None:
            msg += f" (hull radius {radius!r} < required {required!r})"
        super().__init__(msg)


class InvalidC(FracsumError, ValueError):
    pass


class ThresholdNotMet(FracsumError, ValueError):
    def __init__(self, n, threshold):
        self.n = n
        self.threshold = threshold
        super().__init__(f"n={n} is below the sufficient threshold {threshold}; pass force=True to run anyway")


class InvariantViolated(FracsumError, AssertionError):
    pass


class CertificateFailed(FracsumError, RuntimeError):
    def __init__(self, step, margin, steps=()):
        self.step = step
        self.margin = margin
        self.steps = list(steps)
        super().__init__(f"certificate failed at step {step!r} with margin {margin!r}")


class ConfigInvalid(FracsumError, ValueError):
    pass
