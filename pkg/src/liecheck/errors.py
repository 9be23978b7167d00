"""Exception types shared across the toolkit."""


class AlgebraSpecError(ValueError):
    """A structure-constant document is malformed or internally inconsistent."""


class DegenerateKillingError(ValueError):
    """An operation needs a nondegenerate Killing metric but the algebra fails
    the semisimplicity test."""


class ConditioningError(RuntimeError):
    """A frame, metric, or series evaluation is too ill-conditioned to trust."""
