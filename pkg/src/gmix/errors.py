"""Exception types raised across the package."""


class GmixError(Exception):
    """Base class for all package errors."""


class DimensionMismatch(GmixError, ValueError):
    """Two objects that must share n, k or an observation shape do not."""


class ModelError(GmixError, ValueError):
    """A model specification is invalid or cannot be evaluated."""


class ConfigError(GmixError, ValueError):
    """An experiment configuration document is invalid."""


class BudgetExceeded(GmixError):
    """An exhaustive search would enumerate more assignments than allowed."""

    def __init__(self, required: int, budget: int, what: str = "assignments"):
        self.required = required
        self.budget = budget
        super().__init__(
            f"exhaustive search needs {required} {what}, budget is {budget} "
            f"(raise the budget to at least {required})"
        )
