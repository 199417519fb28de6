"""Exception types shared by all modules."""


class InvalidParameter(ValueError):
    """A parameter violates a documented precondition."""


class WorkBudgetExceeded(RuntimeError):
    """An enumeration or expansion would exceed its configured work budget.

    ``partial`` carries whatever was completed before the budget check
    tripped (may be empty), ``budget`` the configured limit and ``needed``
    the estimated amount of work.
    """

    def __init__(self, message, budget=None, needed=None, partial=None):
        super().__init__(message)
        self.budget = budget
        self.needed = needed
        self.partial = partial if partial is not None else []
