"""Exception types shared across the package."""


class InfeasibleParameterError(ValueError):
    """Parameters are syntactically valid but outside the supported scale.

    Raised e.g. when an exhaustive-enumeration procedure is asked to run
    above its hard cap. CLI maps this to exit code 3.
    """


class OracleExhaustedError(RuntimeError):
    """A bounded instance oracle ran out of draws mid-computation."""

    def __init__(self, draws_used, budget, phase):
        self.draws_used = draws_used
        self.budget = budget
        self.phase = phase
        super().__init__(
            f"oracle exhausted during {phase}: used {draws_used} of {budget} draws"
        )
