"""Exception and warning types shared across the package."""


class DomainError(ValueError):
    """Input lies outside the mathematically supported domain."""


class NumericalFailure(RuntimeError):
    """A numerical procedure failed to converge or lost a precondition."""


class DegeneratePointError(ValueError):
    """Evaluation was requested exactly at a degenerate parameter point."""


class NearCriticalWarning(UserWarning):
    """Result was evaluated inside the guard band around an Ising critical point."""


class RegimeWarning(UserWarning):
    """Parameters lie outside the validated regime; accuracy is not guaranteed."""
