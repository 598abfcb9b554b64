class DomainError(ValueError):
    """Input outside the mathematical domain of an operation."""


class NoStationaryDensity(DomainError):
    """The dynamics admit no stationary density for these parameters."""


class QuadratureError(ArithmeticError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message, estimate, error):
        super().__init__(f"{message} (estimate={estimate!r}, error estimate={error!r})")
        self.estimate = estimate
        self.error = error


class SimulationError(RuntimeError):
    """Monte Carlo integration aborted (blow-up or invalid state)."""
