"""Error types shared by the library and the CLI"""

from typing import Any, Dict


class StandbyLifetimeError(Exception):
    """Base class for every error raised by standby_lifetime"""

    code = "error"

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details

    def to_record(self) -> Dict[str, Any]:
        """Machine-readable error record emitted by the CLI"""
        return {"error": self.code, "message": self.message, "details": self.details}


class DomainError(StandbyLifetimeError, ValueError):
    """An argument lies outside the domain of an operation"""

    code = "domain_error"


class NumericalFailure(StandbyLifetimeError):
    """A numerical procedure could not produce a trustworthy result"""

    code = "numerical_failure"


class QuadratureFailure(NumericalFailure):
    """Adaptive quadrature did not reach its tolerance"""

    code = "quadrature_failure"


class SingularSystem(NumericalFailure):
    """The transform or mean-lifetime linear system is numerically singular"""

    code = "singular_system"


class InversionUnstable(NumericalFailure):
    """Numerical Laplace inversion oscillates beyond tolerance"""

    code = "inversion_unstable"


class SimulationOverrun(NumericalFailure):
    """A simulated lifetime exceeded the working-period cap"""

    code = "simulation_overrun"


class ChecksFailed(NumericalFailure):
    """At least one oracle check of the validation suite failed"""

    code = "checks_failed"


class ConfigError(StandbyLifetimeError):
    """Base class for configuration problems"""

    code = "config_error"


class ConfigParseError(ConfigError):
    """The configuration text is malformed or has unknown keys"""

    code = "parse_error"


class ConfigValidationError(ConfigError):
    """A configuration value breaches a constraint"""

    code = "validation_error"
