"""Exception types shared across the package."""


class BeaconSimError(Exception):
    """Base class for all package-specific errors."""


class DomainError(BeaconSimError):
    """A position or cell index lies outside the declared domain."""


class ParameterError(BeaconSimError):
    """A configuration value violates a documented precondition."""


class ConnectivityError(BeaconSimError):
    """An operation that requires a connected graph saw a disconnected one."""


class HorizonError(BeaconSimError):
    """The smoothness bound is undefined for the requested time gap: the
    distance can collapse within it, so the ratio bound is vacuous."""


class ProtocolInvariantError(BeaconSimError):
    """Protocol state violated a structural guarantee; the run aborts."""


class DeliveryError(BeaconSimError):
    """A forward could not reach its destination (disconnected graph)."""
