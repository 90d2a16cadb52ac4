"""Exception hierarchy for the simulator."""


class SocSimError(Exception):
    """Base class for all simulator errors."""


class ProfileSyntaxError(SocSimError):
    """A profile document is not well-formed (bad JSON, wrong shape)."""


class ProfileValidationError(SocSimError):
    """A profile document violates a structural invariant (cycle, dangling edge, ...)."""


class ConfigurationError(SocSimError):
    """A run configuration is invalid (bad profile path, scale <= 0, ...)."""


class InvalidActionError(SocSimError):
    """An action references a stale task, an unknown PE, or a finished episode."""


class UnknownSchedulerError(SocSimError):
    """A scheduler name is not registered."""


class EpisodeDoneError(SocSimError):
    """step() was called on a finished (or never-reset) environment."""
