"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class PathFairError(Exception):
    exit_code = 1


class ConfigError(PathFairError, ValueError):
    exit_code = 2


class IngestionError(PathFairError, ValueError):
    exit_code = 3


class ConvergenceError(PathFairError, RuntimeError):
    exit_code = 4


class ContractError(PathFairError, ValueError):
    """Inputs violate an operation's preconditions (fingerprints, shapes, coverage)."""

    exit_code = 5
