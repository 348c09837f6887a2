"""Semantic exception hierarchy.

Error classes map onto CLI exit codes (see cli.py): configuration problems
exit 2, model-consistency failures exit 3, I/O problems exit 4.
"""


class KlscError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(KlscError, ValueError):
    """An input value violates a documented precondition or invariant."""


class DomainError(KlscError, ValueError):
    """A mathematically well-formed input with no valid answer
    (e.g. inverting the star operator past its reachable range)."""


class ModelError(KlscError):
    """A joint distribution fails a structural assumption the caller
    promised (e.g. the factorization Markov chains do not hold)."""


class ConfigError(KlscError, ValueError):
    """A run configuration file is malformed; carries a dotted field path."""

    def __init__(self, path: str, message: str):
        self.path = path
        self.message = message
        super().__init__(f"{path}: {message}")
