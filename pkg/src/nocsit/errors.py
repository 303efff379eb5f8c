"""Exception taxonomy shared across the package.

Two families matter to callers (and to the CLI's exit codes): bad input
(``ParameterError``) versus a mathematical check that actually failed
(``MathCheckError`` and subclasses).
"""


class ParameterError(ValueError):
    """Invalid configuration, parameter, or unmet precondition."""


class MathCheckError(RuntimeError):
    """A mathematical verification failed (not a usage problem)."""
