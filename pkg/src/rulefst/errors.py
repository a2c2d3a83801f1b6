"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: UsageError -> 1, DataError -> 2,
TrainingError -> 3.
"""


class RuleFstError(Exception):
    pass


class UsageError(RuleFstError):
    """Bad invocation or inconsistent configuration."""


class DataError(RuleFstError):
    """Malformed or inconsistent input data (rule files, corpora, vocab)."""


class TrainingError(RuleFstError):
    """Training diverged or could not proceed."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step
