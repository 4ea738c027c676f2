"""Exception types shared across the package."""


class MemsynapseError(Exception):
    """Base class for all errors raised by memsynapse."""


class ValidationError(MemsynapseError, ValueError):
    """A parameter violates one of its constraints.

    ``line`` is filled in by the experiment-file parser when the offending
    value came from a file; it stays ``None`` for direct construction.
    """

    def __init__(self, field: str, constraint: str, line: int | None = None):
        self.field = field
        self.constraint = constraint
        self.line = line
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{field}: {constraint}")


class NonFiniteState(MemsynapseError, ArithmeticError):
    """Integration produced a NaN or infinite state variable."""


class InvalidTerminals(MemsynapseError, ValueError):
    pass


class StimulusMismatch(MemsynapseError, ValueError):
    pass


class TooFewPulses(MemsynapseError, ValueError):
    pass


class TooFewSamples(MemsynapseError, ValueError):
    pass


class OutOfValidity(MemsynapseError, ValueError):
    """A closed-form oracle was evaluated outside its range of validity."""


class UnknownPreset(MemsynapseError, LookupError):
    pass


class ExperimentFileError(MemsynapseError):
    """Base for experiment-file errors that can be pinned to a line."""

    def __init__(self, line: int | None, message: str):
        self.line = line
        self.message = message
        where = f"line {line}: " if line is not None else ""
        super().__init__(f"{where}{message}")


class ExperimentSyntaxError(ExperimentFileError):
    pass


class DuplicateKeyError(ExperimentFileError):
    pass


class MissingSectionError(ExperimentFileError):
    pass
