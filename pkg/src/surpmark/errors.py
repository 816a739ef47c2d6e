"""Exception types raised across the package.

Every error is a subclass of :class:`SurpMarkError` so callers can catch the
whole family with one clause; the CLI maps them to exit code 1.
"""


class SurpMarkError(Exception):
    """Base class for all package errors."""


class EmptyInput(SurpMarkError):
    pass


class TooFewDistinctValues(SurpMarkError):
    def __init__(self, k, distinct):
        super().__init__(f"need at least k={k} distinct values, got {distinct}")
        self.k = k
        self.distinct = distinct


class NonFiniteValue(SurpMarkError):
    def __init__(self, index):
        super().__init__(f"non-finite value at index {index}")
        self.index = index


class StateOutOfRange(SurpMarkError):
    def __init__(self, index, value):
        super().__init__(f"state {value} at position {index} outside the alphabet")
        self.index = index
        self.value = value


class DimensionMismatch(SurpMarkError):
    pass


class NoTransitions(SurpMarkError):
    def __init__(self, which="input"):
        super().__init__(f"{which} has no transitions")
        self.which = which


class Reducible(SurpMarkError):
    pass


class NotStochastic(SurpMarkError):
    pass


class SingularSolve(SurpMarkError):
    pass


class NonFinite(SurpMarkError):
    pass


class UndefinedRow(SurpMarkError):
    def __init__(self, state):
        super().__init__(f"row for state {state} is undefined (zero visits) "
                         "but carries positive weight")
        self.state = state


class SequenceTooShort(SurpMarkError):
    pass


class RecordTooShort(SurpMarkError):
    def __init__(self, ids):
        ids = list(ids)
        super().__init__(
            f"{len(ids)} record(s) have fewer than 2 surprisals: {ids[:10]}"
            + (" ..." if len(ids) > 10 else "")
        )
        self.ids = ids


class EmptyCorpus(SurpMarkError):
    def __init__(self, side):
        super().__init__(f"{side} corpus is empty")
        self.side = side


class EmptyClass(SurpMarkError):
    def __init__(self, which):
        super().__init__(f"no scores for class {which!r}")
        self.which = which


class JsonlError(SurpMarkError):
    def __init__(self, line, message):
        super().__init__(f"line {line}: {message}")
        self.line = line


class PackIoError(SurpMarkError):
    pass


class VersionMismatch(SurpMarkError):
    def __init__(self, found, supported):
        super().__init__(f"pack format_version {found} not supported "
                         f"(supported: {supported})")
        self.found = found
        self.supported = supported


class CorruptPack(SurpMarkError):
    def __init__(self, field, message=""):
        super().__init__(f"corrupt pack field {field!r}" + (f": {message}" if message else ""))
        self.field = field


class InvalidSpec(SurpMarkError):
    pass


class ConfigError(SurpMarkError):
    def __init__(self, field, message):
        super().__init__(f"config field {field!r}: {message}")
        self.field = field
