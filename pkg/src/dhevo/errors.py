"""Exception types shared across the toolkit."""


class DhevoError(Exception):
    """Base class for all toolkit errors."""


# --- model / instance validation ---

class InstanceError(DhevoError):
    """An Instance violates a structural invariant."""


class DuplicateEntry(InstanceError):
    def __init__(self, row: int, col: int):
        super().__init__(f"duplicate constraint entry at (row={row}, col={col})")
        self.row = row
        self.col = col


class IndexOutOfRange(InstanceError):
    pass


class EmptyBoundBox(InstanceError):
    def __init__(self, var: int, lb: float, ub: float):
        super().__init__(f"variable {var} has empty bound box [{lb}, {ub}]")
        self.var = var


class DimensionMismatch(DhevoError):
    pass


# --- solving ---

class TooLarge(DhevoError):
    """Enumeration bound exceeded in the brute-force oracle."""


class Unsolved(DhevoError):
    """A required solve did not reach a usable status."""


# --- diving ---

class UnknownScorer(DhevoError):
    pass


class NotFractional(DhevoError):
    def __init__(self, var: int):
        super().__init__(f"variable {var} is not a fractional integer candidate")
        self.var = var


# --- DSL ---

class DslError(DhevoError):
    """Base for scoring-language front-end errors."""


class ParseError(DslError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} at line {line}, column {col}")
        self.line = line
        self.col = col


class UnknownIdentifier(DslError):
    pass


class DslTypeError(DslError):
    pass


class LimitExceeded(DslError):
    """Program exceeds the depth or node-count cap."""


# --- agents ---

class MissingTemplate(DhevoError):
    pass


class MissingPlaceholder(DhevoError):
    pass


class MarkerMissing(DhevoError):
    def __init__(self, which: str):
        super().__init__(f"response lacks {which} markers")
        self.which = which


class EpisodeFailed(DhevoError):
    """A generation episode produced no valid candidate within its retry budget."""


class ProviderError(DhevoError):
    pass


class HttpError(ProviderError):
    def __init__(self, status: int, detail: str = ""):
        super().__init__(f"HTTP {status}: {detail}" if detail else f"HTTP {status}")
        self.status = status


class QuotaExceeded(ProviderError):
    pass


class ProviderTimeout(ProviderError):
    pass


# --- evolution / metrics ---

class TooFew(DhevoError):
    pass


class NonMonotoneTrace(DhevoError):
    pass


# --- generators / io ---

class InfeasibleSpec(DhevoError):
    pass


class SchemaMismatch(DhevoError):
    def __init__(self, expected, found):
        super().__init__(f"schema_version mismatch: expected {expected}, found {found}")
        self.expected = expected
        self.found = found


class ConfigError(DhevoError):
    pass


class IoError(DhevoError):
    pass
