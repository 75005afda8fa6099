"""Exception hierarchy shared across the pipeline stages."""


class ProsimError(Exception):
    """Base class for all package errors."""


class LogParseError(ProsimError):
    """Malformed cell in the input CSV; carries the 1-based row number."""

    def __init__(self, message, row=None):
        super().__init__(message if row is None else f"row {row}: {message}")
        self.row = row


class LogConfigError(ProsimError):
    """Column mapping or format configuration does not match the input."""


class LogValidationError(ProsimError):
    """Parsed rows violate log invariants; carries offending row numbers."""

    def __init__(self, message, rows=()):
        super().__init__(message)
        self.rows = tuple(rows)


class DiscoveryError(ProsimError):
    """Graph construction produced a structurally invalid model."""


class AlignmentBudgetError(ProsimError):
    """Alignment search exceeded its state budget; caller should replace."""


class ReplayError(ProsimError):
    """Activity sequence does not replay on the process graph."""


class GenerationError(ProsimError):
    """Sequence generation could not produce the requested bag."""


class OptimizationError(ProsimError):
    """Every structure-search trial failed; carries per-trial diagnostics."""

    def __init__(self, message, trials=()):
        super().__init__(message)
        self.trials = list(trials)


class NetworkSpecError(ProsimError):
    """Layer dimensions or kinds are inconsistent."""


class TrainingError(ProsimError):
    """Training diverged (NaN loss) or could not run."""


class FitError(ProsimError):
    """Distribution fitting has too little data."""


class UnknownActivityError(ProsimError):
    """Activity label missing from the embedding table; extend it first."""


class DuplicateActivityError(ProsimError):
    """Activity label already present in the embedding table."""


class StageError(ProsimError):
    """Pipeline stage failure wrapper; names the stage that raised."""

    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}': {cause}")
        self.stage = stage
        self.cause = cause
