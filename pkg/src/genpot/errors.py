"""Exception types raised across the package."""


class GenpotError(Exception):
    """Base class for all package errors."""


# dataset / csv
class MissingColumnError(GenpotError, ValueError):
    def __init__(self, column, position):
        super().__init__(f"missing or misplaced column {column!r} at position {position}")
        self.column = column
        self.position = position


class MalformedRowError(GenpotError, ValueError):
    def __init__(self, row, detail=""):
        super().__init__(f"malformed row {row}: {detail}" if detail else f"malformed row {row}")
        self.row = row


class NonMonotoneTimeError(GenpotError, ValueError):
    pass


class EmptyDatasetError(GenpotError, ValueError):
    pass


class DatasetTooShortError(GenpotError, ValueError):
    pass


# control
class NoConvergenceError(GenpotError, RuntimeError):
    pass


# model
class ShapeMismatchError(GenpotError, ValueError):
    pass


class EmptyTrainingSetError(GenpotError, ValueError):
    pass


class ModelFormatError(GenpotError, ValueError):
    """Base for model file problems."""


class BadMagicError(ModelFormatError):
    pass


class TruncatedFileError(ModelFormatError):
    pass


class ShapeHeaderMismatchError(ModelFormatError):
    pass


class ModelOrderMismatchError(GenpotError, ValueError):
    pass


class ManifestError(GenpotError, ValueError):
    pass


# evaluation
class ValidationTooShortError(GenpotError, ValueError):
    pass


# runtime
class SeedTooShortError(GenpotError, ValueError):
    pass


class SeedSchemaMismatchError(GenpotError, ValueError):
    pass
