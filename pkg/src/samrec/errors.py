"""Exception hierarchy shared by every samrec module."""


class SamRecError(Exception):
    """Base class for all samrec errors."""


class MissingNodeError(SamRecError, KeyError):
    def __init__(self, node_id):
        super().__init__(node_id)
        self.node_id = node_id

    def __str__(self):
        return f"no such node: {self.node_id!r}"


class DuplicateNodeError(SamRecError, ValueError):
    pass


class KindMismatchError(SamRecError, ValueError):
    pass


class InvalidInteractionError(SamRecError, ValueError):
    pass


class NotRootAssetError(SamRecError, ValueError):
    pass


class SnapshotError(SamRecError, ValueError):
    """Raised for unreadable or truncated snapshot files."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DatasetError(SamRecError, ValueError):
    """Malformed dataset input; carries the offending file and line when known."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(where + message)


class MissingColumnError(DatasetError):
    pass


class RatingRangeError(DatasetError):
    pass


class EmptyInputError(SamRecError, ValueError):
    pass


class BenchConnectionError(SamRecError, ConnectionError):
    pass
