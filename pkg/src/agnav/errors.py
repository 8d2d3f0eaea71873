"""Exception types shared across the toolkit."""


class AgnavError(Exception):
    """Base class for all toolkit errors."""


class InvalidInputError(AgnavError):
    """An argument violates a documented precondition."""


class EmptyMaskError(InvalidInputError):
    """A mask with no set pixels was used for depth extraction."""


class MissingReferenceError(InvalidInputError):
    """Depth scaling was requested with no reference objects."""


class DegenerateReferenceError(InvalidInputError):
    """A reference object's masked median depth is zero."""


class FrameMismatchError(InvalidInputError):
    """Two inputs disagree on their coordinate frame."""


class BackendError(AgnavError):
    """A detection backend failed (transport, status, or payload)."""


class FixtureNotFoundError(BackendError):
    """The replay backend has no fixture for the requested image."""


class SchemaError(AgnavError):
    """A document failed validation; `path` names the offending field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


class UnreachableError(AgnavError):
    """No path exists between the requested cells."""


class AnchorError(AgnavError):
    """A candidate path does not start at the session anchor."""


class InvalidPathError(AgnavError):
    """A path violates grid constraints (occupied cells, adjacency)."""


class EmptySessionError(AgnavError):
    """The plan session has no registered paths to concatenate."""


class ProtocolError(AgnavError):
    """An event is not legal in the mission manager's current phase."""


class MissionConflictError(AgnavError):
    """A mission is already running in this session."""
