"""Exception hierarchy shared by all ballotchain modules."""


class BallotChainError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(BallotChainError):
    """Malformed input: bad digest, bad pattern string, bad template, ..."""


class IntegrityError(BallotChainError):
    """A chain or stored state failed verification."""


class AuthorizationError(BallotChainError):
    """Action attempted by an identity that is not registered."""


class DuplicateVoteError(BallotChainError):
    """The identity has already voted in this election."""


class DuplicateRegistrationError(BallotChainError):
    """The composed identity is already present in the registry."""


class ConsensusAbort(BallotChainError):
    """The validator quorum rejected a proposed block."""

    def __init__(self, message: str, reasons: list[str] | None = None):
        super().__init__(message)
        self.reasons = reasons or []


class StorageError(BallotChainError):
    """Persistence failed; the commit was not acknowledged."""


class LoadError(BallotChainError):
    """Stored state is corrupt or inconsistent; refuse to start."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        loc = ""
        if path is not None:
            loc = f" [{path}" + (f":{line}" if line is not None else "") + "]"
        super().__init__(message + loc)
        self.path = path
        self.line = line
