from typing import List, Optional


# Base exception for everything raised by the package
class FedCDHException(Exception):
    pass


class InvalidConfiguration(FedCDHException):
    """Exception raised when a parameter or configuration value is out of range."""
    pass


class InputError(FedCDHException):
    """Exception raised when data handed to an operation is malformed."""
    pass


# ------------------------------------------------------------------------------------------------------------------------- #
# ------------------------------------------------------------------------------------------------------------------------- #
#  Statistics Exceptions

class NumericError(FedCDHException):
    """Exception raised when a linear solve or decomposition fails."""
    pass


class PreconditionViolation(FedCDHException):
    """Exception raised when a scoring routine is called on inputs it cannot score."""
    pass


# ------------------------------------------------------------------------------------------------------------------------- #
# ------------------------------------------------------------------------------------------------------------------------- #
#  Discovery Exceptions

class DiscoveryPhaseError(FedCDHException):
    """Exception raised when a discovery phase fails. Carries the phase label."""

    def __init__(self, phase: str, message: str):
        self.phase = phase
        super().__init__(f"[{phase}] {message}")


# ------------------------------------------------------------------------------------------------------------------------- #
# ------------------------------------------------------------------------------------------------------------------------- #
#  Protocol Exceptions

class ProtocolException(FedCDHException):
    """Base exception for all client/server protocol errors."""
    code: str = "protocol"


class ProtocolError(ProtocolException):
    """Exception raised when a message or upload violates the protocol."""

    def __init__(self, message: str, client_id: Optional[str] = None):
        self.client_id = client_id
        prefix = f"client {client_id}: " if client_id else ""
        super().__init__(f"{prefix}{message}")


class VersionMismatch(ProtocolException):
    code = "version"


class DuplicateUploadConflict(ProtocolException):
    """Exception raised when a client re-uploads moments that differ from its first upload."""
    code = "conflict"


class PartialRosterError(ProtocolException):
    """Exception raised when the roster did not complete before the timeout."""
    code = "roster"

    def __init__(self, missing: List[str]):
        self.missing = list(missing)
        super().__init__(f"Roster incomplete, missing clients: {', '.join(self.missing)}")


class RemoteError(ProtocolException):
    """Exception raised on a client when the server answers with an Error message."""

    def __init__(self, code: str, reason: str):
        self.code = code
        self.reason = reason
        super().__init__(f"Server error [{code}]: {reason}")
