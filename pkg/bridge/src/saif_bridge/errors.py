class BridgeError(Exception):
    """Base for everything this package raises on purpose."""


class BridgeArgumentError(BridgeError):
    """Bad CLI arguments or option values."""


class RequestFormatError(BridgeError):
    """Malformed request or manifest text."""


class ModelLoadError(BridgeError):
    """Checkpoint could not be loaded or is unusable."""


class ModelOutputError(BridgeError):
    """Model produced something the fulfillment contract cannot accept."""
