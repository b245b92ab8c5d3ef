"""File-based fulfillment of box-prompt requests.

Reads request manifests, runs a segmentation model (or a mock) once per
box, and writes checksummed probability-map files plus a completed
manifest for the cached-map consumer.
"""

from .errors import (
    BridgeArgumentError,
    BridgeError,
    ModelLoadError,
    ModelOutputError,
    RequestFormatError,
)
from .fulfill import FulfillSummary, fulfill_requests, map_filename
from .manifest import RequestFile, RequestLine, format_requests, parse_requests, read_requests
from .models import MockModel, TorchscriptModel, parse_mock
from .spfm import decode_map, encode_map, verify_map_file, write_map_file

__version__ = "0.1.0"
