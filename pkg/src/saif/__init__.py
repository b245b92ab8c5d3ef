"""Stability-aware inference for box-prompted segmentation.

Given one user box and a frozen promptable segmenter, the pipeline
enumerates scaled and jittered prompt hypotheses, scores each by the
stability of its binarized predictions under jitter, picks one shared
threshold, fuses the best candidates with score-normalized weights,
and binarizes. Everything downstream of the segmenter is training-free
and deterministic given the seed.
"""

from .config import SaifConfig, resolve_config
from .errors import (SaifError, InvalidArgumentError, DegenerateFamilyError,
                     InputIncompleteError, MapFormatError, IntegrityError)
from .geometry import Box
from .family import PromptFamily, build_family
from .thresholds import ThresholdSet, build_threshold_set, percentile
from .stability import (ScoreTable, binarize, consensus, soft_iou,
                        compute_score_table, select_threshold)
from .fusion import (FusionResult, select_top_n, inner_average, fuse,
                     run_saif)
from .metrics import EvalReport, dice, iou, hd95

__version__ = "0.1.0"

__all__ = [
    "SaifConfig", "resolve_config",
    "SaifError", "InvalidArgumentError", "DegenerateFamilyError",
    "InputIncompleteError", "MapFormatError", "IntegrityError",
    "Box", "PromptFamily", "build_family",
    "ThresholdSet", "build_threshold_set", "percentile",
    "ScoreTable", "binarize", "consensus", "soft_iou",
    "compute_score_table", "select_threshold",
    "FusionResult", "select_top_n", "inner_average", "fuse", "run_saif",
    "EvalReport", "dice", "iou", "hd95",
    "__version__",
]
