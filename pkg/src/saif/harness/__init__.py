from .specs import RunSpec, SweepSpec, MODES, canonical_mode
from .gen import generate_corpus, list_corpus, load_scene, scene_paths
from .runner import run_corpus, run_image, derive_prompt
from .evaluate import evaluate_run
from .sweep import run_sweep
from .requests import export_requests

__all__ = [
    "RunSpec", "SweepSpec", "MODES", "canonical_mode",
    "generate_corpus", "list_corpus", "load_scene", "scene_paths",
    "run_corpus", "run_image", "derive_prompt",
    "evaluate_run", "run_sweep", "export_requests",
]
