"""Corpus orchestration: config, wire protocol, mock backends, runner, eval."""

from .config import BackendEndpoint, PipelineConfig, load_config
from .evaluation import EvalReport, evaluate
from .protocol import BackendRequest, BackendResponse, backend_call, open_transport
from .runner import SongInput, load_inputs, run_pipeline

__all__ = [
    "BackendEndpoint",
    "BackendRequest",
    "BackendResponse",
    "EvalReport",
    "PipelineConfig",
    "SongInput",
    "backend_call",
    "evaluate",
    "load_config",
    "load_inputs",
    "open_transport",
    "run_pipeline",
]
