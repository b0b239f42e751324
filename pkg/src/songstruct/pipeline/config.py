"""Pipeline configuration: YAML file plus environment overrides.

The config file is a single YAML mapping covering every PipelineConfig
field. Environment variables prefixed SONGSTRUCT_ override file values;
a double underscore descends one nesting level, so
SONGSTRUCT_CALIBRATION__PAD_S=0.5 overrides calibration.pad_s and
SONGSTRUCT_WORKER_COUNT=8 overrides worker_count. Values are parsed as
YAML scalars.
"""

from __future__ import annotations

import shlex
from dataclasses import dataclass, field
from typing import Any, Mapping

import yaml

from ..errors import ConfigError
from ..model import StructureLabel
from ..timeline import DEFAULT_LABEL_MAPPING, CalibrationParams, LabelMapping

ENV_PREFIX = "SONGSTRUCT_"

STAGES = ("separate", "structure", "transcribe", "align")
MODES = ("with_reference_lyrics", "dual_head")
ENDPOINT_KINDS = ("mock", "command", "http")

_TOP_LEVEL_KEYS = {
    "mode",
    "output_dir",
    "worker_count",
    "backends",
    "calibration",
    "werfix",
    "eval",
    "label_mapping",
}


@dataclass(frozen=True)
class BackendEndpoint:
    """Where one stage's model lives.

    kind "mock" answers in-process from the deterministic tables (seed
    selects the variant; fail_songs forces ok=false for those songs).
    kind "command" spawns the argv as a newline-delimited-JSON worker.
    kind "http" POSTs requests to the given URL.
    """

    kind: str
    command: tuple[str, ...] = ()
    url: str = ""
    seed: int = 0
    fail_songs: tuple[str, ...] = ()
    timeout_s: float = 30.0

    def __post_init__(self):
        if self.kind not in ENDPOINT_KINDS:
            raise ConfigError(f"unknown backend kind {self.kind!r}")
        if self.kind == "command" and not self.command:
            raise ConfigError("command backend needs a non-empty command")
        if self.kind == "http" and not self.url:
            raise ConfigError("http backend needs a url")
        if self.timeout_s <= 0:
            raise ConfigError(f"timeout_s must be positive, got {self.timeout_s}")
        object.__setattr__(self, "command", tuple(self.command))
        object.__setattr__(self, "fail_songs", tuple(self.fail_songs))


@dataclass(frozen=True)
class PipelineConfig:
    """Everything run_pipeline needs, validated on construction.

    backends maps each stage to a tuple of endpoints; every stage takes
    exactly one except transcribe, which takes one or two (two heads are
    required in dual_head mode, where the second is the arbitration
    check).
    """

    backends: dict = field(default_factory=dict)
    mode: str = "with_reference_lyrics"
    output_dir: str = "out"
    worker_count: int = 4
    label_mapping: LabelMapping = DEFAULT_LABEL_MAPPING
    calibration: CalibrationParams = CalibrationParams()
    fix_reject_threshold: float = 0.7
    dual_head_accept_threshold: float = 0.5
    collar_s: float = 0.0
    score_silence: bool = True

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {'/'.join(MODES)}, got {self.mode!r}")
        if self.worker_count < 1:
            raise ConfigError(f"worker_count must be positive, got {self.worker_count}")
        if not self.output_dir:
            raise ConfigError("output_dir must be set")
        backends = dict(self.backends)
        for stage in STAGES:
            if stage not in backends:
                raise ConfigError(f"backends missing stage {stage!r}")
        for stage in backends:
            if stage not in STAGES:
                raise ConfigError(f"unknown backend stage {stage!r}")
        normalized = {}
        for stage, value in backends.items():
            endpoints = tuple(value) if isinstance(value, (list, tuple)) else (value,)
            if not all(isinstance(e, BackendEndpoint) for e in endpoints):
                raise ConfigError(f"backends[{stage!r}] must hold BackendEndpoint values")
            if stage == "transcribe":
                if len(endpoints) not in (1, 2):
                    raise ConfigError("transcribe takes one or two endpoints")
            elif len(endpoints) != 1:
                raise ConfigError(f"stage {stage!r} takes exactly one endpoint")
            normalized[stage] = endpoints
        if self.mode == "dual_head" and len(normalized["transcribe"]) != 2:
            raise ConfigError("dual_head mode requires two transcribe endpoints")
        if not 0 <= self.fix_reject_threshold:
            raise ConfigError("fix_reject_threshold must be non-negative")
        if not 0 <= self.dual_head_accept_threshold:
            raise ConfigError("dual_head_accept_threshold must be non-negative")
        if self.collar_s < 0:
            raise ConfigError("collar_s must be non-negative")
        object.__setattr__(self, "backends", normalized)

    def endpoint(self, stage: str) -> BackendEndpoint:
        return self.backends[stage][0]

    def transcribe_heads(self) -> tuple[BackendEndpoint, ...]:
        return self.backends["transcribe"]


def _parse_endpoint(value: Any, stage: str) -> BackendEndpoint:
    if not isinstance(value, Mapping):
        raise ConfigError(f"backends.{stage}: expected a mapping, got {type(value).__name__}")
    data = dict(value)
    kind = data.pop("kind", None)
    if kind not in ENDPOINT_KINDS:
        raise ConfigError(f"backends.{stage}: kind must be one of {'/'.join(ENDPOINT_KINDS)}")
    command = data.pop("command", ())
    if isinstance(command, str):
        command = tuple(shlex.split(command))
    elif isinstance(command, list):
        command = tuple(str(part) for part in command)
    kwargs = {
        "kind": kind,
        "command": command,
        "url": str(data.pop("url", "")),
        "seed": int(data.pop("seed", 0)),
        "timeout_s": float(data.pop("timeout_s", 30.0)),
    }
    fail_songs = data.pop("fail_songs", ())
    if isinstance(fail_songs, str):
        fail_songs = (fail_songs,)
    kwargs["fail_songs"] = tuple(str(s) for s in fail_songs)
    if data:
        raise ConfigError(f"backends.{stage}: unknown keys {sorted(data)}")
    return BackendEndpoint(**kwargs)


def _parse_label_mapping(value: Any) -> LabelMapping:
    if not isinstance(value, Mapping):
        raise ConfigError("label_mapping must be a mapping of source -> label")
    entries = dict(DEFAULT_LABEL_MAPPING.entries)
    for src, dst in value.items():
        try:
            entries[str(src)] = StructureLabel(str(dst))
        except ValueError:
            raise ConfigError(f"label_mapping.{src}: unknown target label {dst!r}") from None
    return LabelMapping(entries=entries)


def _apply_env(data: dict, env: Mapping[str, str]) -> dict:
    for name in sorted(env):
        if not name.startswith(ENV_PREFIX):
            continue
        path = [part.lower() for part in name[len(ENV_PREFIX) :].split("__")]
        if not all(path):
            raise ConfigError(f"malformed override variable {name}")
        try:
            value = yaml.safe_load(env[name])
        except yaml.YAMLError:
            value = env[name]
        node = data
        for key in path[:-1]:
            existing = node.get(key)
            if not isinstance(existing, dict):
                existing = {}
                node[key] = existing
            node = existing
        node[path[-1]] = value
    return data


def _section(data: dict, key: str) -> dict:
    value = data.get(key, {})
    if not isinstance(value, Mapping):
        raise ConfigError(f"{key} must be a mapping")
    return dict(value)


def build_config(data: Mapping[str, Any]) -> PipelineConfig:
    """Construct a validated PipelineConfig from a plain mapping."""
    data = dict(data)
    unknown = set(data) - _TOP_LEVEL_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")

    raw_backends = data.get("backends")
    if not isinstance(raw_backends, Mapping):
        raise ConfigError("backends section is required")
    backends = {}
    for stage, value in raw_backends.items():
        if isinstance(value, list):
            backends[stage] = tuple(_parse_endpoint(item, str(stage)) for item in value)
        else:
            backends[stage] = _parse_endpoint(value, str(stage))

    calibration_raw = _section(data, "calibration")
    unknown = set(calibration_raw) - {"min_vocal_coverage", "min_gap_s", "pad_s"}
    if unknown:
        raise ConfigError(f"unknown calibration keys {sorted(unknown)}")
    calibration = CalibrationParams(
        min_vocal_coverage=float(calibration_raw.get("min_vocal_coverage", 0.2)),
        min_gap_s=float(calibration_raw.get("min_gap_s", 2.0)),
        pad_s=float(calibration_raw.get("pad_s", 0.3)),
    )

    werfix_raw = _section(data, "werfix")
    unknown = set(werfix_raw) - {"reject_threshold", "accept_threshold"}
    if unknown:
        raise ConfigError(f"unknown werfix keys {sorted(unknown)}")

    eval_raw = _section(data, "eval")
    unknown = set(eval_raw) - {"collar_s", "score_silence"}
    if unknown:
        raise ConfigError(f"unknown eval keys {sorted(unknown)}")

    mapping = DEFAULT_LABEL_MAPPING
    if "label_mapping" in data:
        mapping = _parse_label_mapping(data["label_mapping"])

    try:
        return PipelineConfig(
            backends=backends,
            mode=str(data.get("mode", "with_reference_lyrics")),
            output_dir=str(data.get("output_dir", "out")),
            worker_count=int(data.get("worker_count", 4)),
            label_mapping=mapping,
            calibration=calibration,
            fix_reject_threshold=float(werfix_raw.get("reject_threshold", 0.7)),
            dual_head_accept_threshold=float(werfix_raw.get("accept_threshold", 0.5)),
            collar_s=float(eval_raw.get("collar_s", 0.0)),
            score_silence=bool(eval_raw.get("score_silence", True)),
        )
    except (TypeError, ValueError) as e:
        raise ConfigError(str(e)) from None


def load_config(path: str, env: Mapping[str, str] | None = None) -> PipelineConfig:
    """Load a YAML config file and apply SONGSTRUCT_ environment overrides.

    env defaults to os.environ; pass a mapping to isolate tests.
    """
    if env is None:
        import os

        env = os.environ
    try:
        with open(path, encoding="utf-8") as f:
            data = yaml.safe_load(f)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e.strerror or e}") from None
    except yaml.YAMLError as e:
        raise ConfigError(f"invalid YAML in {path}: {e}") from None
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"config root must be a mapping, got {type(data).__name__}")
    data = _apply_env(data, env)
    return build_config(data)
