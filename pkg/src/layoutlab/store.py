"""File-backed run records and application configuration.

One JSON file per run under ``data_dir/runs/<id>/record.json``; writes
go through a temp file and :func:`os.replace` so a crash never leaves
a half-written record behind.
"""

from __future__ import annotations

import json
import os
import tempfile
import uuid
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path

from .generator import GenerationConfig
from .geometry import Layout, layout_from_json, layout_to_json
from .llm import LlmConfig

__all__ = [
    "RunStatus",
    "RunRecord",
    "RunNotFound",
    "CorruptRecord",
    "RunStore",
    "AppConfig",
    "new_run_id",
]


class RunStatus(Enum):
    PENDING = "pending"
    LAYOUT_DONE = "layout_done"
    IMAGE_DONE = "image_done"
    FAILED = "failed"


# Allowed transitions: forward through the pipeline, or to FAILED from
# any non-terminal state.  IMAGE_DONE and FAILED are terminal.
_RANK = {RunStatus.PENDING: 0, RunStatus.LAYOUT_DONE: 1, RunStatus.IMAGE_DONE: 2}


def _utcnow() -> str:
    return datetime.now(timezone.utc).isoformat()


def new_run_id() -> str:
    return uuid.uuid4().hex


@dataclass(frozen=True)
class RunRecord:
    id: str
    caption: str
    status: RunStatus = RunStatus.PENDING
    layout: Layout | None = None
    config: dict = field(default_factory=dict)
    error: str | None = None
    created_at: str = field(default_factory=_utcnow)
    updated_at: str = field(default_factory=_utcnow)

    def __post_init__(self) -> None:
        if self.status is RunStatus.FAILED and not self.error:
            raise ValueError("failed records must carry an error message")

    def advanced(self, status: RunStatus, **changes) -> "RunRecord":
        """Copy with a later status; rejects regressions and reentry."""
        if self.status is RunStatus.FAILED:
            raise ValueError(f"run {self.id} already failed")
        if status is not RunStatus.FAILED and _RANK[status] <= _RANK[self.status]:
            raise ValueError(f"cannot move {self.status.value} -> {status.value}")
        return replace(self, status=status, updated_at=_utcnow(), **changes)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "caption": self.caption,
            "status": self.status.value,
            "layout": None if self.layout is None else layout_to_json(self.layout),
            "config": self.config,
            "error": self.error,
            "created_at": self.created_at,
            "updated_at": self.updated_at,
        }

    @classmethod
    def from_json(cls, payload: dict) -> "RunRecord":
        layout = payload.get("layout")
        return cls(
            id=payload["id"],
            caption=payload["caption"],
            status=RunStatus(payload["status"]),
            layout=None if layout is None else layout_from_json(layout),
            config=payload.get("config", {}),
            error=payload.get("error"),
            created_at=payload["created_at"],
            updated_at=payload["updated_at"],
        )


class RunNotFound(Exception):
    def __init__(self, run_id: str):
        super().__init__(f"no run record for id {run_id!r}")
        self.run_id = run_id


class CorruptRecord(Exception):
    def __init__(self, path: Path, cause: Exception):
        super().__init__(f"unreadable run record at {path}: {cause}")
        self.path = path


class RunStore:
    """Run records and their artifact directories under one root."""

    def __init__(self, data_dir: str | Path):
        self.root = Path(data_dir) / "runs"

    def run_dir(self, run_id: str) -> Path:
        return self.root / run_id

    def save(self, record: RunRecord) -> None:
        directory = self.run_dir(record.id)
        directory.mkdir(parents=True, exist_ok=True)
        payload = json.dumps(record.to_json(), indent=2) + "\n"
        fd, tmp_path = tempfile.mkstemp(dir=directory, suffix=".tmp")
        try:
            with os.fdopen(fd, "w") as fh:
                fh.write(payload)
            os.replace(tmp_path, directory / "record.json")
        finally:
            if os.path.exists(tmp_path):
                os.unlink(tmp_path)

    def load(self, run_id: str) -> RunRecord:
        path = self.run_dir(run_id) / "record.json"
        if not path.exists():
            raise RunNotFound(run_id)
        try:
            return RunRecord.from_json(json.loads(path.read_text()))
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise CorruptRecord(path, exc) from exc

    def list_ids(self) -> list[str]:
        if not self.root.is_dir():
            return []
        return sorted(p.name for p in self.root.iterdir() if (p / "record.json").exists())


@dataclass(frozen=True)
class AppConfig:
    """Service-level settings: storage, backends, bind address."""

    data_dir: Path = Path("data")
    llm: LlmConfig = field(default_factory=LlmConfig.from_env)
    generation: GenerationConfig = field(default_factory=GenerationConfig)
    host: str = "127.0.0.1"
    port: int = 8000
    parallelism: int = 4
    sync_timeout_s: float = 120.0
    cors_origins: tuple[str, ...] = ("*",)
    use_mock_llm: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "data_dir", Path(self.data_dir))

    @classmethod
    def load(cls, path: str | Path | None = None, **overrides) -> "AppConfig":
        """Build from an optional JSON file, env vars, then overrides.

        Recognized file keys mirror the field names; ``llm`` and
        ``generation`` take nested objects.  ``LMD_DATA_DIR`` and the
        LLM env vars override the file.
        """
        values: dict = {}
        if path is not None:
            raw = json.loads(Path(path).read_text())
            for key in ("data_dir", "host", "port", "parallelism", "sync_timeout_s", "use_mock_llm"):
                if key in raw:
                    values[key] = raw[key]
            if "cors_origins" in raw:
                values["cors_origins"] = tuple(raw["cors_origins"])
            if "generation" in raw:
                values["generation"] = GenerationConfig(
                    **{
                        k: tuple(v) if k in ("latent_shape", "canvas") else v
                        for k, v in raw["generation"].items()
                    }
                )
            values["llm"] = LlmConfig.from_env(**raw.get("llm", {}))
        env_dir = os.environ.get("LMD_DATA_DIR")
        if env_dir:
            values["data_dir"] = env_dir
        values.update(overrides)
        if "data_dir" in values:
            values["data_dir"] = Path(values["data_dir"])
        return cls(**values)

    def ensure_writable(self) -> None:
        """Create the data dir and prove it accepts writes."""
        self.data_dir.mkdir(parents=True, exist_ok=True)
        probe = self.data_dir / ".write-probe"
        probe.write_text("ok")
        probe.unlink()
