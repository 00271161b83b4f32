"""Content-addressed file cache for pipeline stage outputs.

Keys are SHA-256 digests of a canonical JSON rendering of (stage, fields);
every config field that affects a stage's output must be part of its key, so
changing e.g. the kernel size silently invalidates exactly the entries it
should. Writes are atomic (temp file + rename), which makes concurrent
last-writer-wins safe and interrupted runs resumable.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from pathlib import Path


def cache_key(stage: str, **fields) -> str:
    canonical = json.dumps(
        {"stage": stage, **fields}, sort_keys=True, separators=(",", ":")
    )
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def content_hash(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


class FileCache:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.hits = 0
        self.misses = 0

    def _path(self, key: str, suffix: str) -> Path:
        return self.root / key[:2] / f"{key}{suffix}"

    def _write_atomic(self, path: Path, data: bytes) -> None:
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(dir=path.parent, prefix=".tmp-")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            os.replace(tmp_name, path)
        except BaseException:
            if os.path.exists(tmp_name):
                os.unlink(tmp_name)
            raise

    def has(self, key: str, suffix: str = ".json") -> bool:
        return self._path(key, suffix).is_file()

    def get_bytes(self, key: str, suffix: str = ".bin") -> bytes | None:
        path = self._path(key, suffix)
        if not path.is_file():
            self.misses += 1
            return None
        self.hits += 1
        return path.read_bytes()

    def put_bytes(self, key: str, data: bytes, suffix: str = ".bin") -> None:
        self._write_atomic(self._path(key, suffix), data)

    def get_json(self, key: str):
        raw = self.get_bytes(key, suffix=".json")
        return None if raw is None else json.loads(raw.decode("utf-8"))

    def put_json(self, key: str, value) -> None:
        data = json.dumps(value, sort_keys=True, separators=(",", ":")).encode("utf-8")
        self.put_bytes(key, data, suffix=".json")
