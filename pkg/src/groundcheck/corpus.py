"""Evaluation corpus ingest: line-delimited JSON records with derived categories.

Manifest format: UTF-8, one JSON object per line, keys exactly
{id, image, question, reference_answer}. The ``image`` value is a path
(resolved relative to the manifest file) or an http(s) URL; URL fetches are
cached on disk keyed by the URL hash.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path

import httpx

from groundcheck.errors import ManifestError, TransportError
from groundcheck.taxonomy import QuestionCategory, classify

logger = logging.getLogger(__name__)

_RECORD_KEYS = {"id", "image", "question", "reference_answer"}


@dataclass(frozen=True)
class CorpusRecord:
    id: str
    image: str
    question: str
    reference_answer: str
    categories: frozenset[QuestionCategory]
    image_missing: bool = False


@dataclass(frozen=True)
class CorpusManifest:
    records: tuple[CorpusRecord, ...]
    source_name: str
    record_limit: int | None = None
    base_dir: Path | None = None

    def __len__(self) -> int:
        return len(self.records)

    def category_counts(self) -> dict[QuestionCategory, int]:
        counts = {category: 0 for category in QuestionCategory}
        for record in self.records:
            for category in record.categories:
                counts[category] += 1
        return counts


def _is_url(image: str) -> bool:
    return image.startswith("http://") or image.startswith("https://")


def load_manifest(
    path: str | Path, limit: int | None = None, strict: bool = False
) -> CorpusManifest:
    """Parse and validate a manifest; truncate to ``limit`` from the front.

    Malformed lines and duplicate ids raise ManifestError naming the line(s).
    Records whose local image file is missing are flagged skippable with a
    warning, or rejected outright in strict mode.
    """
    path = Path(path)
    if not path.is_file():
        raise ManifestError(f"manifest not found: {path}")
    if limit is not None and limit < 0:
        raise ManifestError(f"record limit must be non-negative, got {limit}")

    records: list[CorpusRecord] = []
    seen: dict[str, int] = {}
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            if limit is not None and len(records) >= limit:
                break
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ManifestError(f"line {line_no}: malformed JSON ({exc.msg})") from exc
            if not isinstance(raw, dict) or set(raw) != _RECORD_KEYS:
                raise ManifestError(
                    f"line {line_no}: keys must be exactly "
                    f"{sorted(_RECORD_KEYS)}, got {sorted(raw) if isinstance(raw, dict) else type(raw).__name__}"
                )
            if not all(isinstance(raw[key], str) for key in _RECORD_KEYS):
                raise ManifestError(f"line {line_no}: all fields must be strings")
            record_id = raw["id"]
            if not record_id:
                raise ManifestError(f"line {line_no}: empty id")
            if record_id in seen:
                raise ManifestError(
                    f"duplicate id {record_id!r} at lines {seen[record_id]} and {line_no}"
                )
            if not raw["question"].strip():
                raise ManifestError(f"line {line_no}: empty question")
            if not raw["reference_answer"].strip():
                raise ManifestError(f"line {line_no}: empty reference_answer")

            image = raw["image"]
            image_missing = False
            if not _is_url(image):
                image_path = (path.parent / image).resolve()
                if not image_path.is_file():
                    if strict:
                        raise ManifestError(f"line {line_no}: image file not found: {image}")
                    logger.warning(
                        "record %s: image file not found (%s); record flagged skippable",
                        record_id,
                        image,
                    )
                    image_missing = True

            seen[record_id] = line_no
            records.append(
                CorpusRecord(
                    id=record_id,
                    image=image,
                    question=raw["question"],
                    reference_answer=raw["reference_answer"],
                    categories=frozenset(classify(raw["question"])),
                    image_missing=image_missing,
                )
            )

    return CorpusManifest(
        records=tuple(records),
        source_name=path.name,
        record_limit=limit,
        base_dir=path.parent,
    )


def serialize_manifest(manifest: CorpusManifest, path: str | Path) -> None:
    """Write records back as line-delimited JSON (inverse of load_manifest)."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for record in manifest.records:
            fh.write(
                json.dumps(
                    {
                        "id": record.id,
                        "image": record.image,
                        "question": record.question,
                        "reference_answer": record.reference_answer,
                    },
                    ensure_ascii=False,
                )
                + "\n"
            )


def url_cache_key(url: str) -> str:
    """Disk-cache key for a fetched image URL. Depends on the URL alone."""
    return hashlib.sha256(url.encode("utf-8")).hexdigest()


def fetch_image_bytes(
    record: CorpusRecord,
    base_dir: Path | None,
    image_cache_dir: Path | None = None,
    timeout: float = 30.0,
) -> bytes:
    """Read a record's image from disk or fetch (and cache) it from a URL."""
    if _is_url(record.image):
        if image_cache_dir is not None:
            image_cache_dir.mkdir(parents=True, exist_ok=True)
            cached = image_cache_dir / url_cache_key(record.image)
            if cached.is_file():
                return cached.read_bytes()
        try:
            reply = httpx.get(record.image, timeout=timeout, follow_redirects=True)
            reply.raise_for_status()
        except httpx.HTTPError as exc:
            raise TransportError(f"failed to fetch {record.image}: {exc}") from exc
        data = reply.content
        if image_cache_dir is not None:
            tmp = cached.with_suffix(".tmp")
            tmp.write_bytes(data)
            tmp.replace(cached)
        return data
    image_path = Path(record.image)
    if not image_path.is_absolute() and base_dir is not None:
        image_path = base_dir / image_path
    return image_path.read_bytes()
