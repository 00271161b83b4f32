import json
from pathlib import Path

import numpy as np
import pytest

from groundcheck.imaging.buffer import ImageBuffer, encode_png


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def random_image(rng, height, width):
    return ImageBuffer(rng.integers(0, 256, size=(height, width, 3), dtype=np.uint8))


def constant_image(value, height=8, width=8):
    return ImageBuffer(np.full((height, width, 3), value, dtype=np.uint8))


@pytest.fixture
def tiny_corpus(tmp_path):
    """Five records with on-disk PNG images and a JSONL manifest."""
    rng = np.random.default_rng(7)
    image_dir = tmp_path / "images"
    image_dir.mkdir()
    rows = []
    questions = [
        ("q1", "What color is the kite?", "The kite is red."),
        ("q2", "How many boats are on the lake?", "There are two boats."),
        ("q3", "Which animal sits on the bench?", "A small dog sits on the bench."),
        ("q4", "Describe the weather in the scene.", "It is a cloudy day."),
        ("q5", "What is painted on the wall?", "A mural of a whale is painted there."),
    ]
    for record_id, question, answer in questions:
        img = random_image(rng, 12, 10)
        (image_dir / f"{record_id}.png").write_bytes(encode_png(img))
        rows.append(
            {
                "id": record_id,
                "image": f"images/{record_id}.png",
                "question": question,
                "reference_answer": answer,
            }
        )
    manifest = tmp_path / "manifest.jsonl"
    manifest.write_text(
        "".join(json.dumps(row) + "\n" for row in rows), encoding="utf-8"
    )
    return manifest


def write_manifest(path: Path, rows) -> Path:
    path.write_text("".join(json.dumps(row) + "\n" for row in rows), encoding="utf-8")
    return path
