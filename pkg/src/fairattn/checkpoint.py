"""Model checkpoints: one JSON text file holding the encoder state, the
training config, and every parameter array with its shape.

JSON serializes Python floats with their shortest round-tripping repr, so
save/load reproduces parameters bit-exactly.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .encoding import Encoder
from .errors import DataError
from .model import AttentionClassifier, TrainConfig

FORMAT = "fairattn.checkpoint"
VERSION = 1


@dataclass
class Checkpoint:
    model: AttentionClassifier
    encoder: Encoder
    config: TrainConfig
    schema_hash: str
    provenance: dict | None = None


def _array_entry(a: np.ndarray) -> dict:
    return {"shape": list(a.shape), "data": a.reshape(-1).tolist()}


def _array_from(entry: dict) -> np.ndarray:
    return np.asarray(entry["data"], dtype=np.float64).reshape(entry["shape"])


def _encoder_hash(encoder: Encoder) -> str:
    blob = json.dumps(encoder.state_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def save_checkpoint(path, model: AttentionClassifier, encoder: Encoder,
                    config: TrainConfig, provenance: dict | None = None) -> None:
    doc = {
        "format": FORMAT,
        "version": VERSION,
        "schema_hash": _encoder_hash(encoder),
        "encoder": encoder.state_dict(),
        "config": config.to_dict(),
        "params": {
            "embed": _array_entry(model.embed),
            "w": _array_entry(model.w),
            "W1": _array_entry(model.W1),
            "b1": _array_entry(model.b1),
            "W2": _array_entry(model.W2),
            "b2": float(model.b2),
        },
        "provenance": provenance,
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def load_checkpoint(path) -> Checkpoint:
    path = Path(path)
    if not path.exists():
        raise DataError(f"checkpoint not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise DataError(f"checkpoint {path} is not valid JSON: {e}") from e
    if doc.get("format") != FORMAT:
        raise DataError(f"{path}: not a {FORMAT} file")
    if doc.get("version") != VERSION:
        raise DataError(f"{path}: unsupported checkpoint version {doc.get('version')}")
    encoder = Encoder.from_state(doc["encoder"])
    if _encoder_hash(encoder) != doc["schema_hash"]:
        raise DataError(f"{path}: schema hash mismatch, file corrupted or edited")
    p = doc["params"]
    model = AttentionClassifier(
        embed=_array_from(p["embed"]),
        w=_array_from(p["w"]),
        W1=_array_from(p["W1"]),
        b1=_array_from(p["b1"]),
        W2=_array_from(p["W2"]),
        b2=float(p["b2"]),
    )
    if model.total_entities != encoder.schema.total_entities:
        raise DataError(f"{path}: embedding rows do not match the stored schema")
    return Checkpoint(
        model=model,
        encoder=encoder,
        config=TrainConfig.from_dict(doc["config"]),
        schema_hash=doc["schema_hash"],
        provenance=doc.get("provenance"),
    )
