"""Binary checkpoint container with an FNV-1a content checksum.

Layout::

    b"MFCK" | version u32 LE | header length u64 LE | header JSON (utf-8)
    | payload (little-endian float64 tensors, manifest order)
    | checksum u64 LE

The header holds the config snapshot (including vocabularies) and the
tensor manifest; the checksum is FNV-1a over header bytes plus payload,
so any flipped byte is caught on load.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..rng import fnv1a64

MAGIC = b"MFCK"
CHECKPOINT_VERSION = 1


class CheckpointError(RuntimeError):
    """Corrupt, truncated, or incompatible checkpoint file."""


@dataclass
class Checkpoint:
    config: dict
    tensors: dict[str, np.ndarray]
    version: int = CHECKPOINT_VERSION
    extra: dict = field(default_factory=dict)


def save_checkpoint(checkpoint: Checkpoint, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    manifest = [
        {"name": name, "shape": list(arr.shape), "dtype": "float64"}
        for name, arr in checkpoint.tensors.items()
    ]
    header = {
        "config": checkpoint.config,
        "extra": checkpoint.extra,
        "manifest": manifest,
    }
    header_bytes = json.dumps(header, sort_keys=True).encode("utf-8")
    payload = b"".join(
        np.ascontiguousarray(arr, dtype="<f8").tobytes() for arr in checkpoint.tensors.values()
    )
    checksum = fnv1a64(header_bytes + payload)
    with path.open("wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", checkpoint.version))
        fh.write(struct.pack("<Q", len(header_bytes)))
        fh.write(header_bytes)
        fh.write(payload)
        fh.write(struct.pack("<Q", checksum))


def load_checkpoint(path: str | Path) -> Checkpoint:
    raw = Path(path).read_bytes()
    if len(raw) < len(MAGIC) + 4 + 8 + 8 or raw[: len(MAGIC)] != MAGIC:
        raise CheckpointError(f"{path}: not a checkpoint file")
    offset = len(MAGIC)
    (version,) = struct.unpack_from("<I", raw, offset)
    offset += 4
    if version != CHECKPOINT_VERSION:
        raise CheckpointError(
            f"{path}: format version {version} unsupported (expected {CHECKPOINT_VERSION})"
        )
    (header_len,) = struct.unpack_from("<Q", raw, offset)
    offset += 8
    header_end = offset + header_len
    if header_end + 8 > len(raw):
        raise CheckpointError(f"{path}: truncated header")
    header_bytes = raw[offset:header_end]
    header = json.loads(header_bytes.decode("utf-8"))
    manifest = header["manifest"]
    payload_len = sum(int(np.prod(entry["shape"])) * 8 for entry in manifest)
    payload_end = header_end + payload_len
    if payload_end + 8 != len(raw):
        raise CheckpointError(f"{path}: truncated payload")
    payload = raw[header_end:payload_end]
    (stored,) = struct.unpack_from("<Q", raw, payload_end)
    actual = fnv1a64(header_bytes + payload)
    if stored != actual:
        raise CheckpointError(f"{path}: checksum mismatch ({stored:#x} != {actual:#x})")

    tensors: dict[str, np.ndarray] = {}
    cursor = 0
    for entry in manifest:
        count = int(np.prod(entry["shape"]))
        arr = np.frombuffer(payload, dtype="<f8", count=count, offset=cursor)
        tensors[entry["name"]] = arr.reshape([int(s) for s in entry["shape"]]).astype(np.float64)
        cursor += count * 8
    return Checkpoint(config=header["config"], tensors=tensors, version=version, extra=header.get("extra", {}))
