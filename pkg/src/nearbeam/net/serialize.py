"""Versioned binary model files with an integrity checksum.

Layout (little-endian): magic 'NBNM', u32 version, u32 header length, the
JSON architecture header (layer specs, input length, head size, array
manifest), the raw float64 payload of every parameter and persistent state
array in manifest order, then the SHA-256 digest of everything before it.
"""

from __future__ import annotations

import hashlib
import json
import struct

import numpy as np

from .model import NetworkModel, model_from_specs

_MAGIC = b"NBNM"
_FORMAT_VERSION = 1


class NetModelError(Exception):
    """Raised for corrupt, truncated, or version-mismatched model files."""


def _array_manifest(model: NetworkModel):
    """All persistent arrays in a deterministic order: params then state, per layer."""
    for idx, layer in enumerate(model.layers):
        for name, value, _ in layer.parameters():
            yield f"layer{idx}.{name}", value
        for name, value in layer.state_arrays():
            yield f"layer{idx}.{name}", value


def save_model(path, model: NetworkModel) -> None:
    entries = list(_array_manifest(model))
    header = {
        "input_length": model.input_length,
        "head_size": model.head_size,
        "layers": model.specs(),
        "arrays": [{"name": name, "shape": list(value.shape)} for name, value in entries],
    }
    header_bytes = json.dumps(header, sort_keys=True).encode()
    blob = bytearray()
    blob += _MAGIC
    blob += struct.pack("<II", _FORMAT_VERSION, len(header_bytes))
    blob += header_bytes
    for _, value in entries:
        blob += np.ascontiguousarray(value, dtype="<f8").tobytes()
    blob += hashlib.sha256(bytes(blob)).digest()
    with open(path, "wb") as f:
        f.write(bytes(blob))


def load_model(path) -> NetworkModel:
    with open(path, "rb") as f:
        blob = f.read()
    if len(blob) < 4 + 8 + 32 or blob[:4] != _MAGIC:
        raise NetModelError("not a model file (bad magic or truncated)")
    digest = blob[-32:]
    if hashlib.sha256(blob[:-32]).digest() != digest:
        raise NetModelError("model file checksum mismatch (corrupt or truncated)")
    version, header_len = struct.unpack_from("<II", blob, 4)
    if version != _FORMAT_VERSION:
        raise NetModelError(f"unsupported model format version {version}")
    offset = 12
    try:
        header = json.loads(blob[offset:offset + header_len])
    except json.JSONDecodeError as exc:
        raise NetModelError("unreadable model header") from exc
    offset += header_len
    model = model_from_specs(header["layers"], header["input_length"], header["head_size"])
    slots = dict(_array_manifest(model))
    for entry in header["arrays"]:
        name, shape = entry["name"], tuple(entry["shape"])
        if name not in slots:
            raise NetModelError(f"model file carries unknown array {name!r}")
        count = int(np.prod(shape)) if shape else 1
        data = np.frombuffer(blob, dtype="<f8", count=count, offset=offset)
        offset += count * 8
        if slots[name].shape != shape:
            raise NetModelError(f"shape mismatch for {name!r}")
        slots[name][...] = data.reshape(shape)
    if offset != len(blob) - 32:
        raise NetModelError("model file has trailing or missing payload bytes")
    return model
