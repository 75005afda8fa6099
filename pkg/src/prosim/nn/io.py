"""Versioned binary weight container.

Layout: magic ``PSNN`` | u32 version | u32 header length | header JSON
(UTF-8, carries the network spec and optional metadata) | little-endian
float64 parameter block.
"""

import json
import struct

import numpy as np

from .core import NetworkSpec, TrainedModel, parameter_count

MAGIC = b"PSNN"
VERSION = 1


def save_model(model, path, meta=None):
    header = {"spec": model.spec.to_json(), "meta": meta or {}}
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, len(blob)))
        fh.write(blob)
        fh.write(model.params.astype("<f8").tobytes())


def load_model(path):
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise ValueError(f"not a weight container: bad magic {magic!r}")
        version, header_len = struct.unpack("<II", fh.read(8))
        if version != VERSION:
            raise ValueError(f"unsupported container version {version}")
        header = json.loads(fh.read(header_len).decode("utf-8"))
        spec = NetworkSpec.from_json(header["spec"])
        raw = fh.read()
    params = np.frombuffer(raw, dtype="<f8").astype(np.float64)
    expected = parameter_count(spec)
    if params.size != expected:
        raise ValueError(
            f"parameter block has {params.size} values, spec needs {expected}")
    return TrainedModel(spec, params), header["meta"]
