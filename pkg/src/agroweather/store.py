"""Single-file model bundles with a checksum.

Byte layout (all integers little-endian)::

    offset  size  field
    0       4     magic b"AGWB"
    4       4     u32 format version (1)
    8       4     u32 header length H
    12      8     u64 tensor data length N
    20      H     UTF-8 JSON header
    20+H    N     tensors, little-endian float64, C order, in header order
    20+H+N  32    SHA-256 of bytes [0, 20+H+N)

The header holds the model topology, feature/target names, station id, the
training config and, for every tensor, its name, shape and byte offset
within the data block. Normalization stats are stored as the tensors
``stats.mean`` and ``stats.std`` with their feature names in the header.
"""

import hashlib
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ChecksumMismatch, CorruptFile, UnsupportedVersion
from .ingest import station_key
from .nn.model import BiLstmModel, ModelConfig, init_params, param_count
from .preprocess import NormalizationStats

MAGIC = b"AGWB"
FORMAT_VERSION = 1
_PREFIX = struct.Struct("<4sIIQ")
_DIGEST = 32
_F64 = np.dtype("<f8")


@dataclass
class ModelBundle:
    model: BiLstmModel
    station: str = ""
    train_config: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Receipt:
    path: str
    size: int
    sha256: str


def _header_and_data(bundle):
    model = bundle.model
    tensors = [(name, np.asarray(p, dtype=np.float64)) for name, p in model.params.items()]
    stats = model.stats
    if stats is not None:
        tensors += [("stats.mean", stats.mean), ("stats.std", stats.std)]
    entries, chunks, offset = [], [], 0
    for name, arr in tensors:
        raw = np.ascontiguousarray(arr, dtype=_F64).tobytes()
        entries.append({"name": name, "shape": list(arr.shape), "offset": offset})
        chunks.append(raw)
        offset += len(raw)
    header = {
        "topology": model.config.to_dict(),
        "feature_names": list(model.feature_names),
        "target_names": list(model.target_names),
        "stats_features": list(stats.feature_names) if stats is not None else None,
        "station": bundle.station,
        "train_config": bundle.train_config,
        "extra": bundle.extra,
        "tensors": entries,
    }
    return json.dumps(header, sort_keys=True).encode("utf-8"), b"".join(chunks)


def dumps(bundle):
    header, data = _header_and_data(bundle)
    body = _PREFIX.pack(MAGIC, FORMAT_VERSION, len(header), len(data)) + header + data
    return body + hashlib.sha256(body).digest()


def save(bundle, path):
    blob = dumps(bundle)
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(blob)
    tmp.replace(path)
    return Receipt(str(path), len(blob), blob[-_DIGEST:].hex())


def _split(blob):
    if len(blob) < _PREFIX.size + _DIGEST:
        raise CorruptFile("file too short to be a model bundle")
    magic, version, hlen, dlen = _PREFIX.unpack_from(blob)
    if len(blob) != _PREFIX.size + hlen + dlen + _DIGEST:
        raise CorruptFile("file length does not match its declared sizes (truncated?)")
    body, digest = blob[:-_DIGEST], blob[-_DIGEST:]
    if hashlib.sha256(body).digest() != digest:
        raise ChecksumMismatch("SHA-256 checksum mismatch")
    if magic != MAGIC:
        raise CorruptFile("not a model bundle (bad magic)")
    if version != FORMAT_VERSION:
        raise UnsupportedVersion(f"bundle format version {version} is not supported")
    try:
        header = json.loads(body[_PREFIX.size:_PREFIX.size + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CorruptFile(f"unreadable header: {exc}") from None
    return header, body[_PREFIX.size + hlen:], digest


def loads(blob):
    header, data, _ = _split(blob)
    tensors = {}
    for e in header["tensors"]:
        n = int(np.prod(e["shape"], dtype=np.int64)) * _F64.itemsize
        lo = e["offset"]
        if lo < 0 or lo + n > len(data):
            raise CorruptFile(f"tensor {e['name']} lies outside the data block")
        tensors[e["name"]] = np.frombuffer(data, _F64, n // _F64.itemsize, lo).reshape(
            e["shape"]).astype(np.float64)
    stats = None
    if header.get("stats_features") is not None:
        stats = NormalizationStats(tuple(header["stats_features"]),
                                   tensors.pop("stats.mean"), tensors.pop("stats.std"))
    config = ModelConfig.from_dict(header["topology"])
    expected = init_params(config)
    if set(tensors) != set(expected):
        raise CorruptFile("tensor set does not match the declared topology")
    for name, arr in tensors.items():
        if arr.shape != expected[name].shape:
            raise CorruptFile(f"tensor {name} has the wrong shape")
    model = BiLstmModel(config, tensors, header["feature_names"], header["target_names"], stats)
    return ModelBundle(model, header.get("station", ""), header.get("train_config", {}),
                       header.get("extra", {}))


def load(path):
    return loads(Path(path).read_bytes())


def inspect(path):
    """Header summary plus checksum, without building the model."""
    blob = Path(path).read_bytes()
    header, _, digest = _split(blob)
    config = ModelConfig.from_dict(header["topology"])
    return {
        "format_version": FORMAT_VERSION,
        "station": header.get("station", ""),
        "topology": header["topology"],
        "parameters": param_count(config),
        "feature_names": header["feature_names"],
        "target_names": header["target_names"],
        "tensors": {e["name"]: e["shape"] for e in header["tensors"]},
        "train_config": header.get("train_config", {}),
        "size_bytes": len(blob),
        "sha256": digest.hex(),
    }


def bundle_path(model_dir, station):
    """One bundle per station, named by its id."""
    return Path(model_dir) / f"{station_key(station).replace(' ', '_')}.agwb"
