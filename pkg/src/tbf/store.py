"""Bit-exact persistence: binary tensor container plus JSON manifest.

Container layout (all little-endian):
    magic   4 bytes  b"TBF1"
    version u8       1
    dtype   u8       0=f32  1=f64  2=complex64  3=complex128
    ndim    u8       >= 1
    dims    ndim * u64
    payload row-major values (complex stored interleaved re/im)

Round trips are byte-identical; endianness is fixed regardless of host.
"""

import json
import struct
from pathlib import Path

import numpy as np

from .errors import (
    BadMagicError,
    ManifestError,
    ParameterError,
    TruncatedPayloadError,
    UnsupportedDtypeError,
    UnsupportedVersionError,
)

MAGIC = b"TBF1"
VERSION = 1

_DTYPES = {
    0: np.dtype("<f4"),
    1: np.dtype("<f8"),
    2: np.dtype("<c8"),
    3: np.dtype("<c16"),
}
_CODES = {v: k for k, v in _DTYPES.items()}


def _dtype_code(dtype: np.dtype) -> int:
    try:
        return _CODES[dtype.newbyteorder("<")]
    except KeyError:
        raise UnsupportedDtypeError(f"dtype {dtype} has no container code") from None


def write_tensor(path, tensor: np.ndarray) -> None:
    """Serialize an array to the container format (ndim >= 1)."""
    arr = np.asarray(tensor)
    if arr.ndim < 1:
        raise ParameterError("0-d tensors are not representable; ndim must be >= 1")
    arr = np.ascontiguousarray(arr)
    if arr.ndim > 255:
        raise ParameterError("ndim must fit in one byte")
    code = _dtype_code(arr.dtype)
    arr = arr.astype(_DTYPES[code], copy=False)
    header = MAGIC + struct.pack("<BBB", VERSION, code, arr.ndim)
    header += struct.pack(f"<{arr.ndim}Q", *arr.shape)
    Path(path).write_bytes(header + arr.tobytes())


def read_tensor(path) -> np.ndarray:
    """Read a container file back into an array, byte-for-byte faithful."""
    blob = Path(path).read_bytes()
    return tensor_from_bytes(blob)


def tensor_from_bytes(blob: bytes) -> np.ndarray:
    if blob[:4] != MAGIC:
        raise BadMagicError(f"expected magic {MAGIC!r}, got {blob[:4]!r}")
    if len(blob) < 7:
        raise TruncatedPayloadError("header truncated")
    version, code, ndim = struct.unpack_from("<BBB", blob, 4)
    if version != VERSION:
        raise UnsupportedVersionError(f"unsupported container version {version}")
    if code not in _DTYPES:
        raise UnsupportedDtypeError(f"unknown dtype code {code}")
    if ndim < 1:
        raise TruncatedPayloadError("ndim must be >= 1")
    offset = 7
    if len(blob) < offset + 8 * ndim:
        raise TruncatedPayloadError("dimension table truncated")
    dims = struct.unpack_from(f"<{ndim}Q", blob, offset)
    offset += 8 * ndim
    dtype = _DTYPES[code]
    count = int(np.prod(dims, dtype=np.int64))
    expected = count * dtype.itemsize
    payload = blob[offset:]
    if len(payload) != expected:
        raise TruncatedPayloadError(
            f"payload holds {len(payload)} bytes, header declares {expected}")
    return np.frombuffer(payload, dtype=dtype).reshape(dims).copy()


MANIFEST_SCHEMA_VERSION = 1

_RECORD_REQUIRED = {
    "id": str,
    "position_m": list,
    "direction_class": int,
    "heading_rad": float,
    "speed_mps": float,
    "blobs": dict,
}
_BLOB_KEYS = ("tbf", "x_ad", "x_ma", "x_do")


def _require(cond: bool, path: str, message: str) -> None:
    if not cond:
        raise ManifestError(f"{path}: {message}")


def validate_manifest(doc: dict, base_dir=None, check_blobs: bool = True) -> None:
    """Schema-check a manifest document; messages carry the field path."""
    _require(isinstance(doc, dict), "$", "manifest must be a JSON object")
    _require(doc.get("schema_version") == MANIFEST_SCHEMA_VERSION,
             "$.schema_version", f"must be {MANIFEST_SCHEMA_VERSION}")
    for key in ("geometry", "ofdm"):
        _require(isinstance(doc.get(key), dict), f"$.{key}", "must be an object")
    _require(isinstance(doc.get("records"), list), "$.records", "must be an array")
    geom = doc["geometry"]
    ofdm = doc["ofdm"]
    a = int(geom.get("m_rows", 0)) * int(geom.get("m_cols", 0))
    shapes = {
        "tbf": (a, int(ofdm.get("cp_length", 0)), int(ofdm.get("slots_per_frame", 0))),
        "x_ad": (a, int(ofdm.get("cp_length", 0))),
        "x_ma": (a, int(ofdm.get("cp_length", 0))),
        "x_do": (int(ofdm.get("slots_per_frame", 0)),),
    }
    for i, rec in enumerate(doc["records"]):
        where = f"$.records[{i}]"
        _require(isinstance(rec, dict), where, "must be an object")
        for key, typ in _RECORD_REQUIRED.items():
            _require(key in rec, f"{where}.{key}", "missing required field")
            if typ is float:
                _require(isinstance(rec[key], (int, float)), f"{where}.{key}",
                         "must be a number")
            else:
                _require(isinstance(rec[key], typ), f"{where}.{key}",
                         f"must be {typ.__name__}")
        _require(len(rec["position_m"]) == 3, f"{where}.position_m",
                 "must hold [x, y, z]")
        _require(0 <= rec["direction_class"] < 16, f"{where}.direction_class",
                 "must lie in 0..15")
        for key in _BLOB_KEYS:
            _require(key in rec["blobs"], f"{where}.blobs.{key}", "missing blob path")
        if check_blobs and base_dir is not None:
            for key in _BLOB_KEYS:
                blob_path = Path(base_dir) / rec["blobs"][key]
                _require(blob_path.exists(), f"{where}.blobs.{key}",
                         f"referenced blob {blob_path} does not exist")
                arr = read_tensor(blob_path)
                _require(arr.shape == shapes[key], f"{where}.blobs.{key}",
                         f"blob shape {arr.shape} != expected {shapes[key]}")


def write_manifest(path, doc: dict) -> None:
    """Write a manifest deterministically (sorted keys, fixed layout)."""
    validate_manifest(doc, base_dir=None, check_blobs=False)
    text = json.dumps(doc, sort_keys=True, indent=2)
    Path(path).write_text(text + "\n")


def read_manifest(path, check_blobs: bool = True) -> dict:
    """Read and validate a manifest; unknown fields are preserved."""
    p = Path(path)
    try:
        doc = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise ManifestError(f"$: not valid JSON ({exc})") from exc
    validate_manifest(doc, base_dir=p.parent, check_blobs=check_blobs)
    return doc
