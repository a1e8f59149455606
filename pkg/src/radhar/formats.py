"""On-disk formats: RDT1 tensor container, PGM/PPM images, JSON sidecars, CSV tables.

RDT1 layout (all integers little-endian)::

    offset  size        field
    0       4           magic b"RDT1"
    4       2 (u16)     version (= 1)
    6       1 (u8)      dtype: 0 = f32, 1 = c64 (re, im f32 pairs)
    7       1 (u8)      ndim, 1..4
    8       4*ndim      dims (u32 each)
    ...     prod*size   payload, row-major (last axis fastest)
    end-4   4 (u32)     CRC-32 (IEEE) of the payload

Every write goes to a temporary file in the destination directory and is
moved into place with ``os.replace``.
"""

from __future__ import annotations

import csv
import io
import json
import os
import struct
import tempfile
import zlib
from pathlib import Path

import numpy as np

from .errors import InvalidArgumentError, RadharError

MAGIC = b"RDT1"
VERSION = 1
DTYPES = {0: np.dtype("<f4"), 1: np.dtype("<c8")}
SIDECAR_SCHEMA_VERSION = 1


class FormatError(RadharError):
    """Base class for on-disk format problems."""


class CorruptionError(FormatError):
    """Checksum mismatch or internally inconsistent header."""


class TruncationError(FormatError):
    """File ends before the declared payload and checksum."""


class UnsupportedVersionError(FormatError):
    """Container version this reader does not understand."""


def atomic_write_bytes(path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
            fh.flush()
            os.fsync(fh.fileno())
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def encode_tensor(tensor) -> bytes:
    a = np.asarray(tensor)
    if a.ndim < 1 or a.ndim > 4:
        raise InvalidArgumentError(f"tensor must have 1..4 dimensions, got {a.ndim}")
    if any(d < 1 or d > 0xFFFFFFFF for d in a.shape):
        raise InvalidArgumentError(f"every dimension must be in [1, 2**32 - 1], got {a.shape}")
    code = 1 if np.iscomplexobj(a) else 0
    payload = np.ascontiguousarray(a, dtype=DTYPES[code]).tobytes()
    header = MAGIC + struct.pack("<HBB", VERSION, code, a.ndim) + struct.pack(f"<{a.ndim}I", *a.shape)
    return header + payload + struct.pack("<I", zlib.crc32(payload) & 0xFFFFFFFF)


def decode_tensor(blob: bytes) -> np.ndarray:
    if len(blob) < 8:
        raise TruncationError("file shorter than the fixed header")
    if blob[:4] != MAGIC:
        raise CorruptionError(f"bad magic {blob[:4]!r}")
    version, code, ndim = struct.unpack_from("<HBB", blob, 4)
    if version != VERSION:
        raise UnsupportedVersionError(f"container version {version} (supported: {VERSION})")
    if code not in DTYPES:
        raise CorruptionError(f"unknown dtype code {code}")
    if not 1 <= ndim <= 4:
        raise CorruptionError(f"invalid ndim {ndim}")
    head = 8 + 4 * ndim
    if len(blob) < head:
        raise TruncationError("file ends inside the dims table")
    dims = struct.unpack_from(f"<{ndim}I", blob, 8)
    if any(d == 0 for d in dims):
        raise CorruptionError(f"zero-length dimension in {dims}")
    nbytes = int(np.prod(dims, dtype=np.int64)) * DTYPES[code].itemsize
    expected = head + nbytes + 4
    if len(blob) < expected:
        raise TruncationError(f"expected {expected} bytes, found {len(blob)}")
    if len(blob) > expected:
        raise CorruptionError(f"{len(blob) - expected} trailing bytes after checksum")
    payload = blob[head : head + nbytes]
    (crc,) = struct.unpack_from("<I", blob, head + nbytes)
    if zlib.crc32(payload) & 0xFFFFFFFF != crc:
        raise CorruptionError("payload CRC-32 mismatch")
    return np.frombuffer(payload, dtype=DTYPES[code]).reshape(dims).copy()


def write_tensor(path, tensor) -> None:
    atomic_write_bytes(path, encode_tensor(tensor))


def read_tensor(path) -> np.ndarray:
    return decode_tensor(Path(path).read_bytes())


def encode_pgm(pixels) -> bytes:
    p = np.asarray(getattr(pixels, "pixels", pixels))
    if p.ndim != 2 or p.size == 0:
        raise InvalidArgumentError("PGM needs a non-empty 2-D image")
    if np.any(p < 0) or np.any(p > 255):
        raise InvalidArgumentError("PGM pixels must lie in [0, 255]")
    rows, cols = p.shape
    return f"P5\n{cols} {rows}\n255\n".encode("ascii") + p.astype(np.uint8).tobytes()


def write_pgm(path, img) -> None:
    atomic_write_bytes(path, encode_pgm(img))


def _pnm_tokens(blob: bytes, count: int):
    """Whitespace-separated header tokens (comments skipped) and the payload offset."""
    tokens, i = [], 0
    while len(tokens) < count:
        while i < len(blob) and blob[i : i + 1].isspace():
            i += 1
        if blob[i : i + 1] == b"#":
            while i < len(blob) and blob[i : i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        j = i
        while j < len(blob) and not blob[j : j + 1].isspace():
            j += 1
        if j == i:
            raise FormatError("truncated PNM header")
        tokens.append(blob[i:j].decode("ascii"))
        i = j
    return tokens, i + 1  # single whitespace byte after maxval


def read_pgm(path) -> np.ndarray:
    blob = Path(path).read_bytes()
    (magic, w, h, maxval), off = _pnm_tokens(blob, 4)
    if magic != "P5" or maxval != "255":
        raise FormatError("only binary 8-bit PGM (P5, maxval 255) is supported")
    w, h = int(w), int(h)
    data = blob[off : off + w * h]
    if len(data) != w * h:
        raise TruncationError("PGM payload shorter than width*height")
    return np.frombuffer(data, dtype=np.uint8).reshape(h, w).copy()


def write_ppm(path, rgb) -> None:
    a = np.asarray(rgb)
    if a.ndim != 3 or a.shape[2] != 3:
        raise InvalidArgumentError("PPM needs a (rows, cols, 3) array")
    rows, cols, _ = a.shape
    atomic_write_bytes(path, f"P6\n{cols} {rows}\n255\n".encode("ascii") + np.clip(a, 0, 255).astype(np.uint8).tobytes())


def write_sidecar(path, producer: str, parameters: dict, seeds=None, axes=None, timestamps: dict | None = None) -> dict:
    """JSON metadata next to an artifact. Timestamps are opt-in so outputs stay reproducible."""
    doc = {
        "schema_version": SIDECAR_SCHEMA_VERSION,
        "producer": producer,
        "parameters": parameters,
        "rng_seeds": seeds if seeds is not None else [],
        "axes": axes if axes is not None else {},
    }
    if timestamps:
        doc["timestamps"] = timestamps
    atomic_write_bytes(path, (json.dumps(doc, indent=2, sort_keys=True, default=_json_default) + "\n").encode())
    return doc


def read_sidecar(path) -> dict:
    doc = json.loads(Path(path).read_text())
    if doc.get("schema_version") != SIDECAR_SCHEMA_VERSION:
        raise UnsupportedVersionError(f"sidecar schema version {doc.get('schema_version')!r}")
    return doc


def _json_default(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, (set, frozenset)):
        return sorted(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def write_csv(path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    atomic_write_bytes(path, buf.getvalue().encode())
