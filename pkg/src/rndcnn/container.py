"""Binary container framing shared by checkpoints and dataset caches.

Layout:

    bytes 0-3    magic (4 ASCII bytes, per file kind)
    bytes 4-7    format version, uint32 little-endian
    bytes 8-11   header length L, uint32 little-endian
    bytes 12..   UTF-8 JSON header (L bytes)
    then         raw little-endian tensor payloads, back to back

The header carries a "tensors" table: name, shape, dtype ("f4" or "i4"),
offset (relative to the payload start) and nbytes for every tensor.
Loading validates magic, version, header bounds, the tensor table against
the actual file size, and rejects the whole file on any mismatch --
there is no partial load.
"""

import json

import numpy as np

from rndcnn.errors import FormatError

VERSION = 1
_DTYPES = {"f4": np.dtype("<f4"), "i4": np.dtype("<i4")}


def write_container(path, magic: bytes, header: dict, tensors: list[tuple[str, np.ndarray]]) -> None:
    if len(magic) != 4:
        raise ValueError("magic must be 4 bytes")
    table = []
    offset = 0
    blobs = []
    for name, arr in tensors:
        code = {"float32": "f4", "int32": "i4"}.get(arr.dtype.name)
        if code is None:
            raise ValueError(f"tensor {name!r} has unsupported dtype {arr.dtype}")
        blob = np.ascontiguousarray(arr).astype(_DTYPES[code], copy=False).tobytes()
        table.append(
            {"name": name, "shape": list(arr.shape), "dtype": code, "offset": offset, "nbytes": len(blob)}
        )
        blobs.append(blob)
        offset += len(blob)
    full = dict(header)
    full["tensors"] = table
    head = json.dumps(full, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(magic)
        fh.write(np.uint32(VERSION).tobytes())
        fh.write(np.uint32(len(head)).tobytes())
        fh.write(head)
        for blob in blobs:
            fh.write(blob)


def read_container(path, magic: bytes) -> tuple[dict, dict[str, np.ndarray]]:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 12:
        raise FormatError(f"file truncated at {len(raw)} bytes", offset=len(raw))
    if raw[:4] != magic:
        raise FormatError(f"bad magic {raw[:4]!r}, expected {magic!r}", offset=0)
    version = int(np.frombuffer(raw[4:8], dtype="<u4")[0])
    if version != VERSION:
        raise FormatError(f"unsupported format version {version}", offset=4)
    head_len = int(np.frombuffer(raw[8:12], dtype="<u4")[0])
    if 12 + head_len > len(raw):
        raise FormatError(f"header length {head_len} exceeds file size", offset=8)
    try:
        header = json.loads(raw[12 : 12 + head_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"header is not valid JSON: {exc}", offset=12) from None
    payload = raw[12 + head_len :]
    tensors: dict[str, np.ndarray] = {}
    for entry in header.get("tensors", []):
        dtype = _DTYPES.get(entry.get("dtype"))
        if dtype is None:
            raise FormatError(f"tensor {entry.get('name')!r} has unknown dtype {entry.get('dtype')!r}")
        start, nbytes = int(entry["offset"]), int(entry["nbytes"])
        shape = tuple(int(d) for d in entry["shape"])
        if int(np.prod(shape)) * dtype.itemsize != nbytes:
            raise FormatError(f"tensor {entry['name']!r}: shape {shape} inconsistent with {nbytes} bytes")
        if start < 0 or start + nbytes > len(payload):
            raise FormatError(
                f"tensor {entry['name']!r} extends past end of file", offset=12 + head_len + start
            )
        arr = np.frombuffer(payload, dtype=dtype, count=int(np.prod(shape)), offset=start)
        tensors[entry["name"]] = arr.reshape(shape).copy()
    return header, tensors
