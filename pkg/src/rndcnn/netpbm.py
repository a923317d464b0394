"""Binary NetPBM images: P5 (grayscale) and P6 (RGB), 8-bit only.

This is the engine's bit-exact decode target; the format is simple
enough that a decoded tensor is a pure function of the file bytes.
Header tokens may be separated by any whitespace and `#` comments; the
raster follows the single whitespace byte after the maxval token.
`write_pnm` exists for fixtures and round-trip tests.
"""

import numpy as np

from rndcnn.errors import DecodeError

_WS = b" \t\r\n\x0b\x0c"


def _next_token(data: bytes, pos: int) -> tuple[bytes, int]:
    n = len(data)
    while pos < n:
        if data[pos : pos + 1] in _WS:
            pos += 1
        elif data[pos : pos + 1] == b"#":
            while pos < n and data[pos : pos + 1] not in b"\r\n":
                pos += 1
        else:
            break
    if pos >= n:
        raise DecodeError("unexpected end of header", offset=n)
    start = pos
    while pos < n and data[pos : pos + 1] not in _WS and data[pos : pos + 1] != b"#":
        pos += 1
    return data[start:pos], pos


def _int_token(data: bytes, pos: int, what: str) -> tuple[int, int]:
    token, end = _next_token(data, pos)
    try:
        value = int(token)
    except ValueError:
        raise DecodeError(f"{what} is not an integer: {token!r}", offset=end - len(token)) from None
    if value <= 0:
        raise DecodeError(f"{what} must be positive, got {value}", offset=end - len(token))
    return value, end


def decode_pnm(data: bytes) -> np.ndarray:
    """Decode to uint8, shape (H, W) for P5 or (H, W, 3) for P6."""
    magic, pos = _next_token(data, 0)
    if magic not in (b"P5", b"P6"):
        raise DecodeError(f"not a binary PGM/PPM file (magic {magic!r})", offset=0)
    channels = 1 if magic == b"P5" else 3
    width, pos = _int_token(data, pos, "width")
    height, pos = _int_token(data, pos, "height")
    maxval, pos = _int_token(data, pos, "maxval")
    if maxval > 255:
        raise DecodeError(f"only 8-bit depth supported, maxval={maxval}", offset=pos)
    if pos >= len(data) or data[pos : pos + 1] not in _WS:
        raise DecodeError("missing whitespace before raster", offset=pos)
    pos += 1
    expected = width * height * channels
    raster = data[pos : pos + expected]
    if len(raster) < expected:
        raise DecodeError(
            f"raster truncated: expected {expected} bytes, found {len(raster)}",
            offset=pos + len(raster),
        )
    trailing = data[pos + expected :]
    if trailing.strip(_WS):
        raise DecodeError("trailing bytes after raster", offset=pos + expected)
    pixels = np.frombuffer(raster, dtype=np.uint8, count=expected)
    shape = (height, width) if channels == 1 else (height, width, 3)
    return pixels.reshape(shape).copy()


def read_pnm(path) -> np.ndarray:
    with open(path, "rb") as fh:
        return decode_pnm(fh.read())


def write_pnm(path, image: np.ndarray) -> None:
    image = np.asarray(image)
    if image.dtype != np.uint8:
        raise ValueError(f"write_pnm expects uint8, got {image.dtype}")
    if image.ndim == 2:
        magic = b"P5"
    elif image.ndim == 3 and image.shape[2] == 3:
        magic = b"P6"
    else:
        raise ValueError(f"cannot encode shape {image.shape}")
    h, w = image.shape[:2]
    with open(path, "wb") as fh:
        fh.write(magic + b"\n%d %d\n255\n" % (w, h))
        fh.write(np.ascontiguousarray(image).tobytes())
