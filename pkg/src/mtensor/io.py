"""Binary tensor, transform and image files.

Tensor files (``MTEN1``) and transform files (``MMAT1``) share one layout::

    <magic>\\n<m> <n> <p> <0|1>\\n<payload>

The last header field is 1 for complex data. The payload is little-endian
float64, slice-major, row-major within each slice, with complex entries
stored as interleaved (re, im) pairs. A transform file has ``m = n = p``
and a single slice.

Images are binary PPM (P6) or PGM (P5) with maxval 255.
"""
from __future__ import annotations

import os

import numpy as np

from .core import Tensor3, Transform

TENSOR_MAGIC = b"MTEN1"
MATRIX_MAGIC = b"MMAT1"
_LE = np.dtype("<f8")


class FormatError(ValueError):
    """A file does not follow the expected binary format."""


def _read_header(buf, magic, path):
    lines = buf.split(b"\n", 2)
    if len(lines) < 3 or lines[0] != magic:
        raise FormatError(f"{path}: expected {magic.decode()} header")
    fields = lines[1].split()
    try:
        m, n, p, flag = (int(f) for f in fields)
    except ValueError:
        raise FormatError(f"{path}: malformed dimension line {lines[1]!r}") from None
    if min(m, n, p) < 1 or flag not in (0, 1):
        raise FormatError(f"{path}: invalid header values {m} {n} {p} {flag}")
    return m, n, p, bool(flag), lines[2]


def _decode(payload, count, is_complex, path):
    width = 2 * count if is_complex else count
    if len(payload) != width * 8:
        raise FormatError(f"{path}: expected {width * 8} payload bytes, found {len(payload)}")
    raw = np.frombuffer(payload, dtype=_LE).astype(np.float64)
    if is_complex:
        return raw[0::2] + 1j * raw[1::2]
    return raw


def _encode(values, magic, dims):
    values = np.asarray(values)
    is_complex = bool(np.any(values.imag != 0))
    header = magic + b"\n" + " ".join(str(d) for d in dims).encode() + f" {int(is_complex)}\n".encode()
    flat = values.ravel()
    if is_complex:
        body = np.empty(2 * flat.size, dtype=_LE)
        body[0::2] = flat.real
        body[1::2] = flat.imag
    else:
        body = flat.real.astype(_LE)
    return header + body.tobytes()


def _read_bytes(path):
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise FormatError(f"{path}: {exc.strerror}") from None


def read_tensor(path):
    m, n, p, is_complex, payload = _read_header(_read_bytes(path), TENSOR_MAGIC, path)
    data = _decode(payload, m * n * p, is_complex, path)
    return Tensor3(data.reshape(p, m, n))


def write_tensor(path, A):
    with open(path, "wb") as fh:
        fh.write(_encode(A.data, TENSOR_MAGIC, (A.m, A.n, A.p)))


def read_transform(path):
    m, n, p, is_complex, payload = _read_header(_read_bytes(path), MATRIX_MAGIC, path)
    if not m == n == p:
        raise FormatError(f"{path}: transform header needs m = n = p, got {m} {n} {p}")
    data = _decode(payload, p * p, is_complex, path)
    return Transform(data.reshape(p, p))


def write_transform(path, T):
    p = T.p
    with open(path, "wb") as fh:
        fh.write(_encode(T.M, MATRIX_MAGIC, (p, p, p)))


# --------------------------------------------------------------------------
# Netpbm


def _pnm_tokens(buf, count, path):
    """Read ``count`` whitespace-separated header tokens; skip ``#`` comments."""
    tokens, pos = [], 0
    while len(tokens) < count:
        while pos < len(buf) and buf[pos:pos + 1].isspace():
            pos += 1
        if pos < len(buf) and buf[pos:pos + 1] == b"#":
            end = buf.find(b"\n", pos)
            pos = len(buf) if end < 0 else end + 1
            continue
        start = pos
        while pos < len(buf) and not buf[pos:pos + 1].isspace():
            pos += 1
        if start == pos:
            raise FormatError(f"{path}: truncated header")
        tokens.append(buf[start:pos])
    # exactly one whitespace byte separates the header from the raster
    return tokens, pos + 1


def read_pnm(path, expect=None):
    """Read a P6 or P5 file into an ``H x W x C`` uint8 array.

    ``expect`` restricts the accepted magic (``"P6"`` or ``"P5"``).
    """
    buf = _read_bytes(path)
    magic = buf[:2].decode("latin-1")
    if magic not in ("P6", "P5") or (expect is not None and magic != expect):
        want = expect or "P6 or P5"
        raise FormatError(f"{path}: not a binary {want} image (magic {buf[:2]!r})")
    tokens, start = _pnm_tokens(buf, 4, path)
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise FormatError(f"{path}: malformed image header") from None
    if width < 1 or height < 1:
        raise FormatError(f"{path}: invalid image size {width}x{height}")
    if maxval != 255:
        raise FormatError(f"{path}: only maxval 255 is supported, got {maxval}")
    channels = 3 if magic == "P6" else 1
    size = width * height * channels
    raster = buf[start:start + size]
    if len(raster) != size:
        raise FormatError(f"{path}: expected {size} raster bytes, found {len(raster)}")
    return np.frombuffer(raster, dtype=np.uint8).reshape(height, width, channels).copy()


def write_pnm(path, img):
    """Write an ``H x W x 3`` (P6) or ``H x W`` / ``H x W x 1`` (P5) uint8 array."""
    img = np.asarray(img)
    if img.dtype != np.uint8:
        raise TypeError("image must be uint8")
    if img.ndim == 2:
        img = img[:, :, None]
    channels = img.shape[2]
    if channels not in (1, 3):
        raise ValueError(f"expected 1 or 3 channels, got {channels}")
    magic = b"P6" if channels == 3 else b"P5"
    h, w = img.shape[:2]
    with open(path, "wb") as fh:
        fh.write(magic + f"\n{w} {h}\n255\n".encode() + np.ascontiguousarray(img).tobytes())


def ensure_dir(path):
    os.makedirs(path, exist_ok=True)
    return path
