"""Pixel-grid conventions and binary Netpbm (P5/P6) file I/O.

Arrays are float64 throughout.  An image is an (H, W, C) array with C in
{1, 3} and intensities in [0, 1]; a scalar field (transmission map, dark
channel, per-channel solver state) is an (H, W) array.  Both are C-order,
so sample (row r, col c, channel k) lives at flat index
``(r * W + c) * C + k``.

Freshly loaded images and final outputs stay inside [0, 1]; intermediate
solver fields are allowed to leave that range and are only clamped when
written back to disk.
"""

from __future__ import annotations

import numpy as np

__all__ = [
    "NetpbmError",
    "clamp01",
    "load_image",
    "save_image",
    "validate_field",
    "validate_image",
]

_WHITESPACE = b" \t\n\r\x0b\x0c"


class NetpbmError(ValueError):
    """Raised for malformed, truncated, or unsupported Netpbm input."""


def validate_image(image) -> np.ndarray:
    """Check (H, W, C) layout with C in {1, 3} and finite values."""
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] not in (1, 3):
        raise ValueError(f"expected (H, W, C) image with C in {{1, 3}}, got shape {arr.shape}")
    if arr.shape[0] < 1 or arr.shape[1] < 1:
        raise ValueError(f"image dimensions must be >= 1, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("image contains non-finite values")
    return arr


def validate_field(field) -> np.ndarray:
    """Check (H, W) layout and finite values."""
    arr = np.asarray(field, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"expected (H, W) scalar field, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("field contains non-finite values")
    return arr


def clamp01(values) -> np.ndarray:
    """Clamp every sample to [0, 1].  Idempotent; rejects non-finite input."""
    arr = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError("cannot clamp non-finite values")
    return np.clip(arr, 0.0, 1.0)


def _next_token(raw: bytes, pos: int) -> tuple[bytes, int]:
    """Return the next header token, skipping whitespace and # comments."""
    n = len(raw)
    while pos < n:
        byte = raw[pos : pos + 1]
        if byte in (b"#",):
            while pos < n and raw[pos : pos + 1] != b"\n":
                pos += 1
        elif byte in _WHITESPACE:
            pos += 1
        else:
            break
    start = pos
    while pos < n and raw[pos : pos + 1] not in _WHITESPACE and raw[pos : pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise NetpbmError("malformed header: unexpected end of header")
    return raw[start:pos], pos


def _header_int(raw: bytes, pos: int, what: str) -> tuple[int, int]:
    token, pos = _next_token(raw, pos)
    if not token.isdigit():
        raise NetpbmError(f"malformed header: expected integer {what}, got {token!r}")
    return int(token), pos


def load_image(path) -> np.ndarray:
    """Load a binary Netpbm file (P5 grayscale or P6 color, maxval 255).

    Returns an (H, W, 1) or (H, W, 3) float64 array with samples mapped
    to [0, 1] via v / 255.  Header comments (# ...) are tolerated.
    """
    with open(path, "rb") as fh:
        raw = fh.read()

    magic = raw[:2]
    if magic == b"P5":
        channels = 1
    elif magic == b"P6":
        channels = 3
    else:
        raise NetpbmError(f"malformed header: not a binary Netpbm (P5/P6) file, magic {magic!r}")

    width, pos = _header_int(raw, 2, "width")
    height, pos = _header_int(raw, pos, "height")
    maxval, pos = _header_int(raw, pos, "maxval")
    if width < 1 or height < 1:
        raise NetpbmError(f"malformed header: non-positive dimensions {width}x{height}")
    if maxval != 255:
        raise NetpbmError(f"unsupported maxval {maxval}: only 255 is supported")
    if pos >= len(raw) or raw[pos : pos + 1] not in _WHITESPACE:
        raise NetpbmError("malformed header: missing whitespace after maxval")
    pos += 1  # exactly one whitespace byte separates header from samples

    expected = width * height * channels
    payload = raw[pos : pos + expected]
    if len(payload) < expected:
        raise NetpbmError(f"truncated payload: expected {expected} bytes, found {len(payload)}")

    samples = np.frombuffer(payload, dtype=np.uint8).astype(np.float64) / 255.0
    return samples.reshape(height, width, channels)


def save_image(image, path) -> None:
    """Write an image as binary Netpbm (P5 for 1 channel, P6 for 3).

    Values are clamped to [0, 1] and quantized with round-half-away-from-
    zero on v * 255, so a save/load round trip is exact to 1/255 per
    sample.  Headers are emitted without comments.
    """
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim == 2:
        arr = arr[:, :, np.newaxis]
    arr = validate_image(arr)
    height, width, channels = arr.shape
    quantized = np.floor(clamp01(arr) * 255.0 + 0.5).astype(np.uint8)
    magic = b"P5" if channels == 1 else b"P6"
    header = magic + b"\n%d %d\n255\n" % (width, height)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(quantized.tobytes())
