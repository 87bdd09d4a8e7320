"""Minimal lossless PNG writer: 8-bit grayscale and 8-bit RGBA, filter 0 rows."""
from __future__ import annotations

import struct
import zlib

import numpy as np

from .model import ChannelPlane
from .render import RgbaImage

_SIGNATURE = b"\x89PNG\r\n\x1a\n"


def _chunk(tag: bytes, payload: bytes) -> bytes:
    crc = zlib.crc32(tag)
    crc = zlib.crc32(payload, crc)
    return struct.pack(">I", len(payload)) + tag + payload + struct.pack(">I", crc)


def _encode(pixels: np.ndarray, color_type: int) -> bytes:
    height, width = pixels.shape[:2]
    row_bytes = pixels.reshape(height, -1)
    raw = bytearray()
    for r in range(height):
        raw.append(0)  # filter type: None
        raw += row_bytes[r].tobytes()
    ihdr = struct.pack(">IIBBBBB", width, height, 8, color_type, 0, 0, 0)
    return b"".join(
        [_SIGNATURE, _chunk(b"IHDR", ihdr), _chunk(b"IDAT", zlib.compress(bytes(raw))), _chunk(b"IEND", b"")]
    )


def encode_png(image: RgbaImage | ChannelPlane) -> bytes:
    """Losslessly encode an RGBA image or an 8-bit grayscale plane."""
    if isinstance(image, RgbaImage):
        return _encode(image.pixels, color_type=6)
    if image.bit_depth != 8:
        raise ValueError("grayscale PNG output is 8-bit; normalize the plane first")
    return _encode(image.pixels, color_type=0)


def predicted_png_size(width: int, height: int, channels: int) -> int:
    """Upper bound on encode_png output size, used for transfer-cap prechecks."""
    raw = height * (width * channels + 1)
    zlib_bound = raw + 5 * ((raw + 65534) // 65535) + 6
    return 57 + zlib_bound  # signature + IHDR/IDAT/IEND framing
