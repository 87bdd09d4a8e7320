"""PNG writer round trips, decoded with Pillow as the independent reader."""
from __future__ import annotations

import io

import numpy as np
import pytest
from PIL import Image

from mpview.model import ChannelPlane
from mpview.png import encode_png, predicted_png_size
from mpview.render import RgbaImage


def decode(data: bytes) -> np.ndarray:
    return np.asarray(Image.open(io.BytesIO(data)))


def test_gray_round_trip():
    rng = np.random.default_rng(0)
    pixels = rng.integers(0, 256, (13, 7), dtype=np.uint8)
    out = decode(encode_png(ChannelPlane(pixels)))
    np.testing.assert_array_equal(out, pixels)


def test_rgba_round_trip():
    rng = np.random.default_rng(1)
    pixels = rng.integers(0, 256, (5, 9, 4), dtype=np.uint8)
    pixels[..., 3] = 255
    out = decode(encode_png(RgbaImage(pixels.copy())))
    np.testing.assert_array_equal(out, pixels)


def test_single_black_pixel():
    out = decode(encode_png(ChannelPlane(np.zeros((1, 1), dtype=np.uint8))))
    assert out.shape == (1, 1)
    assert out[0, 0] == 0


def test_16bit_plane_rejected():
    with pytest.raises(ValueError):
        encode_png(ChannelPlane(np.zeros((1, 1), dtype=np.uint16)))


@pytest.mark.parametrize("shape,channels", [((1, 1), 1), ((64, 64), 1), ((33, 17), 4), ((640, 640), 4)])
def test_predicted_size_is_an_upper_bound(shape, channels):
    rng = np.random.default_rng(2)
    if channels == 1:
        payload = encode_png(ChannelPlane(rng.integers(0, 256, shape, dtype=np.uint8)))
    else:
        pixels = rng.integers(0, 256, shape + (4,), dtype=np.uint8)
        pixels[..., 3] = 255
        payload = encode_png(RgbaImage(pixels))
    assert len(payload) <= predicted_png_size(shape[1], shape[0], channels)
