"""Channel plane -> displayable raster: threshold, tint, composite, downsample.

Everything here is a pure function over immutable inputs.  Compositing
accumulates in a wide integer buffer and clamps once at the end, so layer
order never changes the output.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadFactor, DimMismatch, TooManyLayers
from .model import ChannelPlane

MAX_LAYERS = 7


@dataclass(frozen=True)
class LayerSpec:
    """How one channel contributes to a composite."""

    channel_index: int
    color: tuple[int, int, int] = (255, 255, 255)
    threshold: int = 0  # on the 8-bit normalized scale

    def __post_init__(self):
        if not all(0 <= c <= 255 for c in self.color):
            raise ValueError(f"color out of range: {self.color}")
        if not 0 <= self.threshold <= 255:
            raise ValueError(f"threshold out of range: {self.threshold}")


@dataclass(frozen=True)
class RgbaImage:
    pixels: np.ndarray  # (height, width, 4) uint8, alpha always 255

    def __post_init__(self):
        p = self.pixels
        if p.ndim != 3 or p.shape[2] != 4 or p.dtype != np.uint8:
            raise ValueError(f"RGBA buffer must be (h, w, 4) uint8, got {p.shape} {p.dtype}")
        p.flags.writeable = False

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


def normalize8(plane: ChannelPlane) -> ChannelPlane:
    """Map to 8 bits: 16-bit v -> round(v * 255 / 65535); 8-bit passes through."""
    if plane.bit_depth == 8:
        return plane
    v = plane.pixels.astype(np.uint32)
    # v * 255 / 65535 == v / 257 exactly; +128 rounds (exact halves cannot occur)
    out = ((v + 128) // 257).astype(np.uint8)
    return ChannelPlane(out)


def apply_threshold(plane8: ChannelPlane, t: int) -> ChannelPlane:
    """Zero out samples below t; samples >= t pass unchanged."""
    if plane8.bit_depth != 8:
        raise ValueError("threshold operates on 8-bit planes; normalize first")
    if not 0 <= t <= 255:
        raise ValueError(f"threshold out of range: {t}")
    if t == 0:
        return plane8
    out = np.where(plane8.pixels >= t, plane8.pixels, 0).astype(np.uint8)
    return ChannelPlane(out)


def _tinted(pixels8: np.ndarray, color: tuple[int, int, int]) -> np.ndarray:
    """(h, w, 3) uint16 of round(p * c / 255) per component (halves impossible)."""
    p = pixels8.astype(np.uint32)
    out = np.empty(pixels8.shape + (3,), dtype=np.uint16)
    for c in range(3):
        out[..., c] = (p * color[c] + 127) // 255
    return out


def colorize(plane8: ChannelPlane, color: tuple[int, int, int]) -> RgbaImage:
    """Tint a grayscale plane: channel c = round(p * color_c / 255), alpha 255."""
    if plane8.bit_depth != 8:
        raise ValueError("colorize operates on 8-bit planes; normalize first")
    rgb = _tinted(plane8.pixels, color).astype(np.uint8)
    alpha = np.full(plane8.pixels.shape + (1,), 255, dtype=np.uint8)
    return RgbaImage(np.concatenate([rgb, alpha], axis=2))


def composite(layers: list[tuple[ChannelPlane, LayerSpec]]) -> RgbaImage:
    """Additively blend up to 7 thresholded, tinted layers; clamp once at the end."""
    if not layers:
        raise ValueError("composite needs at least one layer")
    if len(layers) > MAX_LAYERS:
        raise TooManyLayers(f"{len(layers)} layers, limit is {MAX_LAYERS}")
    shape = layers[0][0].pixels.shape
    acc = np.zeros(shape + (3,), dtype=np.uint32)
    for plane, spec in layers:
        if plane.pixels.shape != shape:
            raise DimMismatch(f"layer plane is {plane.pixels.shape}, first layer is {shape}")
        thresholded = apply_threshold(plane, spec.threshold)
        acc += _tinted(thresholded.pixels, spec.color)
    rgb = np.minimum(acc, 255).astype(np.uint8)
    alpha = np.full(shape + (1,), 255, dtype=np.uint8)
    return RgbaImage(np.concatenate([rgb, alpha], axis=2))


def downsample(plane: ChannelPlane, factor: int) -> ChannelPlane:
    """Block-mean pool by a power-of-two factor; edge blocks average what exists."""
    if factor < 1 or factor & (factor - 1) != 0:
        raise BadFactor(f"factor must be a power of two, got {factor}")
    if factor == 1:
        return plane
    h, w = plane.pixels.shape
    out_h = -(-h // factor)
    out_w = -(-w // factor)
    # pad to a multiple of the factor, tracking per-block pixel counts
    padded = np.zeros((out_h * factor, out_w * factor), dtype=np.uint64)
    padded[:h, :w] = plane.pixels
    counts = np.zeros_like(padded)
    counts[:h, :w] = 1
    sums = padded.reshape(out_h, factor, out_w, factor).sum(axis=(1, 3))
    ns = counts.reshape(out_h, factor, out_w, factor).sum(axis=(1, 3))
    # round half up on the exact rational mean
    means = (2 * sums + ns) // (2 * ns)
    return ChannelPlane(means.astype(plane.pixels.dtype))
