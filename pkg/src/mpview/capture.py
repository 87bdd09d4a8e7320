"""Captured-photo preparation: resize/pad to 640x640, tissue segmentation,
bounding box, patch extraction.

The segmentation backend is pluggable.  The shipped reference backend is
classical (Otsu threshold, border-polarity vote, 3x3 close, largest
4-connected component) and bit-deterministic; a learned model can replace
it in-process or over the PNG-in/PNG-out subprocess protocol.
"""
from __future__ import annotations

import math
import subprocess
from dataclasses import dataclass
from typing import Protocol

import numpy as np
from PIL import Image
from scipy import ndimage

from .errors import BackendFailure, EmptyImage, EmptyMask, PatchTooLarge

CAPTURE_SIDE = 640

DEFAULT_PATCH_SIZE = 64
DEFAULT_STRIDE = 64
DEFAULT_MIN_TISSUE = 0.5


@dataclass(frozen=True)
class CaptureTransform:
    """Forward mapping applied by preprocess_capture; invertible via map_to_original."""

    scale: float
    pad_left: int
    pad_top: int
    original_w: int
    original_h: int


@dataclass(frozen=True)
class Patch:
    """One square grayscale crop plus where it came from."""

    pixels: np.ndarray  # (side, side) uint8
    origin: tuple[int, int]
    tissue_fraction: float

    @property
    def side(self) -> int:
        return self.pixels.shape[0]


class SegmentationBackend(Protocol):
    def segment(self, image: np.ndarray) -> np.ndarray:
        """640x640x3 uint8 in; (640, 640) bool mask out (True = tissue)."""
        ...


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def luma(rgb: np.ndarray) -> np.ndarray:
    """ITU grayscale 0.299R + 0.587G + 0.114B, rounded half up."""
    r = rgb[..., 0].astype(np.float64)
    g = rgb[..., 1].astype(np.float64)
    b = rgb[..., 2].astype(np.float64)
    return np.floor(0.299 * r + 0.587 * g + 0.114 * b + 0.5).astype(np.uint8)


def preprocess_capture(image: np.ndarray) -> tuple[np.ndarray, CaptureTransform]:
    """Aspect-preserving bilinear resize (long side -> 640) + centered zero pad."""
    if image.ndim != 3 or image.shape[2] != 3 or image.dtype != np.uint8:
        raise ValueError(f"expected (h, w, 3) uint8 RGB, got {image.shape} {image.dtype}")
    h, w = image.shape[:2]
    if h < 1 or w < 1:
        raise EmptyImage("zero-sized capture")
    scale = CAPTURE_SIDE / max(w, h)
    new_w = CAPTURE_SIDE if w >= h else max(1, _round_half_up(w * scale))
    new_h = CAPTURE_SIDE if h >= w else max(1, _round_half_up(h * scale))
    resized = np.asarray(
        Image.fromarray(image).resize((new_w, new_h), Image.BILINEAR), dtype=np.uint8
    )
    pad_left = (CAPTURE_SIDE - new_w) // 2
    pad_top = (CAPTURE_SIDE - new_h) // 2
    canvas = np.zeros((CAPTURE_SIDE, CAPTURE_SIDE, 3), dtype=np.uint8)
    canvas[pad_top : pad_top + new_h, pad_left : pad_left + new_w] = resized
    return canvas, CaptureTransform(scale, pad_left, pad_top, w, h)


def otsu_threshold(gray: np.ndarray) -> int:
    """Threshold t in [0, 255] maximizing between-class variance of {<=t} vs {>t}.

    Ties resolve to the lowest t.
    """
    hist = np.bincount(gray.ravel(), minlength=256).astype(np.float64)
    total = hist.sum()
    level = np.arange(256, dtype=np.float64)
    w0 = np.cumsum(hist)
    w1 = total - w0
    sum0 = np.cumsum(hist * level)
    mu0 = np.divide(sum0, w0, out=np.zeros(256), where=w0 > 0)
    mu1 = np.divide(sum0[-1] - sum0, w1, out=np.zeros(256), where=w1 > 0)
    variance = w0 * w1 * (mu0 - mu1) ** 2
    return int(np.argmax(variance))


def _border_occupancy(mask: np.ndarray) -> float:
    edge = np.concatenate([mask[0, :], mask[-1, :], mask[1:-1, 0], mask[1:-1, -1]])
    return float(edge.mean()) if edge.size else 0.0


class OtsuSegmentationBackend:
    """Reference classical backend; deterministic for a given image."""

    _STRUCTURE = np.ones((3, 3), dtype=bool)

    def segment(self, image: np.ndarray) -> np.ndarray:
        gray = luma(image) if image.ndim == 3 else image
        t = otsu_threshold(gray)
        above = gray > t
        # tissue is whichever side occupies less of the image border
        if _border_occupancy(above) <= _border_occupancy(~above):
            fg = above
        else:
            fg = ~above
        if not fg.any():
            return fg
        dilated = ndimage.binary_dilation(fg, structure=self._STRUCTURE)
        closed = ndimage.binary_erosion(dilated, structure=self._STRUCTURE, border_value=1)
        labels, n = ndimage.label(closed)  # 4-connected by default
        if n == 0:
            return np.zeros_like(fg)
        counts = np.bincount(labels.ravel())
        counts[0] = 0
        return labels == int(np.argmax(counts))


class ProcessSegmentationBackend:
    """Run an external segmenter: PNG on stdin, grayscale 0/255 PNG on stdout."""

    def __init__(self, command: list[str], timeout_s: float = 60.0):
        self.command = command
        self.timeout_s = timeout_s

    def segment(self, image: np.ndarray) -> np.ndarray:
        import io

        from .png import encode_png
        from .render import RgbaImage

        alpha = np.full(image.shape[:2] + (1,), 255, dtype=np.uint8)
        payload = encode_png(RgbaImage(np.concatenate([image, alpha], axis=2)))
        try:
            proc = subprocess.run(
                self.command, input=payload, capture_output=True, timeout=self.timeout_s
            )
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise BackendFailure(str(exc)) from exc
        if proc.returncode != 0:
            raise BackendFailure(f"exit {proc.returncode}: {proc.stderr[:200]!r}")
        try:
            mask_img = Image.open(io.BytesIO(proc.stdout)).convert("L")
        except Exception as exc:
            raise BackendFailure(f"undecodable mask: {exc}") from exc
        mask = np.asarray(mask_img, dtype=np.uint8) > 127
        if mask.shape != image.shape[:2]:
            raise BackendFailure(f"mask is {mask.shape}, image is {image.shape[:2]}")
        return mask


def segment_foreground(image: np.ndarray, backend: SegmentationBackend | None = None) -> np.ndarray:
    backend = backend or OtsuSegmentationBackend()
    mask = backend.segment(image)
    if mask.shape != image.shape[:2] or mask.dtype != bool:
        raise BackendFailure(f"backend returned {mask.shape} {mask.dtype}")
    return mask


def bounding_box(mask: np.ndarray) -> tuple[int, int, int, int]:
    """Tightest (x, y, w, h) containing all true pixels."""
    ys, xs = np.nonzero(mask)
    if ys.size == 0:
        raise EmptyMask("mask has no foreground pixels")
    x0, x1 = int(xs.min()), int(xs.max())
    y0, y1 = int(ys.min()), int(ys.max())
    return (x0, y0, x1 - x0 + 1, y1 - y0 + 1)


def map_to_original(rect: tuple[int, int, int, int], t: CaptureTransform) -> tuple[int, int, int, int]:
    """Invert preprocess_capture: un-pad, un-scale, round half up, clamp."""
    x, y, w, h = rect
    ox = _round_half_up((x - t.pad_left) / t.scale)
    oy = _round_half_up((y - t.pad_top) / t.scale)
    ow = _round_half_up(w / t.scale)
    oh = _round_half_up(h / t.scale)
    ox = max(0, min(ox, t.original_w))
    oy = max(0, min(oy, t.original_h))
    ow = max(0, min(ow, t.original_w - ox))
    oh = max(0, min(oh, t.original_h - oy))
    return (ox, oy, ow, oh)


def extract_patches(
    image: np.ndarray,
    mask: np.ndarray,
    patch_size: int = DEFAULT_PATCH_SIZE,
    stride: int = DEFAULT_STRIDE,
    min_tissue: float = DEFAULT_MIN_TISSUE,
) -> list[Patch]:
    """Row-major grid over the mask's bounding box, filtered by tissue fraction."""
    gray = luma(image) if image.ndim == 3 else image
    if patch_size > min(gray.shape):
        raise PatchTooLarge(f"patch {patch_size} exceeds image {gray.shape[1]}x{gray.shape[0]}")
    if not 0 < stride <= patch_size:
        raise ValueError(f"stride must be in (0, patch_size], got {stride}")
    if not 0.0 <= min_tissue <= 1.0:
        raise ValueError(f"min_tissue must be in [0, 1], got {min_tissue}")
    bx, by, bw, bh = bounding_box(mask)
    patches: list[Patch] = []
    for y in range(by, by + bh - patch_size + 1, stride):
        for x in range(bx, bx + bw - patch_size + 1, stride):
            frac = float(mask[y : y + patch_size, x : x + patch_size].mean())
            if frac >= min_tissue:
                patches.append(
                    Patch(
                        pixels=gray[y : y + patch_size, x : x + patch_size].copy(),
                        origin=(x, y),
                        tissue_fraction=frac,
                    )
                )
    return patches
