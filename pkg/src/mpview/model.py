"""Core slide data model shared by parsers, cache, renderer and search."""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import InconsistentPages, DuplicateChannelName

MAX_MULTIPLEX_CHANNELS = 100


class Modality(str, Enum):
    HE = "HE"
    MULTIPLEX = "MULTIPLEX"


@dataclass(frozen=True)
class ChannelPlane:
    """One channel's intensity raster, 8- or 16-bit, immutable once built."""

    pixels: np.ndarray  # (height, width), uint8 or uint16

    def __post_init__(self):
        p = self.pixels
        if p.ndim != 2 or p.shape[0] < 1 or p.shape[1] < 1:
            raise ValueError(f"plane must be 2-D and nonempty, got shape {p.shape}")
        if p.dtype not in (np.uint8, np.uint16):
            raise ValueError(f"plane dtype must be uint8 or uint16, got {p.dtype}")
        p.flags.writeable = False

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def bit_depth(self) -> int:
        return 8 if self.pixels.dtype == np.uint8 else 16

    @property
    def nbytes(self) -> int:
        return self.pixels.nbytes

    @property
    def samples(self) -> np.ndarray:
        """Row-major 1-D view of the raster."""
        return self.pixels.reshape(-1)


@dataclass(frozen=True)
class SlideImage:
    """A named stack of equally-sized single-channel planes."""

    slide_id: str
    channel_names: list[str]
    planes: list[ChannelPlane]
    modality: Modality
    source_path: str = ""

    def __post_init__(self):
        if len(self.channel_names) != len(self.planes):
            raise InconsistentPages(
                f"{len(self.channel_names)} names for {len(self.planes)} planes"
            )
        if not self.planes:
            raise InconsistentPages("slide has no channels")
        first = self.planes[0]
        for i, pl in enumerate(self.planes):
            if (pl.width, pl.height, pl.bit_depth) != (first.width, first.height, first.bit_depth):
                raise InconsistentPages(
                    f"plane {i} is {pl.width}x{pl.height}@{pl.bit_depth}b, "
                    f"plane 0 is {first.width}x{first.height}@{first.bit_depth}b"
                )
        seen = set()
        for name in self.channel_names:
            if name in seen:
                raise DuplicateChannelName(name)
            seen.add(name)
        n = len(self.planes)
        if self.modality is Modality.HE and n != 3:
            raise InconsistentPages(f"HE slide must have exactly 3 planes, got {n}")
        if self.modality is Modality.MULTIPLEX and not 1 <= n <= MAX_MULTIPLEX_CHANNELS:
            raise InconsistentPages(f"multiplex slide must have 1-{MAX_MULTIPLEX_CHANNELS} planes, got {n}")

    @property
    def width(self) -> int:
        return self.planes[0].width

    @property
    def height(self) -> int:
        return self.planes[0].height

    @property
    def bit_depth(self) -> int:
        return self.planes[0].bit_depth

    @property
    def channel_count(self) -> int:
        return len(self.planes)


@dataclass(frozen=True)
class SlideMeta:
    """Registry entry: everything about a slide except its pixel data."""

    slide_id: str
    channel_names: tuple[str, ...]
    width: int
    height: int
    bit_depth: int
    modality: Modality
    source_path: str

    @classmethod
    def of(cls, slide: SlideImage) -> "SlideMeta":
        return cls(
            slide_id=slide.slide_id,
            channel_names=tuple(slide.channel_names),
            width=slide.width,
            height=slide.height,
            bit_depth=slide.bit_depth,
            modality=slide.modality,
            source_path=slide.source_path,
        )
