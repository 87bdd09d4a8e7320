"""TIFF 6.0 subset reader for channel-per-page grayscale stacks.

Supported profile: classic (non-Big) TIFF, either byte order, one IFD per
channel, 1 sample/pixel at 8 or 16 bits, strip-organized, compression none
or Deflate, all pages sharing the same geometry.  Channel names come from
the first page's ImageDescription as a newline-separated list.  Anything
outside the profile raises UnsupportedFeature naming the offending tag.
"""
from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

import numpy as np

from .errors import BadMagic, InconsistentPages, Truncated, UnsupportedFeature
from .model import ChannelPlane, Modality, SlideImage

_TAG_IMAGE_WIDTH = 256
_TAG_IMAGE_LENGTH = 257
_TAG_BITS_PER_SAMPLE = 258
_TAG_COMPRESSION = 259
_TAG_PHOTOMETRIC = 262
_TAG_IMAGE_DESCRIPTION = 270
_TAG_STRIP_OFFSETS = 273
_TAG_SAMPLES_PER_PIXEL = 277
_TAG_ROWS_PER_STRIP = 278
_TAG_STRIP_BYTE_COUNTS = 279
_TAG_TILE_WIDTH = 322
_TAG_TILE_LENGTH = 323
_TAG_TILE_OFFSETS = 324

_TAG_NAMES = {
    _TAG_IMAGE_WIDTH: "ImageWidth",
    _TAG_IMAGE_LENGTH: "ImageLength",
    _TAG_BITS_PER_SAMPLE: "BitsPerSample",
    _TAG_COMPRESSION: "Compression",
    _TAG_PHOTOMETRIC: "PhotometricInterpretation",
    _TAG_IMAGE_DESCRIPTION: "ImageDescription",
    _TAG_STRIP_OFFSETS: "StripOffsets",
    _TAG_SAMPLES_PER_PIXEL: "SamplesPerPixel",
    _TAG_ROWS_PER_STRIP: "RowsPerStrip",
    _TAG_STRIP_BYTE_COUNTS: "StripByteCounts",
    _TAG_TILE_WIDTH: "TileWidth",
    _TAG_TILE_LENGTH: "TileLength",
    _TAG_TILE_OFFSETS: "TileOffsets",
}

# field type -> (struct letter, byte size); the subset only needs these
_FIELD_TYPES = {1: ("B", 1), 2: ("c", 1), 3: ("H", 2), 4: ("I", 4)}

_COMPRESSION_NONE = 1
_COMPRESSION_DEFLATE = 8


def _tag_name(tag: int) -> str:
    return _TAG_NAMES.get(tag, f"tag {tag}")


@dataclass
class _Page:
    width: int
    height: int
    bits: int
    compression: int
    strip_offsets: list[int]
    strip_byte_counts: list[int]
    description: str | None


class TiffReader:
    """Parses the IFD chain up front; decodes planes on demand."""

    def __init__(self, data: bytes):
        self._data = data
        head = data[:4]
        if head == b"II*\x00":
            self._bo = "<"
        elif head == b"MM\x00*":
            self._bo = ">"
        else:
            raise BadMagic(f"not a TIFF header: {head!r}")
        if len(data) < 8:
            raise Truncated("header shorter than 8 bytes")
        (first_ifd,) = struct.unpack_from(self._bo + "I", data, 4)
        self._pages: list[_Page] = []
        offset = first_ifd
        while offset != 0:
            offset = self._read_ifd(offset)
        if not self._pages:
            raise Truncated("no image file directories")
        first = self._pages[0]
        for i, p in enumerate(self._pages):
            if (p.width, p.height, p.bits) != (first.width, first.height, first.bits):
                raise InconsistentPages(
                    f"page {i} is {p.width}x{p.height}@{p.bits}b, "
                    f"page 0 is {first.width}x{first.height}@{first.bits}b"
                )

    # -- IFD walking -----------------------------------------------------

    def _require(self, end: int, what: str):
        if end > len(self._data):
            raise Truncated(f"{what} extends to byte {end}, stream has {len(self._data)}")

    def _read_values(self, ftype: int, count: int, raw: bytes, tag: int):
        if ftype not in _FIELD_TYPES:
            raise UnsupportedFeature(f"{_tag_name(tag)} has unsupported field type {ftype}")
        letter, size = _FIELD_TYPES[ftype]
        total = size * count
        if total <= 4:
            buf = raw[:total]
        else:
            (off,) = struct.unpack(self._bo + "I", raw)
            self._require(off + total, _tag_name(tag))
            buf = self._data[off : off + total]
        if ftype == 2:  # ASCII, NUL-terminated
            return buf
        return list(struct.unpack(self._bo + letter * count, buf))

    def _read_ifd(self, offset: int) -> int:
        self._require(offset + 2, "IFD header")
        (n_entries,) = struct.unpack_from(self._bo + "H", self._data, offset)
        end = offset + 2 + 12 * n_entries + 4
        self._require(end, "IFD table")
        entries: dict[int, object] = {}
        for i in range(n_entries):
            base = offset + 2 + 12 * i
            tag, ftype, count = struct.unpack_from(self._bo + "HHI", self._data, base)
            entries[tag] = self._read_values(ftype, count, self._data[base + 8 : base + 12], tag)
        self._pages.append(self._page_from_entries(entries))
        (next_offset,) = struct.unpack_from(self._bo + "I", self._data, end - 4)
        return next_offset

    def _page_from_entries(self, entries: dict) -> _Page:
        for tag in (_TAG_TILE_WIDTH, _TAG_TILE_LENGTH, _TAG_TILE_OFFSETS):
            if tag in entries:
                raise UnsupportedFeature(f"{_tag_name(tag)}: tiled pages not supported")

        def scalar(tag: int, default=None) -> int:
            if tag not in entries:
                if default is None:
                    raise UnsupportedFeature(f"{_tag_name(tag)} missing")
                return default
            return int(entries[tag][0])

        width = scalar(_TAG_IMAGE_WIDTH)
        height = scalar(_TAG_IMAGE_LENGTH)
        bits = scalar(_TAG_BITS_PER_SAMPLE, default=1)
        if bits not in (8, 16):
            raise UnsupportedFeature(f"BitsPerSample={bits}, only 8 and 16 supported")
        compression = scalar(_TAG_COMPRESSION, default=_COMPRESSION_NONE)
        if compression not in (_COMPRESSION_NONE, _COMPRESSION_DEFLATE):
            raise UnsupportedFeature(f"Compression={compression}, only none(1) and Deflate(8) supported")
        photometric = scalar(_TAG_PHOTOMETRIC, default=1)
        if photometric not in (0, 1):
            raise UnsupportedFeature(
                f"PhotometricInterpretation={photometric}, only grayscale (0/1) supported"
            )
        spp = scalar(_TAG_SAMPLES_PER_PIXEL, default=1)
        if spp != 1:
            raise UnsupportedFeature(f"SamplesPerPixel={spp}, only single-sample pages supported")
        if _TAG_STRIP_OFFSETS not in entries:
            raise UnsupportedFeature("StripOffsets missing: page is not strip-organized")
        if _TAG_STRIP_BYTE_COUNTS not in entries:
            raise UnsupportedFeature("StripByteCounts missing")
        offsets = [int(v) for v in entries[_TAG_STRIP_OFFSETS]]
        counts = [int(v) for v in entries[_TAG_STRIP_BYTE_COUNTS]]
        if len(offsets) != len(counts):
            raise UnsupportedFeature("StripOffsets and StripByteCounts disagree in count")
        description = None
        if _TAG_IMAGE_DESCRIPTION in entries:
            description = entries[_TAG_IMAGE_DESCRIPTION].rstrip(b"\x00").decode("utf-8", "replace")
        return _Page(width, height, bits, compression, offsets, counts, description)

    # -- decoding --------------------------------------------------------

    @property
    def page_count(self) -> int:
        return len(self._pages)

    @property
    def width(self) -> int:
        return self._pages[0].width

    @property
    def height(self) -> int:
        return self._pages[0].height

    @property
    def bit_depth(self) -> int:
        return self._pages[0].bits

    def decode_plane(self, index: int) -> ChannelPlane:
        page = self._pages[index]
        chunks = []
        for off, cnt in zip(page.strip_offsets, page.strip_byte_counts):
            self._require(off + cnt, f"strip at {off}")
            chunk = self._data[off : off + cnt]
            if page.compression == _COMPRESSION_DEFLATE:
                try:
                    chunk = zlib.decompress(chunk)
                except zlib.error as exc:
                    raise Truncated(f"bad Deflate strip at {off}: {exc}") from None
            chunks.append(chunk)
        raw = b"".join(chunks)
        expected = page.width * page.height * (page.bits // 8)
        if len(raw) < expected:
            raise Truncated(f"page {index}: {len(raw)} pixel bytes, expected {expected}")
        raw = raw[:expected]
        if page.bits == 8:
            arr = np.frombuffer(raw, dtype=np.uint8).copy()
        else:
            # normalize 16-bit samples from file order to host order
            arr = np.frombuffer(raw, dtype=self._bo + "u2").astype(np.uint16)
        return ChannelPlane(arr.reshape(page.height, page.width))

    def channel_names(self) -> list[str]:
        """Names from page 0's ImageDescription; generated when missing/short."""
        n = self.page_count
        desc = self._pages[0].description
        if desc is not None:
            names = desc.split("\n")
            if names and names[-1] == "":
                names = names[:-1]
            if len(names) >= n:
                names = names[:n]
                if len(set(names)) == n and all(names):
                    return names
        return [f"ch{i}" for i in range(n)]


def parse_tiff(data: bytes, slide_id: str = "", source_path: str = "") -> SlideImage:
    """Decode a full slide from TIFF bytes (one channel per page)."""
    reader = TiffReader(data)
    planes = [reader.decode_plane(i) for i in range(reader.page_count)]
    names = reader.channel_names()
    modality = Modality.HE if names == ["R", "G", "B"] else Modality.MULTIPLEX
    return SlideImage(
        slide_id=slide_id,
        channel_names=names,
        planes=planes,
        modality=modality,
        source_path=source_path,
    )
