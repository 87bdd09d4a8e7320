"""TIFF subset parser tests, anchored on an independent reader (tifffile)."""
from __future__ import annotations

import io

import numpy as np
import pytest
import tifffile

from mpview.errors import BadMagic, InconsistentPages, Truncated, UnsupportedFeature
from mpview.tiff import TiffReader, parse_tiff

from synth import build_tiff


def three_planes_8bit():
    rng = np.random.default_rng(7)
    return [rng.integers(0, 256, (2, 2), dtype=np.uint8) for _ in range(3)]


def test_three_page_fixture_names_and_planes():
    planes = three_planes_8bit()
    data = build_tiff(planes, names=["DAPI", "CD3", "CD8"])
    slide = parse_tiff(data)
    assert slide.channel_names == ["DAPI", "CD3", "CD8"]
    assert slide.channel_count == 3
    for got, want in zip(slide.planes, planes):
        np.testing.assert_array_equal(got.pixels, want)


@pytest.mark.parametrize("endian", ["<", ">"])
@pytest.mark.parametrize("compression", [1, 8])
@pytest.mark.parametrize("bit_depth", [8, 16])
def test_matches_independent_reader(endian, compression, bit_depth):
    rng = np.random.default_rng(11)
    dtype = np.uint8 if bit_depth == 8 else np.uint16
    planes = [rng.integers(0, 2**bit_depth, (5, 7), dtype=dtype) for _ in range(2)]
    data = build_tiff(planes, names=["a", "b"], endian=endian, compression=compression)
    slide = parse_tiff(data)
    reference = tifffile.imread(io.BytesIO(data))
    assert reference.shape == (2, 5, 7)
    for i in range(2):
        np.testing.assert_array_equal(slide.planes[i].pixels, reference[i])
        np.testing.assert_array_equal(slide.planes[i].pixels, planes[i])


def test_big_and_little_endian_decode_identically():
    rng = np.random.default_rng(13)
    planes = [rng.integers(0, 65536, (4, 3), dtype=np.uint16)]
    le = parse_tiff(build_tiff(planes, endian="<"))
    be = parse_tiff(build_tiff(planes, endian=">"))
    np.testing.assert_array_equal(le.planes[0].pixels, be.planes[0].pixels)


def test_multi_strip_pages_reassemble():
    rng = np.random.default_rng(17)
    planes = [rng.integers(0, 256, (9, 4), dtype=np.uint8)]
    for compression in (1, 8):
        data = build_tiff(planes, rows_per_strip=2, compression=compression)
        slide = parse_tiff(data)
        np.testing.assert_array_equal(slide.planes[0].pixels, planes[0])


def test_bad_magic():
    with pytest.raises(BadMagic):
        parse_tiff(b"PK\x03\x04" + b"\x00" * 64)


def test_inconsistent_pages():
    rng = np.random.default_rng(19)
    a = rng.integers(0, 256, (4, 4), dtype=np.uint8)
    b = rng.integers(0, 256, (2, 2), dtype=np.uint8)
    with pytest.raises(InconsistentPages):
        parse_tiff(build_tiff([a, b]))


def test_unsupported_compression_names_the_tag():
    data = bytearray(build_tiff(three_planes_8bit()[:1]))
    # patch the Compression entry's inline SHORT value to LZW (5)
    reader_data = bytes(data)
    idx = reader_data.find(b"\x03\x01\x03\x00")  # tag 259, type SHORT, little-endian
    assert idx > 0
    data[idx + 8 : idx + 10] = (5).to_bytes(2, "little")
    with pytest.raises(UnsupportedFeature, match="Compression"):
        parse_tiff(bytes(data))


def test_tiled_page_rejected():
    data = bytearray(build_tiff(three_planes_8bit()[:1]))
    # rewrite the SamplesPerPixel tag id (277) into TileWidth (322) to simulate a tiled page
    idx = data.find((277).to_bytes(2, "little") + b"\x03\x00")
    assert idx > 0
    data[idx : idx + 2] = (322).to_bytes(2, "little")
    with pytest.raises(UnsupportedFeature, match="TileWidth"):
        parse_tiff(bytes(data))


def test_truncated_strip_offset():
    planes = three_planes_8bit()[:1]
    data = build_tiff(planes)
    with pytest.raises(Truncated):
        parse_tiff(data[: len(data) - 30])


def test_short_description_falls_back_to_generated_names():
    planes = three_planes_8bit()
    data = build_tiff(planes, names=["only-one"])
    assert parse_tiff(data).channel_names == ["ch0", "ch1", "ch2"]
    data = build_tiff(planes)  # no description at all
    assert parse_tiff(data).channel_names == ["ch0", "ch1", "ch2"]


def test_reader_exposes_geometry_without_decoding():
    planes = [np.zeros((6, 8), dtype=np.uint16)]
    reader = TiffReader(build_tiff(planes))
    assert (reader.width, reader.height, reader.bit_depth, reader.page_count) == (8, 6, 16, 1)
