"""Raw-stack slide format: a directory with manifest.json + one raw file per channel.

Pixel files are little-endian, row-major, no header.  The manifest carries
width/height/bit_depth/modality and the ordered channel list.  This is the
writable sidecar format used for fixtures and corpus snapshots.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import DuplicateChannelName, ManifestMissing, SizeMismatch
from .model import ChannelPlane, Modality, SlideImage

MANIFEST_NAME = "manifest.json"


def _load_manifest(dir_path: Path) -> dict:
    manifest_path = dir_path / MANIFEST_NAME
    if not manifest_path.is_file():
        raise ManifestMissing(str(manifest_path))
    with open(manifest_path, encoding="utf-8") as fh:
        manifest = json.load(fh)
    names = [ch["name"] for ch in manifest["channels"]]
    if len(set(names)) != len(names):
        dup = next(n for i, n in enumerate(names) if n in names[:i])
        raise DuplicateChannelName(dup)
    return manifest


def _read_channel_file(dir_path: Path, manifest: dict, index: int) -> ChannelPlane:
    width = int(manifest["width"])
    height = int(manifest["height"])
    bit_depth = int(manifest["bit_depth"])
    entry = manifest["channels"][index]
    raw = (dir_path / entry["file"]).read_bytes()
    expected = width * height * (bit_depth // 8)
    if len(raw) != expected:
        raise SizeMismatch(
            f"{entry['file']}: {len(raw)} bytes, expected {expected} "
            f"for {width}x{height}@{bit_depth}b"
        )
    if bit_depth == 8:
        arr = np.frombuffer(raw, dtype=np.uint8).copy()
    else:
        arr = np.frombuffer(raw, dtype="<u2").astype(np.uint16)
    return ChannelPlane(arr.reshape(height, width))


def parse_raw_stack(dir_path: str | Path, slide_id: str = "") -> SlideImage:
    """Assemble a SlideImage from a raw-stack directory, manifest channel order."""
    dir_path = Path(dir_path)
    manifest = _load_manifest(dir_path)
    planes = [_read_channel_file(dir_path, manifest, i) for i in range(len(manifest["channels"]))]
    return SlideImage(
        slide_id=slide_id,
        channel_names=[ch["name"] for ch in manifest["channels"]],
        planes=planes,
        modality=Modality(manifest["modality"]),
        source_path=str(dir_path),
    )


def read_single_channel(dir_path: str | Path, index: int) -> ChannelPlane:
    """Decode one channel without touching the others (lazy cache fills)."""
    dir_path = Path(dir_path)
    return _read_channel_file(dir_path, _load_manifest(dir_path), index)


def write_raw_stack(slide: SlideImage, dir_path: str | Path) -> Path:
    """Serialize a slide to a raw-stack directory; returns the directory path."""
    dir_path = Path(dir_path)
    dir_path.mkdir(parents=True, exist_ok=True)
    channels = []
    for i, (name, plane) in enumerate(zip(slide.channel_names, slide.planes)):
        fname = f"ch{i:03d}.raw"
        if plane.bit_depth == 8:
            payload = plane.pixels.tobytes()
        else:
            payload = plane.pixels.astype("<u2").tobytes()
        (dir_path / fname).write_bytes(payload)
        channels.append({"name": name, "file": fname})
    manifest = {
        "width": slide.width,
        "height": slide.height,
        "bit_depth": slide.bit_depth,
        "modality": slide.modality.value,
        "channels": channels,
    }
    with open(dir_path / MANIFEST_NAME, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
    return dir_path
