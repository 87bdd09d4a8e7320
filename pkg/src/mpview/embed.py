"""Patch -> latent vector encoders and the on-disk latent corpus format.

The reference encoder is a seeded random projection: 16x16 block-mean
thumbnail, mean-centered, multiplied by a fixed 256 x d matrix of standard
normals drawn from the package's deterministic stream (row-major fill; the
fill order is part of the format), then L2-normalized.  Mean-centering makes
it invariant to global brightness shifts.  A real learned encoder can slot
in through the subprocess protocol without touching anything downstream.
"""
from __future__ import annotations

import struct
import subprocess
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .capture import Patch, extract_patches, luma
from .errors import BackendFailure, SizeMismatch
from .model import Modality, SlideImage
from .render import normalize8
from .rng import DeterministicRng

DEFAULT_DIM = 64
_THUMB = 16
_ZERO_NORM_EPS = 1e-12

CORPUS_MAGIC = b"MPIRLAT1"


@dataclass(frozen=True)
class EncoderSpec:
    """Identity of the reference encoder; latents from different specs never mix."""

    d: int = DEFAULT_DIM
    seed: int = 0

    @property
    def encoder_id(self) -> str:
        return f"refenc1-d{self.d}-s{self.seed}"

    @classmethod
    def from_encoder_id(cls, encoder_id: str) -> "EncoderSpec":
        try:
            kind, d_part, s_part = encoder_id.split("-")
            if kind != "refenc1" or not d_part.startswith("d") or not s_part.startswith("s"):
                raise ValueError
            return cls(d=int(d_part[1:]), seed=int(s_part[1:]))
        except ValueError:
            raise ValueError(f"not a reference encoder id: {encoder_id!r}") from None


@dataclass(frozen=True)
class LatentVector:
    values: np.ndarray  # (d,) float64, unit L2 norm or all-zero
    modality: Modality
    channel_tag: str | None = None

    @property
    def d(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class CorpusRecord:
    latent: LatentVector
    slide_id: str
    origin: tuple[int, int]


@dataclass(frozen=True)
class SkippedChannel:
    """A configured channel missing from a slide; recorded, not fatal."""

    slide_id: str
    channel: str


@lru_cache(maxsize=8)
def projection_matrix(d: int, seed: int) -> np.ndarray:
    """Fixed 256 x d matrix, filled row-major from the seeded normal stream."""
    rng = DeterministicRng(seed)
    mat = rng.normals(_THUMB * _THUMB * d).reshape(_THUMB * _THUMB, d)
    mat.flags.writeable = False
    return mat


def encode_pixels(pixels: np.ndarray, spec: EncoderSpec) -> np.ndarray:
    """Core encoder math on a square uint8 patch; side must be a multiple of 16."""
    side = pixels.shape[0]
    if pixels.ndim != 2 or pixels.shape[1] != side:
        raise SizeMismatch(f"patch must be square, got {pixels.shape}")
    if side < _THUMB or side % _THUMB != 0:
        raise SizeMismatch(f"patch side {side} is not a positive multiple of {_THUMB}")
    block = side // _THUMB
    thumb = pixels.astype(np.float64).reshape(_THUMB, block, _THUMB, block).mean(axis=(1, 3))
    flat = thumb.reshape(-1)
    centered = flat - flat.mean()
    projected = centered @ projection_matrix(spec.d, spec.seed)
    norm = float(np.linalg.norm(projected))
    if norm < _ZERO_NORM_EPS:
        return np.zeros(spec.d, dtype=np.float64)
    return projected / norm


def encode_patch(
    patch: Patch,
    spec: EncoderSpec,
    modality: Modality = Modality.HE,
    channel_tag: str | None = None,
) -> LatentVector:
    values = encode_pixels(patch.pixels, spec)
    values.flags.writeable = False
    return LatentVector(values=values, modality=modality, channel_tag=channel_tag)


class ProcessEncoder:
    """External encoder subprocess: grayscale PNG patch in, d little-endian float64 out."""

    def __init__(self, command: list[str], encoder_id: str, d: int, timeout_s: float = 60.0):
        self.command = command
        self.encoder_id = encoder_id
        self.d = d
        self.timeout_s = timeout_s

    def encode(self, pixels: np.ndarray) -> np.ndarray:
        from .model import ChannelPlane
        from .png import encode_png

        payload = encode_png(ChannelPlane(pixels.copy()))
        try:
            proc = subprocess.run(
                self.command, input=payload, capture_output=True, timeout=self.timeout_s
            )
        except (OSError, subprocess.TimeoutExpired) as exc:
            raise BackendFailure(str(exc)) from exc
        if proc.returncode != 0:
            raise BackendFailure(f"exit {proc.returncode}: {proc.stderr[:200]!r}")
        expected = 8 * self.d
        if len(proc.stdout) != expected:
            raise BackendFailure(f"encoder wrote {len(proc.stdout)} bytes, expected {expected}")
        return np.frombuffer(proc.stdout, dtype="<f8").astype(np.float64)


def _slide_gray_plane(slide: SlideImage, channel_index: int) -> np.ndarray:
    return normalize8(slide.planes[channel_index]).pixels


def _he_gray(slide: SlideImage) -> np.ndarray:
    rgb = np.stack([normalize8(p).pixels for p in slide.planes], axis=2)
    return luma(rgb)


def encode_corpus(
    slides: list[SlideImage],
    spec: EncoderSpec,
    channels: list[str],
    patch_size: int = 64,
    stride: int = 64,
) -> tuple[list[CorpusRecord], list[SkippedChannel]]:
    """Encode every slide's patches; multiplex slides per configured channel.

    Output order is fully determined by input order: slides as given,
    channels in configured order, patches row-major.
    """
    records: list[CorpusRecord] = []
    skipped: list[SkippedChannel] = []
    for slide in slides:
        if slide.modality is Modality.MULTIPLEX:
            for channel in channels:
                if channel not in slide.channel_names:
                    skipped.append(SkippedChannel(slide.slide_id, channel))
                    continue
                gray = _slide_gray_plane(slide, slide.channel_names.index(channel))
                full = np.ones(gray.shape, dtype=bool)
                for patch in extract_patches(gray, full, patch_size, stride, min_tissue=0.0):
                    records.append(
                        CorpusRecord(
                            latent=encode_patch(patch, spec, Modality.MULTIPLEX, channel),
                            slide_id=slide.slide_id,
                            origin=patch.origin,
                        )
                    )
        else:
            gray = _he_gray(slide)
            full = np.ones(gray.shape, dtype=bool)
            for patch in extract_patches(gray, full, patch_size, stride, min_tissue=0.0):
                records.append(
                    CorpusRecord(
                        latent=encode_patch(patch, spec, Modality.HE, None),
                        slide_id=slide.slide_id,
                        origin=patch.origin,
                    )
                )
    return records, skipped


# -- corpus persistence -------------------------------------------------------


def _write_str(out: bytearray, s: str) -> None:
    raw = s.encode("utf-8")
    out += struct.pack("<I", len(raw))
    out += raw


def _read_str(data: bytes, pos: int) -> tuple[str, int]:
    (n,) = struct.unpack_from("<I", data, pos)
    pos += 4
    return data[pos : pos + n].decode("utf-8"), pos + n


def save_corpus(records: list[CorpusRecord], path: str) -> None:
    if not records:
        raise ValueError("refusing to write an empty corpus")
    d = records[0].latent.d
    out = bytearray()
    out += CORPUS_MAGIC
    out += struct.pack("<IQ", d, len(records))
    for rec in records:
        out += rec.latent.values.astype("<f8").tobytes()
        _write_str(out, rec.slide_id)
        _write_str(out, rec.latent.channel_tag or "")
        _write_str(out, f"{rec.origin[0]},{rec.origin[1]}")
    with open(path, "wb") as fh:
        fh.write(out)


def load_corpus(path: str) -> list[CorpusRecord]:
    data = open(path, "rb").read()
    if data[:8] != CORPUS_MAGIC:
        raise ValueError(f"{path}: not a latent corpus file")
    d, count = struct.unpack_from("<IQ", data, 8)
    pos = 8 + 12
    records: list[CorpusRecord] = []
    for _ in range(count):
        values = np.frombuffer(data, dtype="<f8", count=d, offset=pos).astype(np.float64)
        values.flags.writeable = False
        pos += 8 * d
        slide_id, pos = _read_str(data, pos)
        tag, pos = _read_str(data, pos)
        origin_s, pos = _read_str(data, pos)
        x_s, y_s = origin_s.split(",")
        latent = LatentVector(
            values=values,
            modality=Modality.MULTIPLEX if tag else Modality.HE,
            channel_tag=tag or None,
        )
        records.append(CorpusRecord(latent=latent, slide_id=slide_id, origin=(int(x_s), int(y_s))))
    return records
