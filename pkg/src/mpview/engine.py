"""Similar-slide search: modality profiles, warp-aligned batch correction,
centroid-index retrieval and vote consolidation.

A SearchEngine fits on a slide corpus (encode -> profile -> index) and then
answers patch-list queries.  Queries are read-only; refitting swaps the
index atomically so in-flight searches finish on the snapshot they started
with.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .capture import (
    DEFAULT_MIN_TISSUE,
    DEFAULT_PATCH_SIZE,
    DEFAULT_STRIDE,
    Patch,
    SegmentationBackend,
    bounding_box,
    extract_patches,
    map_to_original,
    preprocess_capture,
    segment_foreground,
)
from .dtw import dtw
from .embed import CorpusRecord, EncoderSpec, LatentVector, encode_corpus, encode_patch
from .errors import DimensionMismatch, EmptyCorpus, IndexNotBuilt, NoPatches
from .index import DEFAULT_PROBE, DEFAULT_TOP_N, CentroidIndex, build_index
from .model import Modality, SlideImage
from .voting import SlideHit, vote

ProfileKey = tuple[Modality, str | None]


@dataclass(frozen=True)
class ModalityProfile:
    """Per-dimension mean of one modality/channel's latents; what DTW aligns."""

    modality: Modality
    channel_tag: str | None
    means: np.ndarray  # (d,) float64

    @property
    def key(self) -> ProfileKey:
        return (self.modality, self.channel_tag)


def build_profile(
    latents: list[LatentVector], modality: Modality, channel_tag: str | None = None
) -> ModalityProfile:
    if not latents:
        raise EmptyCorpus(f"no latents for profile {modality.value}/{channel_tag}")
    means = np.mean(np.stack([v.values for v in latents]), axis=0)
    means.flags.writeable = False
    return ModalityProfile(modality=modality, channel_tag=channel_tag, means=means)


def batch_correct(q: LatentVector, src: ModalityProfile, dst: ModalityProfile) -> LatentVector:
    """Shift q dimension-wise from src's profile onto dst's via the DTW path.

    Dimension j moves by (mean of dst means aligned to j) - src mean j; the
    result is re-normalized.  src == dst yields a diagonal path and the
    identity shift.
    """
    d = q.values.shape[0]
    if src.means.shape[0] != d or dst.means.shape[0] != d:
        raise DimensionMismatch(
            f"q has {d} dims, profiles have {src.means.shape[0]}/{dst.means.shape[0]}"
        )
    _, path = dtw(src.means, dst.means)
    aligned_sum = np.zeros(d)
    aligned_count = np.zeros(d)
    for i, j in path:
        aligned_sum[i] += dst.means[j]
        aligned_count[i] += 1
    corrected = q.values - src.means + aligned_sum / aligned_count
    norm = float(np.linalg.norm(corrected))
    if norm < 1e-12:
        corrected = np.zeros(d)
    else:
        corrected = corrected / norm
    corrected.flags.writeable = False
    return LatentVector(values=corrected, modality=dst.modality, channel_tag=dst.channel_tag)


class SearchEngine:
    """fit() on slides, then search_similar() on query patches."""

    def __init__(
        self,
        encoder_spec: EncoderSpec | None = None,
        channels: list[str] | None = None,
        patch_size: int = DEFAULT_PATCH_SIZE,
        stride: int = DEFAULT_STRIDE,
        probe: int = DEFAULT_PROBE,
        top_n: int = DEFAULT_TOP_N,
    ):
        self.encoder_spec = encoder_spec or EncoderSpec()
        self.channels = list(channels) if channels else []
        self.patch_size = patch_size
        self.stride = stride
        self.probe = probe
        self.top_n = top_n
        self.index: CentroidIndex | None = None
        self.profiles: dict[ProfileKey, ModalityProfile] = {}
        self.skipped: list = []

    @property
    def is_fitted(self) -> bool:
        return self.index is not None

    def fit(self, slides: list[SlideImage], k: int | None = None, seed: int = 0) -> "SearchEngine":
        """Encode the corpus, build per-channel profiles and the centroid index."""
        if not self.channels:
            # default to the union of multiplex channel names, first-seen order
            seen: list[str] = []
            for slide in slides:
                if slide.modality is Modality.MULTIPLEX:
                    for name in slide.channel_names:
                        if name not in seen:
                            seen.append(name)
            self.channels = seen
        records, self.skipped = encode_corpus(
            slides, self.encoder_spec, self.channels, self.patch_size, self.stride
        )
        if not records:
            raise EmptyCorpus("no patches could be encoded from the given slides")
        index = build_index(records, self.encoder_spec, k=k, seed=seed)
        self.profiles = self._profiles_from_records(records)
        self.channels = [c for c in self.channels if (Modality.MULTIPLEX, c) in self.profiles]
        self.index = index  # swap last: readers either see the old state or the new
        return self

    @classmethod
    def from_index(
        cls,
        index: CentroidIndex,
        probe: int = DEFAULT_PROBE,
        top_n: int = DEFAULT_TOP_N,
    ) -> "SearchEngine":
        """Rehydrate an engine from a persisted index (profiles are recomputed)."""
        engine = cls(
            encoder_spec=EncoderSpec.from_encoder_id(index.encoder_id),
            probe=probe,
            top_n=top_n,
        )
        engine.profiles = cls._profiles_from_records(index.records)
        seen: list[str] = []
        for rec in index.records:
            tag = rec.latent.channel_tag
            if tag is not None and tag not in seen:
                seen.append(tag)
        engine.channels = seen
        engine.index = index
        return engine

    @staticmethod
    def _profiles_from_records(records: list[CorpusRecord]) -> dict[ProfileKey, ModalityProfile]:
        groups: dict[ProfileKey, list[LatentVector]] = {}
        for rec in records:
            groups.setdefault((rec.latent.modality, rec.latent.channel_tag), []).append(rec.latent)
        return {
            key: build_profile(vs, key[0], key[1]) for key, vs in groups.items()
        }

    def search_similar(self, query_patches: list[Patch]) -> list[SlideHit]:
        """Per patch and per configured channel: correct, retrieve top-5, then vote."""
        if self.index is None:
            raise IndexNotBuilt("fit() or load an index first")
        if not query_patches:
            raise NoPatches("no query patches")
        he_profile = self.profiles.get((Modality.HE, None))
        rankings = []
        for patch in query_patches:
            q = encode_patch(patch, self.encoder_spec, Modality.HE, None)
            for channel in self.channels:
                dst = self.profiles[(Modality.MULTIPLEX, channel)]
                src = he_profile if he_profile is not None else dst
                corrected = batch_correct(q, src, dst)
                hits = self.index.query(
                    corrected, top_n=self.top_n, probe=self.probe, channel_tag=channel
                )
                if hits:
                    rankings.append(hits)
        return vote(rankings)


# -- photo-to-results pipeline (shared by the HTTP API and the CLI) ------------


@dataclass(frozen=True)
class CaptureSearchResult:
    hits: list[SlideHit]
    bbox_original: tuple[int, int, int, int]
    patch_count: int

    def to_jsonable(self) -> dict:
        return {
            "hits": [
                {
                    "slide_id": h.slide_id,
                    "voting_number": h.voting_number,
                    "per_channel_votes": h.per_channel_votes,
                }
                for h in self.hits
            ],
            "query": {
                "bbox_original": list(self.bbox_original),
                "patch_count": self.patch_count,
            },
        }


def search_photo(
    rgb: np.ndarray,
    engine: SearchEngine,
    backend: SegmentationBackend | None = None,
    patch_size: int = DEFAULT_PATCH_SIZE,
    stride: int = DEFAULT_STRIDE,
    min_tissue: float = DEFAULT_MIN_TISSUE,
) -> CaptureSearchResult:
    """Full query pipeline: preprocess, segment, extract patches, search."""
    image, transform = preprocess_capture(rgb)
    mask = segment_foreground(image, backend)
    bbox = bounding_box(mask)  # raises EmptyMask on blank captures
    patches = extract_patches(image, mask, patch_size, stride, min_tissue)
    if not patches:
        raise NoPatches("no patches met the tissue threshold")
    hits = engine.search_similar(patches)
    return CaptureSearchResult(
        hits=hits,
        bbox_original=map_to_original(bbox, transform),
        patch_count=len(patches),
    )
