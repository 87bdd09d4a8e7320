"""Slide registry and byte-budgeted channel cache.

Registration parses structure only (headers, manifests, geometry); pixel
data is decoded lazily on first channel access and kept in an LRU cache
keyed by (slide_id, channel index).  All returned planes are immutable
snapshots, safe to share across request threads.
"""
from __future__ import annotations

import threading
from collections import OrderedDict
from dataclasses import dataclass
from pathlib import Path

from .errors import ChannelOutOfRange, SizeMismatch, UnknownSlide, UnsupportedFeature
from .model import ChannelPlane, Modality, SlideImage, SlideMeta
from .rawstack import _load_manifest, parse_raw_stack, read_single_channel
from .tiff import TiffReader, parse_tiff

DEFAULT_CACHE_BUDGET = 1 << 30  # 1 GiB


@dataclass
class CacheStats:
    hits: int = 0
    misses: int = 0
    evictions: int = 0
    bypasses: int = 0


class ChannelCache:
    """LRU over decoded planes; total resident bytes never exceed the budget."""

    def __init__(self, budget_bytes: int = DEFAULT_CACHE_BUDGET):
        if budget_bytes <= 0:
            raise ValueError("budget_bytes must be positive")
        self.budget_bytes = budget_bytes
        self._resident: OrderedDict[tuple[str, int], ChannelPlane] = OrderedDict()
        self._current_bytes = 0
        self._lock = threading.Lock()
        self.stats = CacheStats()

    @property
    def current_bytes(self) -> int:
        return self._current_bytes

    def __len__(self) -> int:
        return len(self._resident)

    def get(self, key: tuple[str, int]) -> ChannelPlane | None:
        with self._lock:
            plane = self._resident.get(key)
            if plane is None:
                self.stats.misses += 1
                return None
            self._resident.move_to_end(key)
            self.stats.hits += 1
            return plane

    def put(self, key: tuple[str, int], plane: ChannelPlane) -> bool:
        """Insert and evict LRU entries until the budget holds.

        Returns False (and caches nothing) when the plane alone exceeds the
        budget; the caller serves it uncached.
        """
        if plane.nbytes > self.budget_bytes:
            with self._lock:
                self.stats.bypasses += 1
            return False
        with self._lock:
            old = self._resident.pop(key, None)
            if old is not None:
                self._current_bytes -= old.nbytes
            self._resident[key] = plane
            self._current_bytes += plane.nbytes
            while self._current_bytes > self.budget_bytes:
                _, evicted = self._resident.popitem(last=False)
                self._current_bytes -= evicted.nbytes
                self.stats.evictions += 1
        return True

    def drop_slide(self, slide_id: str) -> None:
        with self._lock:
            for key in [k for k in self._resident if k[0] == slide_id]:
                self._current_bytes -= self._resident.pop(key).nbytes


class SlideRegistry:
    """Insertion-ordered slide metadata, unique ids via stem suffixing."""

    def __init__(self):
        self._entries: dict[str, SlideMeta] = {}
        self._lock = threading.Lock()

    def unique_id(self, stem: str) -> str:
        with self._lock:
            if stem not in self._entries:
                return stem
            n = 2
            while f"{stem}-{n}" in self._entries:
                n += 1
            return f"{stem}-{n}"

    def add(self, meta: SlideMeta) -> None:
        with self._lock:
            if meta.slide_id in self._entries:
                raise ValueError(f"slide id already registered: {meta.slide_id}")
            self._entries[meta.slide_id] = meta

    def get(self, slide_id: str) -> SlideMeta:
        with self._lock:
            meta = self._entries.get(slide_id)
        if meta is None:
            raise UnknownSlide(slide_id)
        return meta

    def list(self) -> list[SlideMeta]:
        with self._lock:
            return list(self._entries.values())

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, slide_id: str) -> bool:
        return slide_id in self._entries


@dataclass(frozen=True)
class FetchResult:
    plane: ChannelPlane
    cache_hit: bool
    bypassed: bool = False  # plane alone exceeded the cache budget


def _probe(path: Path, slide_id: str) -> SlideMeta:
    """Parse structure (no pixel decode) and build registry metadata."""
    if path.is_dir():
        manifest = _load_manifest(path)
        width, height = int(manifest["width"]), int(manifest["height"])
        bit_depth = int(manifest["bit_depth"])
        expected = width * height * (bit_depth // 8)
        for ch in manifest["channels"]:
            actual = (path / ch["file"]).stat().st_size
            if actual != expected:
                raise SizeMismatch(f"{ch['file']}: {actual} bytes, expected {expected}")
        return SlideMeta(
            slide_id=slide_id,
            channel_names=tuple(ch["name"] for ch in manifest["channels"]),
            width=width,
            height=height,
            bit_depth=bit_depth,
            modality=Modality(manifest["modality"]),
            source_path=str(path),
        )
    if path.suffix.lower() in (".tif", ".tiff"):
        reader = TiffReader(path.read_bytes())
        names = reader.channel_names()
        modality = Modality.HE if names == ["R", "G", "B"] else Modality.MULTIPLEX
        return SlideMeta(
            slide_id=slide_id,
            channel_names=tuple(names),
            width=reader.width,
            height=reader.height,
            bit_depth=reader.bit_depth,
            modality=modality,
            source_path=str(path),
        )
    raise UnsupportedFeature(f"{path}: not a .tif/.tiff file or raw-stack directory")


class SlideStore:
    """Registry + cache with lazy channel decoding."""

    def __init__(self, cache_budget_bytes: int = DEFAULT_CACHE_BUDGET):
        self.registry = SlideRegistry()
        self.cache = ChannelCache(cache_budget_bytes)

    def ingest(self, path: str | Path) -> str:
        path = Path(path)
        stem = path.name if path.is_dir() else path.stem
        slide_id = self.registry.unique_id(stem)
        meta = _probe(path, slide_id)  # raises before anything is registered
        self.registry.add(meta)
        return slide_id

    def channel_names(self, slide_id: str) -> list[str]:
        return list(self.registry.get(slide_id).channel_names)

    def get_channel(self, slide_id: str, n: int) -> FetchResult:
        meta = self.registry.get(slide_id)
        if not 0 <= n < len(meta.channel_names):
            raise ChannelOutOfRange(f"{slide_id} has {len(meta.channel_names)} channels, asked for {n}")
        key = (slide_id, n)
        plane = self.cache.get(key)
        if plane is not None:
            return FetchResult(plane, cache_hit=True)
        plane = self._decode_channel(meta, n)
        cached = self.cache.put(key, plane)
        return FetchResult(plane, cache_hit=False, bypassed=not cached)

    def load_slide(self, slide_id: str) -> SlideImage:
        """Full decode of all channels; used for corpus encoding, not cached."""
        meta = self.registry.get(slide_id)
        path = Path(meta.source_path)
        if path.is_dir():
            return parse_raw_stack(path, slide_id=slide_id)
        return parse_tiff(path.read_bytes(), slide_id=slide_id, source_path=str(path))

    @staticmethod
    def _decode_channel(meta: SlideMeta, n: int) -> ChannelPlane:
        path = Path(meta.source_path)
        if path.is_dir():
            return read_single_channel(path, n)
        return TiffReader(path.read_bytes()).decode_plane(n)
