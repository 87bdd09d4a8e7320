"""Centroid-probed cosine search over a latent corpus.

Build: seeded k-means++ initialization, Lloyd iterations assigning by max
cosine, centroids recomputed as normalized member means, empty clusters
refilled with the globally worst-fitting point.  Every tie has a defined
winner, so the same seed and corpus always produce the same index.

Query: rank centroids by cosine to the query, exhaustively score members
of the top `probe` clusters, return the best `top_n`.
"""
from __future__ import annotations

import math
import struct
from dataclasses import dataclass

import numpy as np

from .embed import CorpusRecord, EncoderSpec, LatentVector
from .errors import DimensionMismatch, EmptyCorpus, EmptyIndex, EncoderMismatch, IndexFileInvalid
from .rng import DeterministicRng

MAX_KMEANS_ITERS = 25
DEFAULT_PROBE = 3
DEFAULT_TOP_N = 5

INDEX_MAGIC = b"MPIRIDX1"


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """dot/(|a||b|); 0 when either vector is zero."""
    if a.shape != b.shape:
        raise DimensionMismatch(f"{a.shape} vs {b.shape}")
    na = float(np.linalg.norm(a))
    nb = float(np.linalg.norm(b))
    if na == 0.0 or nb == 0.0:
        return 0.0
    return float(np.dot(a, b) / (na * nb))


@dataclass(frozen=True)
class PatchHit:
    latent_id: int
    slide_id: str
    channel_tag: str | None
    origin: tuple[int, int]
    score: float


class CentroidIndex:
    """k centroids + member lists over the corpus; queries never mutate it."""

    def __init__(
        self,
        centroids: np.ndarray,
        members: list[list[int]],
        records: list[CorpusRecord],
        encoder_id: str,
        seed: int,
    ):
        self.centroids = centroids
        self.members = members
        self.records = records
        self.encoder_id = encoder_id
        self.seed = seed
        self._matrix = np.stack([r.latent.values for r in records])
        self._tags = [r.latent.channel_tag for r in records]

    @property
    def k(self) -> int:
        return self.centroids.shape[0]

    @property
    def d(self) -> int:
        return self.centroids.shape[1]

    def __len__(self) -> int:
        return len(self.records)

    def query(
        self,
        q: LatentVector | np.ndarray,
        top_n: int = DEFAULT_TOP_N,
        probe: int = DEFAULT_PROBE,
        channel_tag: str | None = None,
    ) -> list[PatchHit]:
        """Top `top_n` corpus hits by cosine, probing the `probe` nearest clusters.

        With `channel_tag` set, only latents carrying that tag are scored.
        """
        qv = q.values if isinstance(q, LatentVector) else np.asarray(q, dtype=np.float64)
        if len(self.records) == 0:
            raise EmptyIndex("index has no latents")
        if qv.shape[0] != self.d:
            raise DimensionMismatch(f"query dim {qv.shape[0]}, index dim {self.d}")
        probe = max(1, min(probe, self.k))
        centroid_scores = self.centroids @ qv
        order = np.argsort(-centroid_scores, kind="stable")[:probe]
        candidates = [i for c in order for i in self.members[c]]
        if channel_tag is not None:
            candidates = [i for i in candidates if self._tags[i] == channel_tag]
        if not candidates:
            return []
        scores = self._matrix[candidates] @ qv
        hits = [
            PatchHit(
                latent_id=i,
                slide_id=self.records[i].slide_id,
                channel_tag=self.records[i].latent.channel_tag,
                origin=self.records[i].origin,
                score=float(s),
            )
            for i, s in zip(candidates, scores)
        ]
        hits.sort(key=lambda h: (-h.score, h.slide_id, h.latent_id))
        return hits[:top_n]


def _kmeans_pp_init(matrix: np.ndarray, k: int, rng: DeterministicRng) -> np.ndarray:
    """k-means++ seeding with squared chord distance 2(1 - cos) as the weight."""
    n = matrix.shape[0]
    chosen = [rng.randint(n)]
    d2 = np.maximum(2.0 - 2.0 * (matrix @ matrix[chosen[0]]), 0.0)
    for _ in range(k - 1):
        total = float(d2.sum())
        idx = rng.choice_weighted(d2) if total > 0.0 else rng.randint(n)
        chosen.append(idx)
        d2 = np.minimum(d2, np.maximum(2.0 - 2.0 * (matrix @ matrix[idx]), 0.0))
    return matrix[chosen].copy()


def _refill_empty_clusters(assign: np.ndarray, own_score: np.ndarray, k: int) -> None:
    """Give each empty cluster the point least similar to its current centroid."""
    counts = np.bincount(assign, minlength=k)
    moved: set[int] = set()
    for cluster in range(k):
        if counts[cluster] > 0:
            continue
        order = np.argsort(own_score, kind="stable")
        for cand in order:
            cand = int(cand)
            if cand in moved or counts[assign[cand]] <= 1:
                continue
            counts[assign[cand]] -= 1
            assign[cand] = cluster
            counts[cluster] = 1
            moved.add(cand)
            break


def build_index(
    records: list[CorpusRecord],
    encoder_spec: EncoderSpec,
    k: int | None = None,
    seed: int = 0,
) -> CentroidIndex:
    """Cluster the corpus; k defaults to ceil(sqrt(N))."""
    n = len(records)
    if n == 0:
        raise EmptyCorpus("cannot index an empty corpus")
    matrix = np.stack([r.latent.values for r in records])
    if k is None:
        k = math.ceil(math.sqrt(n))
    k = max(1, min(k, n))
    rng = DeterministicRng(seed)
    centroids = _kmeans_pp_init(matrix, k, rng)
    prev_assign: np.ndarray | None = None
    for _ in range(MAX_KMEANS_ITERS):
        scores = matrix @ centroids.T
        assign = np.argmax(scores, axis=1)  # ties resolve to the lowest centroid id
        own_score = scores[np.arange(n), assign]
        _refill_empty_clusters(assign, own_score, k)
        if prev_assign is not None and np.array_equal(assign, prev_assign):
            break
        prev_assign = assign
        for c in range(k):
            sel = matrix[assign == c]
            mean = sel.mean(axis=0)
            norm = float(np.linalg.norm(mean))
            centroids[c] = mean / norm if norm > 0.0 else 0.0
    members = [sorted(np.flatnonzero(prev_assign == c).tolist()) for c in range(k)]
    return CentroidIndex(centroids, members, records, encoder_spec.encoder_id, seed)


# -- persistence ---------------------------------------------------------------


def save_index(index: CentroidIndex, path: str) -> None:
    out = bytearray()
    out += INDEX_MAGIC
    enc = index.encoder_id.encode("utf-8")
    out += struct.pack("<I", len(enc))
    out += enc
    out += struct.pack("<IIQQ", index.d, index.k, len(index.records), index.seed)
    out += index.centroids.astype("<f8").tobytes()
    for member_list in index.members:
        out += struct.pack("<I", len(member_list))
        out += np.asarray(member_list, dtype="<u4").tobytes()
    for rec in index.records:
        out += rec.latent.values.astype("<f8").tobytes()
        for s in (rec.slide_id, rec.latent.channel_tag or "", f"{rec.origin[0]},{rec.origin[1]}"):
            raw = s.encode("utf-8")
            out += struct.pack("<I", len(raw))
            out += raw
    with open(path, "wb") as fh:
        fh.write(out)


def load_index(path: str, expected_encoder_id: str | None = None) -> CentroidIndex:
    from .model import Modality

    data = open(path, "rb").read()
    if data[:8] != INDEX_MAGIC:
        raise IndexFileInvalid(f"{path}: bad magic")
    pos = 8
    (enc_len,) = struct.unpack_from("<I", data, pos)
    pos += 4
    encoder_id = data[pos : pos + enc_len].decode("utf-8")
    pos += enc_len
    if expected_encoder_id is not None and encoder_id != expected_encoder_id:
        raise EncoderMismatch(f"index built with {encoder_id}, expected {expected_encoder_id}")
    d, k, n, seed = struct.unpack_from("<IIQQ", data, pos)
    pos += struct.calcsize("<IIQQ")
    centroids = np.frombuffer(data, dtype="<f8", count=k * d, offset=pos).astype(np.float64)
    centroids = centroids.reshape(k, d)
    pos += 8 * k * d
    members: list[list[int]] = []
    for _ in range(k):
        (m,) = struct.unpack_from("<I", data, pos)
        pos += 4
        members.append(np.frombuffer(data, dtype="<u4", count=m, offset=pos).astype(int).tolist())
        pos += 4 * m
    records: list[CorpusRecord] = []
    for _ in range(n):
        values = np.frombuffer(data, dtype="<f8", count=d, offset=pos).astype(np.float64)
        values.flags.writeable = False
        pos += 8 * d
        fields = []
        for _ in range(3):
            (ln,) = struct.unpack_from("<I", data, pos)
            pos += 4
            fields.append(data[pos : pos + ln].decode("utf-8"))
            pos += ln
        slide_id, tag, origin_s = fields
        x_s, y_s = origin_s.split(",")
        latent = LatentVector(
            values=values,
            modality=Modality.MULTIPLEX if tag else Modality.HE,
            channel_tag=tag or None,
        )
        records.append(CorpusRecord(latent=latent, slide_id=slide_id, origin=(int(x_s), int(y_s))))
    return CentroidIndex(centroids, members, records, encoder_id, seed)
