"""Centroid index: build determinism, probing vs exhaustive scan, persistence."""
from __future__ import annotations

import numpy as np
import pytest

from mpview.embed import CorpusRecord, EncoderSpec, LatentVector
from mpview.errors import DimensionMismatch, EmptyCorpus, EncoderMismatch
from mpview.index import build_index, cosine, load_index, save_index
from mpview.model import Modality

SPEC = EncoderSpec(d=8, seed=0)


def unit(v):
    v = np.asarray(v, dtype=np.float64)
    return v / np.linalg.norm(v)


def records_from(vectors, slide_ids=None, tags=None):
    out = []
    for i, v in enumerate(vectors):
        out.append(
            CorpusRecord(
                latent=LatentVector(
                    values=np.asarray(v, dtype=np.float64),
                    modality=Modality.MULTIPLEX,
                    channel_tag=tags[i] if tags else "ch",
                ),
                slide_id=slide_ids[i] if slide_ids else f"s{i:04d}",
                origin=(0, 0),
            )
        )
    return out


def exhaustive_top(vectors, q, top_n, slide_ids=None):
    """Independent scan: score every vector, same tie rules as the index."""
    scored = [
        (float(np.dot(v, q)), slide_ids[i] if slide_ids else f"s{i:04d}", i)
        for i, v in enumerate(vectors)
    ]
    scored.sort(key=lambda t: (-t[0], t[1], t[2]))
    return [i for _, _, i in scored[:top_n]]


class TestCosine:
    def test_self_similarity(self):
        v = unit([1, 2, 3, 4, 5, 6, 7, 8])
        assert cosine(v, v) == pytest.approx(1.0, abs=1e-12)

    def test_orthogonal_basis(self):
        a = np.zeros(8)
        b = np.zeros(8)
        a[0] = 1.0
        b[3] = 1.0
        assert cosine(a, b) == 0.0

    def test_hand_value(self):
        a = np.array([1.0, 2.0, 2.0])
        b = np.array([2.0, 1.0, 2.0])
        assert cosine(a, b) == pytest.approx(8 / 9, abs=1e-15)

    def test_zero_vector_defined_as_zero(self):
        assert cosine(np.zeros(4), unit([1, 1, 1, 1])) == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            cosine(np.zeros(3), np.zeros(4))


class TestBuild:
    def test_single_latent(self):
        v = unit(np.arange(1, 9))
        index = build_index(records_from([v]), SPEC)
        assert index.k == 1
        np.testing.assert_allclose(index.centroids[0], v, atol=1e-12)
        assert index.members == [[0]]

    def test_two_antipodal_clusters_split_exactly(self):
        rng = np.random.default_rng(10)
        center = unit(rng.standard_normal(8))
        cloud_a = [unit(center + 0.05 * rng.standard_normal(8)) for _ in range(50)]
        cloud_b = [unit(-center + 0.05 * rng.standard_normal(8)) for _ in range(50)]
        index = build_index(records_from(cloud_a + cloud_b), SPEC, k=2, seed=1)
        groups = {frozenset(m) for m in index.members}
        assert groups == {frozenset(range(50)), frozenset(range(50, 100))}

    def test_rebuild_is_bit_identical(self):
        rng = np.random.default_rng(11)
        vectors = [unit(rng.standard_normal(8)) for _ in range(200)]
        a = build_index(records_from(vectors), SPEC, seed=7)
        b = build_index(records_from(vectors), SPEC, seed=7)
        np.testing.assert_array_equal(a.centroids, b.centroids)
        assert a.members == b.members

    def test_empty_corpus(self):
        with pytest.raises(EmptyCorpus):
            build_index([], SPEC)

    def test_every_latent_in_exactly_one_cluster(self):
        rng = np.random.default_rng(12)
        vectors = [unit(rng.standard_normal(8)) for _ in range(123)]
        index = build_index(records_from(vectors), SPEC, seed=3)
        flat = sorted(i for m in index.members for i in m)
        assert flat == list(range(123))

    def test_centroids_are_normalized_member_means(self):
        rng = np.random.default_rng(13)
        vectors = np.stack([unit(rng.standard_normal(8)) for _ in range(60)])
        index = build_index(records_from(vectors), SPEC, seed=5)
        for c, members in enumerate(index.members):
            mean = vectors[members].mean(axis=0)
            norm = np.linalg.norm(mean)
            expected = mean / norm if norm > 0 else np.zeros(8)
            np.testing.assert_allclose(index.centroids[c], expected, atol=1e-12)


class TestQuery:
    def test_query_equal_to_corpus_latent_is_rank_one(self):
        rng = np.random.default_rng(14)
        vectors = [unit(rng.standard_normal(8)) for _ in range(100)]
        index = build_index(records_from(vectors), SPEC, seed=2)
        hits = index.query(np.asarray(vectors[37]), top_n=5, probe=3)
        assert hits[0].latent_id == 37
        assert hits[0].score == pytest.approx(1.0, abs=1e-9)

    def test_probe_k_equals_exhaustive_100_trials(self):
        rng = np.random.default_rng(15)
        vectors = [unit(rng.standard_normal(8)) for _ in range(300)]
        index = build_index(records_from(vectors), SPEC, seed=4)
        for _ in range(100):
            q = unit(rng.standard_normal(8))
            got = [h.latent_id for h in index.query(q, top_n=5, probe=index.k)]
            assert got == exhaustive_top(vectors, q, 5)

    def test_truncation_on_small_corpus(self):
        rng = np.random.default_rng(16)
        vectors = [unit(rng.standard_normal(8)) for _ in range(3)]
        index = build_index(records_from(vectors), SPEC)
        assert len(index.query(unit(rng.standard_normal(8)), top_n=5, probe=index.k)) == 3

    def test_channel_filter(self):
        rng = np.random.default_rng(17)
        vectors = [unit(rng.standard_normal(8)) for _ in range(40)]
        tags = ["a" if i % 2 == 0 else "b" for i in range(40)]
        index = build_index(records_from(vectors, tags=tags), SPEC, seed=1)
        hits = index.query(unit(rng.standard_normal(8)), top_n=10, probe=index.k, channel_tag="a")
        assert all(h.channel_tag == "a" for h in hits)
        assert all(h.latent_id % 2 == 0 for h in hits)


class TestPersistence:
    def test_round_trip(self, tmp_path):
        rng = np.random.default_rng(18)
        vectors = [unit(rng.standard_normal(8)) for _ in range(50)]
        tags = ["a" if i < 25 else "b" for i in range(50)]
        index = build_index(records_from(vectors, tags=tags), SPEC, seed=9)
        path = str(tmp_path / "index.bin")
        save_index(index, path)
        back = load_index(path)
        np.testing.assert_array_equal(back.centroids, index.centroids)
        assert back.members == index.members
        assert back.encoder_id == index.encoder_id
        assert back.seed == index.seed
        for a, b in zip(index.records, back.records):
            np.testing.assert_array_equal(a.latent.values, b.latent.values)
            assert (a.slide_id, a.origin, a.latent.channel_tag) == (
                b.slide_id,
                b.origin,
                b.latent.channel_tag,
            )

    def test_save_is_deterministic(self, tmp_path):
        rng = np.random.default_rng(19)
        vectors = [unit(rng.standard_normal(8)) for _ in range(30)]
        index = build_index(records_from(vectors), SPEC, seed=9)
        p1, p2 = str(tmp_path / "a.bin"), str(tmp_path / "b.bin")
        save_index(index, p1)
        save_index(index, p2)
        assert open(p1, "rb").read() == open(p2, "rb").read()

    def test_encoder_mismatch_refused(self, tmp_path):
        rng = np.random.default_rng(20)
        vectors = [unit(rng.standard_normal(8)) for _ in range(10)]
        index = build_index(records_from(vectors), SPEC)
        path = str(tmp_path / "index.bin")
        save_index(index, path)
        with pytest.raises(EncoderMismatch):
            load_index(path, expected_encoder_id="refenc1-d64-s1")
        assert load_index(path, expected_encoder_id=SPEC.encoder_id).k == index.k
