"""Rank-weighted vote consolidation."""
from __future__ import annotations

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from mpview.index import PatchHit
from mpview.voting import vote


def ranking(*slide_ids, channel="ch"):
    return [
        PatchHit(latent_id=i, slide_id=s, channel_tag=channel, origin=(0, 0), score=1.0 - 0.1 * i)
        for i, s in enumerate(slide_ids)
    ]


def test_single_ranking_weights():
    hits = vote([ranking("A", "B", "C", "D", "E")])
    assert [(h.slide_id, h.voting_number) for h in hits] == [
        ("A", 5),
        ("B", 4),
        ("C", 3),
        ("D", 2),
        ("E", 1),
    ]


def test_two_ballot_tie_resolved_by_id():
    hits = vote([ranking("A", "B"), ranking("B", "A")])
    assert [(h.slide_id, h.voting_number) for h in hits] == [("A", 9), ("B", 9)]


def test_at_most_five_slides_returned():
    rankings = [ranking(f"s{i}") for i in range(9)]
    hits = vote(rankings)
    assert len(hits) == 5


def test_per_channel_votes_accumulate_and_sum():
    rankings = [
        ranking("A", "B", channel="CD3"),
        ranking("A", channel="CD8"),
    ]
    hits = vote(rankings)
    a = next(h for h in hits if h.slide_id == "A")
    assert a.per_channel_votes == {"CD3": 5, "CD8": 5}
    assert a.voting_number == sum(a.per_channel_votes.values()) == 10


def test_empty_input_empty_output():
    assert vote([]) == []


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), extra_len=st.integers(1, 5))
def test_monotonicity_adding_x_only_ranking(seed, extra_len):
    rng = np.random.default_rng(seed)
    base = [
        ranking(*[f"s{rng.integers(0, 8)}" for _ in range(rng.integers(1, 6))])
        for _ in range(rng.integers(0, 5))
    ]
    before = {h.slide_id: h.voting_number for h in vote(base, max_results=100)}
    extended = base + [ranking(*(["X"] * extra_len))]
    after = {h.slide_id: h.voting_number for h in vote(extended, max_results=100)}
    assert after.get("X", 0) > before.get("X", 0)
    for sid, score in before.items():
        if sid != "X":
            assert after[sid] == score


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000))
def test_voting_number_equals_channel_sum(seed):
    rng = np.random.default_rng(seed)
    rankings = []
    for _ in range(rng.integers(1, 8)):
        n = int(rng.integers(1, 6))
        rankings.append(
            [
                PatchHit(
                    latent_id=int(rng.integers(0, 100)),
                    slide_id=f"s{rng.integers(0, 6)}",
                    channel_tag=f"ch{rng.integers(0, 3)}",
                    origin=(0, 0),
                    score=float(rng.random()),
                )
                for _ in range(n)
            ]
        )
    for hit in vote(rankings):
        assert hit.voting_number == sum(hit.per_channel_votes.values())
