"""Borda-style consolidation of per-patch hit rankings into slide results."""
from __future__ import annotations

from dataclasses import dataclass

from .index import PatchHit

# rank r (1-based) contributes weight[r-1]; configurable, defaults to 5..1
DEFAULT_WEIGHTS = (5, 4, 3, 2, 1)
MAX_RESULTS = 5


@dataclass(frozen=True)
class SlideHit:
    slide_id: str
    voting_number: int
    per_channel_votes: dict[str, int]


def vote(
    per_patch_rankings: list[list[PatchHit]],
    weights: tuple[int, ...] = DEFAULT_WEIGHTS,
    max_results: int = MAX_RESULTS,
) -> list[SlideHit]:
    """Sum rank weights per slide across all rankings; top slides win.

    Each ranking contributes weights[r-1] at rank r to the hit's slide, also
    bucketed under the hit's channel tag.  Slides order by voting number
    descending, then slide id ascending.
    """
    totals: dict[str, int] = {}
    per_channel: dict[str, dict[str, int]] = {}
    for ranking in per_patch_rankings:
        for r, hit in enumerate(ranking[: len(weights)], start=1):
            w = weights[r - 1]
            totals[hit.slide_id] = totals.get(hit.slide_id, 0) + w
            channel = hit.channel_tag or ""
            bucket = per_channel.setdefault(hit.slide_id, {})
            bucket[channel] = bucket.get(channel, 0) + w
    ordered = sorted(totals.items(), key=lambda kv: (-kv[1], kv[0]))
    return [
        SlideHit(
            slide_id=sid,
            voting_number=total,
            per_channel_votes=dict(sorted(per_channel[sid].items())),
        )
        for sid, total in ordered[:max_results]
    ]
