# lib/aggregator.py
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from lib.matching import MatchContext, MatchResult, SimilaritySpec, profile_match
from lib.profiles import ProfileTree

logger = logging.getLogger(__name__)

Pair = Tuple[str, str]

# ---------------------------
# Utilities
# ---------------------------

def _loop_ranges(start_id: int, end_id: int, step: int) -> Iterable[Tuple[int, int]]:
    a = start_id
    while a <= end_id:
        b = min(a + step - 1, end_id)
        yield a, b
        a = b + 1


def _chunk_step(n: int, jobs: int) -> int:
    # a few chunks per worker keeps the pool busy when profiles differ in size
    return max(1, -(-n // (jobs * 4)))


# ---------------------------
# Chunk scoring
# ---------------------------

def _score_chunk(pairs: Sequence[Pair], trees: Dict[str, ProfileTree],
                 spec: SimilaritySpec, ctx: Optional[MatchContext]) -> List[MatchResult]:
    return [profile_match(trees[left], trees[right], spec, ctx, owner_id=left) for left, right in pairs]


def score_pairs(pairs: Sequence[Pair], trees: Dict[str, ProfileTree], spec: SimilaritySpec,
                ctx: Optional[MatchContext] = None, jobs: int = 1) -> List[MatchResult]:
    """
    Score (left, right) profile pairs; results come back in input order.

    Pairs are cut into index ranges and each range is scored in a worker
    process when jobs > 1. Every score comes from the same pure function, so
    the output does not depend on jobs.
    """
    if not pairs:
        return []
    if jobs <= 1 or len(pairs) < 2:
        return _score_chunk(pairs, trees, spec, ctx)

    step = _chunk_step(len(pairs), jobs)
    ranges = list(_loop_ranges(0, len(pairs) - 1, step))
    logger.info("scoring %d pairs in %d chunks on %d workers", len(pairs), len(ranges), jobs)
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = []
        for a, b in ranges:
            chunk = list(pairs[a:b + 1])
            needed = {pid: trees[pid] for pair in chunk for pid in pair}
            futures.append(pool.submit(_score_chunk, chunk, needed, spec, ctx))
        out: List[MatchResult] = []
        for f in futures:
            out.extend(f.result())
    return out


def score_against(target: ProfileTree, profiles: Sequence[ProfileTree], spec: SimilaritySpec,
                  ctx: Optional[MatchContext] = None, jobs: int = 1) -> List[MatchResult]:
    """Match every profile against one target (a brand page); one result per profile."""
    trees = {p.owner_id: p for p in profiles}
    trees[target.owner_id] = target
    pairs = [(p.owner_id, target.owner_id) for p in profiles]
    return score_pairs(pairs, trees, spec, ctx, jobs)
