"""Controlled two-candidate scenarios for ranking checks and demo heatmaps.

Each scenario walks a short trajectory whose nodes show the instruction's
object tokens in order, then offers two next-step candidates with identical
box geometry: one shows the next unseen token (extending instruction order),
the other re-shows the first token (breaking it). Matching geometry isolates
the semantic contrast, so the order-extending candidate should score higher.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .env import PanoObservation
from .scoring import nav_score
from .seeding import derive_seed
from .spectrum import CategoryStats, SosFeature, compute_sos, reference_sos


def make_box_observation(
    K: int, H: int, W: int, boxes: list[tuple[int, int, int, int, int]]
) -> PanoObservation:
    """Observation with literal boxes: (category, col0, width, row0, height)."""
    masks = np.zeros((K, H, W), dtype=np.uint8)
    for cat, col0, width, row0, height in boxes:
        cols = np.arange(col0, col0 + width) % W
        masks[cat, row0 : row0 + height, cols] = 1
    return PanoObservation(masks=masks)


@dataclass(frozen=True)
class TwoCandidateScenario:
    tokens: tuple[int, ...]
    refs: tuple[SosFeature, ...]
    prefix_features: tuple[SosFeature, ...]
    ordered_candidate: SosFeature  # shows the next unseen token
    breaking_candidate: SosFeature  # re-shows the first token
    stats: CategoryStats

    def ordered_score(self) -> float:
        return nav_score(self.refs, [*self.prefix_features, self.ordered_candidate])

    def breaking_score(self) -> float:
        return nav_score(self.refs, [*self.prefix_features, self.breaking_candidate])


def build_two_candidate_scenario(
    seed: int,
    K: int = 8,
    pano_dims: tuple[int, int] = (128, 32),
    eta: int = 32,
    n_tokens: int = 3,
) -> TwoCandidateScenario:
    W, H = pano_dims
    rng = np.random.default_rng(derive_seed(seed, "toy-scenario"))
    tokens = tuple(int(t) for t in rng.choice(K, size=n_tokens, replace=False))

    cat_width = {k: int(rng.integers(8, W // 4)) for k in range(K)}
    cat_height = {k: int(rng.integers(max(2, H // 5), max(3, H // 2))) for k in range(K)}

    def observe(cat: int, width: int, height: int) -> SosFeature:
        col0 = int(rng.integers(0, W))
        row0 = int(rng.integers(0, H - height))
        obs = make_box_observation(K, H, W, [(cat, col0, width, row0, height)])
        return compute_sos(obs, eta)

    prefix = tuple(
        observe(t, cat_width[t], cat_height[t]) for t in tokens[:-1]
    )
    # candidates share one geometry; only the category differs
    cand_w = int(rng.integers(8, W // 4))
    cand_h = int(rng.integers(max(2, H // 5), max(3, H // 2)))
    cand_col = int(rng.integers(0, W))
    cand_row = int(rng.integers(0, H - cand_h))
    ordered = compute_sos(
        make_box_observation(K, H, W, [(tokens[-1], cand_col, cand_w, cand_row, cand_h)]),
        eta,
    )
    breaking = compute_sos(
        make_box_observation(K, H, W, [(tokens[0], cand_col, cand_w, cand_row, cand_h)]),
        eta,
    )

    stats = CategoryStats(
        category_count=K,
        median_width={k: float(w) for k, w in cat_width.items()},
        median_height={k: float(h) for k, h in cat_height.items()},
        sample_count={k: 1 for k in range(K)},
    )
    refs = tuple(reference_sos(t, stats, eta, K) for t in tokens)
    return TwoCandidateScenario(
        tokens=tokens,
        refs=refs,
        prefix_features=prefix,
        ordered_candidate=ordered,
        breaking_candidate=breaking,
        stats=stats,
    )
