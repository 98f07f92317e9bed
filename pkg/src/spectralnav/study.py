"""Score-vs-trajectory-quality study.

For an augmented, prefix-expanded trajectory set, pair each trajectory's
alignment score with its normalized distance sum against the episode's
reference path, and report the Spearman rank correlation of the two.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats as scipy_stats

from .augment import augment_trajectories, expand_prefixes
from .controller import env_category_stats, node_feature
from .env import EnvGraph, Episode
from .errors import EmptyInputError
from .scoring import nav_score, nds
from .spectrum import reference_sos


@dataclass(frozen=True)
class StudyPoint:
    episode_id: str
    length: int
    score: float
    nds: float


def score_nds_points(
    env: EnvGraph,
    episodes: list[Episode],
    seed: int,
    per_episode: int,
    max_hops: int = 15,
    eta: int = 64,
) -> list[StudyPoint]:
    """(score, nds) pairs over the augmented + prefix-expanded set."""
    stats = env_category_stats(env)
    points: list[StudyPoint] = []
    trajectories = augment_trajectories(env, episodes, seed, per_episode, max_hops)
    idx = 0
    for episode in episodes:
        refs = [
            reference_sos(tok, stats, eta, env.category_count)
            for tok in episode.instruction.tokens
        ]
        for _ in range(per_episode):
            base = trajectories[idx]
            idx += 1
            for prefix in expand_prefixes(base):
                feats = [node_feature(env, n, eta) for n in prefix]
                points.append(
                    StudyPoint(
                        episode_id=episode.episode_id,
                        length=len(prefix),
                        score=nav_score(refs, feats),
                        nds=nds(episode.gt_path, prefix, env, episode.d_success),
                    )
                )
    return points


def spearman_rho(x: list[float], y: list[float]) -> float:
    """Spearman rank correlation of two equal-length samples."""
    if not x or len(x) != len(y):
        raise EmptyInputError("need two equal-length nonempty samples")
    rho = scipy_stats.spearmanr(np.asarray(x), np.asarray(y)).statistic
    return float(rho)
