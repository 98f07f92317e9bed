"""Trajectory scoring against instruction references.

``nav_score`` measures how well a trajectory's feature sequence lines up
with an instruction's reference features, correlation-style: every
(reference, step) pair contributes its cosine similarity times the inner
product of the two deviations from the respective means, and the total is
normalized by sqrt(t'/B * sum ||ref dev||^2 * sum ||step dev||^2) plus a
small epsilon that pins degenerate cases (one reference, one step, constant
features) to exactly 0. Inner products and norms are over flattened feature
matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .env import EnvGraph
from .errors import EmptyInputError, NoPathError, ShapeError
from .spectrum import SosFeature

EPSILON = 1e-12


def _stack(features: Sequence[SosFeature], label: str) -> np.ndarray:
    if not features:
        raise EmptyInputError(f"{label} is empty")
    shape = features[0].shape
    for f in features:
        if f.shape != shape:
            raise ShapeError(f"{label} mixes shapes {shape} and {f.shape}")
    return np.stack([f.flat() for f in features])


def _score_parts(
    refs: Sequence[SosFeature], traj_feats: Sequence[SosFeature]
) -> tuple[float, float, float]:
    R = _stack(refs, "refs")
    S = _stack(traj_feats, "traj_feats")
    if R.shape[1] != S.shape[1]:
        raise ShapeError(
            f"reference and trajectory features disagree: {refs[0].shape} vs "
            f"{traj_feats[0].shape}"
        )
    r_dev = R - R.mean(axis=0)
    s_dev = S - S.mean(axis=0)
    r_norm = np.linalg.norm(R, axis=1)
    s_norm = np.linalg.norm(S, axis=1)
    denom = np.outer(r_norm, s_norm)
    with np.errstate(invalid="ignore", divide="ignore"):
        cos = np.where(denom > 0, (R @ S.T) / np.where(denom > 0, denom, 1.0), 0.0)
    numerator = float((cos * (r_dev @ s_dev.T)).sum())
    r_ss = float((r_dev**2).sum())
    s_ss = float((s_dev**2).sum())
    return numerator, r_ss, s_ss


def nav_score(refs: Sequence[SosFeature], traj_feats: Sequence[SosFeature]) -> float:
    """Alignment score between B reference features and t' trajectory features."""
    numerator, r_ss, s_ss = _score_parts(refs, traj_feats)
    ratio = len(traj_feats) / len(refs)
    return numerator / (math.sqrt(ratio * r_ss * s_ss) + EPSILON)


def nav_score_variants(
    refs: Sequence[SosFeature], traj_feats: Sequence[SosFeature]
) -> dict[str, float]:
    """Primary score plus the flipped-ratio variant, for debug comparison.

    The normalization uses t'/B; the B/t' reading of the same expression is
    exposed alongside so the two can be compared on real data.
    """
    numerator, r_ss, s_ss = _score_parts(refs, traj_feats)
    t, b = len(traj_feats), len(refs)
    return {
        "score": numerator / (math.sqrt(t / b * r_ss * s_ss) + EPSILON),
        "score_flipped_ratio": numerator / (math.sqrt(b / t * r_ss * s_ss) + EPSILON),
    }


def similarity_matrix(
    refs: Sequence[SosFeature], traj_feats: Sequence[SosFeature]
) -> np.ndarray:
    """(t', B) matrix of raw dot products: entry (t, j) = <ref_j, step_t>."""
    R = _stack(refs, "refs")
    S = _stack(traj_feats, "traj_feats")
    if R.shape[1] != S.shape[1]:
        raise ShapeError("reference and trajectory features disagree")
    return S @ R.T


@dataclass(frozen=True)
class ScoredTrajectory:
    """A node path with its features, score, and similarity matrix."""

    nodes: tuple[int, ...]
    features: tuple[SosFeature, ...]
    score: float
    similarities: np.ndarray

    def __post_init__(self):
        if len(self.nodes) != len(self.features):
            raise ShapeError("one feature per trajectory node required")
        if not math.isfinite(self.score):
            raise ValueError("score must be finite")


def score_trajectory(
    nodes: Sequence[int],
    refs: Sequence[SosFeature],
    traj_feats: Sequence[SosFeature],
) -> ScoredTrajectory:
    return ScoredTrajectory(
        nodes=tuple(nodes),
        features=tuple(traj_feats),
        score=nav_score(refs, traj_feats),
        similarities=similarity_matrix(refs, traj_feats),
    )


def nds(
    ref_traj: Sequence[int],
    query_traj: Sequence[int],
    env: EnvGraph,
    d_success: float,
) -> float:
    """Normalized distance sum between two node trajectories, in (0, 1].

    exp(-(sum of nearest-node geodesic distances in both directions) /
    ((|R|+|Q|)/2 * d_success)); 1.0 iff the trajectories cover the same
    nodes, decaying toward 0 as they separate.
    """
    if not ref_traj or not query_traj:
        raise EmptyInputError("both trajectories must be nonempty")
    for node in (*ref_traj, *query_traj):
        if not 0 <= node < env.node_count:
            raise KeyError(f"unknown node {node}")
    total = 0.0
    for a_nodes, b_nodes in ((ref_traj, query_traj), (query_traj, ref_traj)):
        for v in a_nodes:
            dist = env.distances_from(v)
            nearest = min(dist.get(u, math.inf) for u in b_nodes)
            if math.isinf(nearest):
                raise NoPathError(f"node {v} cannot reach the other trajectory")
            total += nearest
    scale = (len(ref_traj) + len(query_traj)) / 2.0 * d_success
    return math.exp(-total / scale)
