"""Trajectory augmentation: detour demonstrations and perturbed path sets.

Detour demos annotate each visited node with a mode label (1 on the
reference path, 0 off it) for selector supervision. Augmented sets mix the
reference path, random prefixes, random walks, and detoured paths so the
score-vs-trajectory-quality study sees both faithful and degraded samples.
"""

from __future__ import annotations

import numpy as np

from .env import EnvGraph, Episode, save_episodes
from .errors import ConfigurationError
from .seeding import derive_seed

DEFAULT_MAX_HOPS = 15


def generate_detour_demo(
    env: EnvGraph,
    episode: Episode,
    seed: int,
    detour_rate: float,
    depth: int = 1,
) -> list[tuple[int, int]]:
    """Walk the reference path, stochastically inserting out-and-back detours.

    At each path node, with probability ``detour_rate``, step to up to
    ``depth`` successive off-path neighbors and retrace back. Labels are 1
    for nodes on the reference path and 0 for detour nodes. Nodes with no
    off-path neighbor skip their detour.
    """
    if not 0.0 <= detour_rate <= 1.0:
        raise ConfigurationError(f"detour_rate must be in [0, 1], got {detour_rate}")
    if depth < 1:
        raise ConfigurationError(f"depth must be >= 1, got {depth}")
    rng = np.random.default_rng(derive_seed(seed, "detour", episode.episode_id))
    on_path = set(episode.gt_path)
    labeled: list[tuple[int, int]] = []
    for node in episode.gt_path:
        labeled.append((node, 1))
        if rng.random() >= detour_rate:
            continue
        excursion: list[int] = []
        here = node
        for _ in range(depth):
            off = [n for n in env.neighbors(here) if n not in on_path and n not in excursion]
            if not off:
                break
            here = int(off[rng.integers(len(off))])
            excursion.append(here)
        for out in excursion:
            labeled.append((out, 0))
        for back in reversed(excursion[:-1]):
            labeled.append((back, 0))
        if excursion:
            labeled.append((node, 1))
    return labeled


def _random_walk(env: EnvGraph, start: int, hops: int, rng: np.random.Generator) -> list[int]:
    walk = [start]
    for _ in range(hops):
        nbrs = env.neighbors(walk[-1])
        walk.append(int(nbrs[rng.integers(len(nbrs))]))
    return walk


def augment_trajectories(
    env: EnvGraph,
    episodes: list[Episode],
    seed: int,
    per_episode: int,
    max_hops: int = DEFAULT_MAX_HOPS,
) -> list[list[int]]:
    """Perturbed trajectory set; the first sample per episode is the reference
    path itself, so the output always contains maximal-quality samples."""
    if per_episode < 1:
        raise ConfigurationError(f"per_episode must be >= 1, got {per_episode}")
    if max_hops < 1:
        raise ConfigurationError(f"max_hops must be >= 1, got {max_hops}")
    out: list[list[int]] = []
    for episode in episodes:
        rng = np.random.default_rng(derive_seed(seed, "augment", episode.episode_id))
        gt = list(episode.gt_path)
        for j in range(per_episode):
            if j == 0:
                traj = gt
            else:
                kind = int(rng.integers(3))
                if kind == 0:  # random prefix of the reference path
                    traj = gt[: int(rng.integers(1, len(gt) + 1))]
                elif kind == 1:  # random walk from the start node
                    traj = _random_walk(
                        env, episode.start, int(rng.integers(1, max_hops)), rng
                    )
                else:  # reference path with detours
                    demo = generate_detour_demo(
                        env,
                        episode,
                        int(rng.integers(2**32)),
                        detour_rate=float(rng.uniform(0.2, 0.7)),
                    )
                    traj = [node for node, _label in demo]
            out.append(traj[:max_hops])
    return out


def expand_prefixes(traj: list[int]) -> list[list[int]]:
    """All prefixes of ``traj`` in increasing length order."""
    if not traj:
        raise ConfigurationError("cannot expand an empty trajectory")
    return [traj[: i + 1] for i in range(len(traj))]


def save_augmented_set(
    path: str,
    env: EnvGraph,
    episodes: list[Episode],
    trajectories: list[list[int]],
    per_episode: int,
) -> None:
    """Write an augmented trajectory set in the episode file format.

    Each trajectory becomes an entry whose path is the trajectory itself,
    inheriting the parent episode's instruction; the document carries the
    ``augmented: true`` marker so loaders do not mistake these for
    shortest-path episodes.
    """
    entries = []
    idx = 0
    for episode in episodes:
        for j in range(per_episode):
            traj = trajectories[idx]
            idx += 1
            entries.append(
                Episode(
                    episode_id=f"{episode.episode_id}-aug{j}",
                    env_id=env.env_id,
                    start=traj[0],
                    goal=traj[-1],
                    instruction=episode.instruction,
                    gt_path=tuple(traj),
                    d_success=episode.d_success,
                    max_steps=episode.max_steps,
                )
            )
    save_episodes(path, env.env_id, entries, augmented=True)
