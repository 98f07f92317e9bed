"""Hierarchical explore/exploit control loop.

The agent explores until the mode selector reports the trajectory has gone
regretful (probability to explore < 0.5), then picks a local goal among
frontier candidates, walks the planned path to it, and resumes exploring.
The run stops when the current node's spectral signature for the target
category matches the target's reference profile above a threshold, or when
the step budget runs out. Success requires an explicit stop within the
episode's success radius.

Selector and policy implementations are deliberately non-learned stand-ins
behind the same contracts: the oracle selector reproduces ground-truth mode
labels (explore exactly when the current node lies on the reference path),
and score-trend flips to exploitation after the trajectory score stalls.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from . import storage
from .env import EnvGraph, Episode
from .errors import ConfigurationError, ControlError
from .metrics import EpisodeResult
from .scoring import nav_score
from .seeding import derive_seed
from .spectrum import (
    CategoryStats,
    SosFeature,
    collect_category_stats,
    compute_sos,
    cosine_of_vectors,
    reference_row_profile,
    reference_sos,
)
from .topomap import TopoMap

CONFIG_SCHEMA = "spectralnav/config"

MODE_SELECTORS = ("oracle", "score_trend")
EXPLORE_POLICIES = ("greedy_sos", "random", "oracle", "noisy_oracle")
EXPLOIT_POLICIES = ("spectral", "spatial", "homing", "random", "oracle")

MODE_EXPLORE = "explore"
MODE_EXPLOIT = "exploit"

# Calibrated floor for "the target's spectral row looks like its reference":
# observed box spectra never reach cosine ~0.8 against the sinc profile (the
# measured ceiling is ~0.37), while invisible targets give exactly 0, so the
# default sits safely inside the gap.
DEFAULT_STOP_THRESHOLD = 0.1


@dataclass(frozen=True)
class PolicyConfig:
    mode_selector: str = "oracle"
    patience: int = 2
    explore_policy: str = "greedy_sos"
    p_err: float = 0.0
    exploit_policy: str = "spectral"
    stop_threshold: float = DEFAULT_STOP_THRESHOLD
    eta: int = 64
    seed: int = 0

    def validate(self) -> None:
        if self.mode_selector not in MODE_SELECTORS:
            raise ConfigurationError(
                f"unknown mode_selector {self.mode_selector!r}; "
                f"valid: {', '.join(MODE_SELECTORS)}"
            )
        if self.explore_policy not in EXPLORE_POLICIES:
            raise ConfigurationError(
                f"unknown explore_policy {self.explore_policy!r}; "
                f"valid: {', '.join(EXPLORE_POLICIES)}"
            )
        if self.exploit_policy not in EXPLOIT_POLICIES:
            raise ConfigurationError(
                f"unknown exploit_policy {self.exploit_policy!r}; "
                f"valid: {', '.join(EXPLOIT_POLICIES)}"
            )
        if not 0.0 <= self.p_err <= 1.0:
            raise ConfigurationError(f"p_err must be in [0, 1], got {self.p_err}")
        if self.patience < 1:
            raise ConfigurationError(f"patience must be >= 1, got {self.patience}")
        if self.eta < 1:
            raise ConfigurationError(f"eta must be >= 1, got {self.eta}")

    def to_doc(self) -> dict:
        return {
            "schema": CONFIG_SCHEMA,
            "schema_version": storage.SCHEMA_VERSION,
            "mode_selector": self.mode_selector,
            "patience": self.patience,
            "explore_policy": self.explore_policy,
            "p_err": self.p_err,
            "exploit_policy": self.exploit_policy,
            "stop_threshold": self.stop_threshold,
            "eta": self.eta,
            "seed": self.seed,
        }

    @classmethod
    def from_doc(cls, doc: dict) -> "PolicyConfig":
        storage.check_schema(doc, CONFIG_SCHEMA)
        cfg = cls(
            mode_selector=str(doc.get("mode_selector", "oracle")),
            patience=int(doc.get("patience", 2)),
            explore_policy=str(doc.get("explore_policy", "greedy_sos")),
            p_err=float(doc.get("p_err", 0.0)),
            exploit_policy=str(doc.get("exploit_policy", "spectral")),
            stop_threshold=float(doc.get("stop_threshold", DEFAULT_STOP_THRESHOLD)),
            eta=int(doc.get("eta", 64)),
            seed=int(doc.get("seed", 0)),
        )
        cfg.validate()
        return cfg


def load_config(path: str) -> PolicyConfig:
    return PolicyConfig.from_doc(storage.read_document(path, CONFIG_SCHEMA))


def save_config(path: str, cfg: PolicyConfig) -> None:
    storage.write_document(path, cfg.to_doc())


@dataclass
class ControllerState:
    env: EnvGraph
    episode: Episode
    map: TopoMap
    rng: np.random.Generator
    refs: tuple[SosFeature, ...]
    stats: CategoryStats
    current: int
    t: int = 0
    trajectory: list[int] = field(default_factory=list)
    modes: list[str] = field(default_factory=list)
    score_history: list[float] = field(default_factory=list)
    trend_base: int = 0  # score_history index where the current explore phase began
    P_explore: float = 1.0
    mode: str = MODE_EXPLORE
    pending_path: list[int] = field(default_factory=list)


def node_feature(env: EnvGraph, node: int, eta: int) -> SosFeature:
    key = ("sos", node, eta)
    if key not in env._memo:
        env._memo[key] = compute_sos(env.observation(node), eta)
    return env._memo[key]


def env_category_stats(env: EnvGraph) -> CategoryStats:
    if "stats" not in env._memo:
        env._memo["stats"] = collect_category_stats(env)
    return env._memo["stats"]


def _observed_neighbors(state: ControllerState, node: int):
    env, eta = state.env, state.refs[0].shape[1]
    return [
        (n, env.positions[n], node_feature(env, n, eta))
        for n in env.neighbors(node)
    ]


def initialize_state(env: EnvGraph, episode: Episode, cfg: PolicyConfig) -> ControllerState:
    stats = env_category_stats(env)
    refs = tuple(
        reference_sos(tok, stats, cfg.eta, env.category_count)
        for tok in episode.instruction.tokens
    )
    state = ControllerState(
        env=env,
        episode=episode,
        map=TopoMap(),
        rng=np.random.default_rng(derive_seed(cfg.seed, episode.episode_id)),
        refs=refs,
        stats=stats,
        current=episode.start,
    )
    start = episode.start
    state.map.update(
        start,
        _observed_neighbors(state, start),
        t=0,
        position=env.positions[start],
        feature=node_feature(env, start, cfg.eta),
    )
    state.trajectory = [start]
    state.score_history = [_prefix_score(state)]
    return state


def _prefix_score(state: ControllerState) -> float:
    feats = [state.map.node_features[n] for n in state.trajectory]
    return nav_score(state.refs, feats)


def _move(state: ControllerState, node: int, mode_label: str) -> None:
    if node not in state.map.adjacency.get(state.current, {}):
        raise ControlError(f"cannot step from {state.current} to non-adjacent {node}")
    state.t += 1
    state.current = node
    state.map.update(node, _observed_neighbors(state, node), t=state.t)
    state.trajectory.append(node)
    state.modes.append(mode_label)
    state.score_history.append(_prefix_score(state))


# ---------------- mode selection ----------------


def select_mode(state: ControllerState, cfg: PolicyConfig) -> float:
    """Probability to explore; >= 0.5 keeps exploring, below triggers exploitation."""
    if state.t == 0:
        return 1.0
    if cfg.mode_selector == "oracle":
        return 1.0 if state.current in set(state.episode.gt_path) else 0.0
    scores = state.score_history[state.trend_base :]
    streak = 0
    for prev, cur in zip(scores, scores[1:]):
        streak = streak + 1 if cur <= prev else 0
    return 0.0 if streak >= cfg.patience else 1.0


# ---------------- exploration ----------------


def _least_recently_visited(state: ControllerState, neighbors: list[int]) -> int:
    return min(neighbors, key=lambda n: (state.map.visited.get(n, -1), n))


def _oracle_explore_choice(state: ControllerState) -> int:
    env, episode = state.env, state.episode
    if state.current == episode.goal:
        return _least_recently_visited(state, env.neighbors(state.current))
    return env.shortest_path(state.current, episode.goal)[1]


def explore_step(state: ControllerState, cfg: PolicyConfig) -> int:
    """Next node under the exploration policy; visited nodes are masked out."""
    neighbors = sorted(state.map.adjacency.get(state.current, {}))
    if not neighbors:
        raise ControlError(f"node {state.current} has no neighbors")
    if cfg.explore_policy == "oracle":
        return _oracle_explore_choice(state)
    if cfg.explore_policy == "noisy_oracle":
        choice = _oracle_explore_choice(state)
        wrong = [n for n in neighbors if n != choice]
        if wrong and state.rng.random() < cfg.p_err:
            return int(wrong[state.rng.integers(len(wrong))])
        return choice

    unvisited = [n for n in neighbors if n not in state.map.visited]
    if not unvisited:
        return _least_recently_visited(state, neighbors)
    if cfg.explore_policy == "random":
        return int(unvisited[state.rng.integers(len(unvisited))])
    # greedy_sos: extend the trajectory features with each candidate's
    traj_feats = [state.map.node_features[n] for n in state.trajectory]
    best, best_score = None, -np.inf
    for n in unvisited:
        score = nav_score(state.refs, traj_feats + [state.map.node_features[n]])
        if score > best_score:
            best, best_score = n, score
    return best


# ---------------- exploitation ----------------


def _homing_target(state: ControllerState) -> Optional[int]:
    """Visited trajectory node with the best score prefix, excluding here."""
    best, best_score = None, -np.inf
    for i, node in enumerate(state.trajectory):
        if node == state.current:
            continue
        if state.score_history[i] > best_score:
            best, best_score = node, state.score_history[i]
    return best


def local_goal_search(state: ControllerState, cfg: PolicyConfig) -> Optional[int]:
    """Local goal for exploitation, or None when no move is available.

    Frontier nodes never previously chosen form the candidate pool; when it
    is empty the search falls back to the homing target, and when that also
    fails the caller must stop.
    """
    if cfg.exploit_policy == "homing":
        return _homing_target(state)
    candidates = state.map.frontier_candidates()
    if not candidates:
        return _homing_target(state)
    if len(candidates) == 1:
        return candidates[0]
    if cfg.exploit_policy == "random":
        return int(candidates[state.rng.integers(len(candidates))])
    if cfg.exploit_policy == "oracle":
        return min(
            candidates, key=lambda c: (state.env.geodesic_distance(c, state.episode.goal), c)
        )
    if cfg.exploit_policy == "spatial":
        K = state.env.category_count
        bag = np.bincount(state.episode.instruction.tokens, minlength=K).astype(float)
        best, best_score = None, -np.inf
        for c in candidates:
            hist = state.env.observation(c).pixel_counts().astype(float)
            score = cosine_of_vectors(hist, bag)
            if score > best_score:
                best, best_score = c, score
        return best
    # spectral: score the corrected trajectory from the episode start
    best, best_score = None, -np.inf
    for c in candidates:
        path, _ = state.map.shortest_path(state.episode.start, c)
        feats = [state.map.node_features[n] for n in path]
        score = nav_score(state.refs, feats)
        if score > best_score:
            best, best_score = c, score
    return best


# ---------------- stop rule and episode loop ----------------


def stop_similarity(state: ControllerState, cfg: PolicyConfig) -> float:
    """Cosine between the current node's target-category row and its reference."""
    target = state.episode.instruction.target
    row = state.map.node_features[state.current].values[target]
    return cosine_of_vectors(row, reference_row_profile(cfg.eta))


def _grounding_success(state: ControllerState, stopped: bool) -> int:
    """At the stop node, pick the visible category whose reference feature is
    closest to the target's reference; grounding succeeds iff it is the target."""
    if not stopped:
        return 0
    episode = state.episode
    visible = state.env.observation(state.current).visible_categories()
    if not visible:
        return 0
    target_ref = reference_sos(
        episode.instruction.target, state.stats, state.refs[0].shape[1],
        state.env.category_count,
    )
    best, best_sim = None, -np.inf
    for cat in sorted(visible):
        ref = reference_sos(
            cat, state.stats, state.refs[0].shape[1], state.env.category_count
        )
        sim = cosine_of_vectors(ref.flat(), target_ref.flat())
        if sim > best_sim:
            best, best_sim = cat, sim
    return int(best == episode.instruction.target)


def progress(env: EnvGraph, episode: Episode, v_t: int) -> float:
    """1 - d(v_t, goal) / d(start, goal); exactly 0 at the start, 1 at the goal."""
    if episode.start == episode.goal:
        return 1.0
    return 1.0 - env.geodesic_distance(v_t, episode.goal) / env.geodesic_distance(
        episode.start, episode.goal
    )


def run_episode(env: EnvGraph, episode: Episode, cfg: PolicyConfig) -> EpisodeResult:
    """Execute the full control loop and return the scored episode."""
    cfg.validate()
    state = initialize_state(env, episode, cfg)
    stopped = False
    just_exploited = False

    while state.t < episode.max_steps:
        if state.pending_path:
            state.mode = MODE_EXPLOIT
            _move(state, state.pending_path.pop(0), MODE_EXPLOIT)
            if not state.pending_path:
                # arrived at the local goal: mode resets to exploration
                state.mode = MODE_EXPLORE
                state.P_explore = 1.0
                state.trend_base = len(state.score_history) - 1
                just_exploited = True
            continue

        if stop_similarity(state, cfg) >= cfg.stop_threshold:
            stopped = True
            break

        if just_exploited:
            state.P_explore = 1.0
            just_exploited = False
        else:
            state.P_explore = select_mode(state, cfg)

        if state.P_explore >= 0.5:
            _move(state, explore_step(state, cfg), MODE_EXPLORE)
        else:
            local = local_goal_search(state, cfg)
            if local is None:
                stopped = True  # nothing left to try: take the stop action
                break
            state.map.mark_chosen(local)
            path, _ = state.map.shortest_path(state.current, local)
            state.pending_path = path[1:]

    final_distance = env.geodesic_distance(state.current, episode.goal)
    goal_dist = env.distances_from(episode.goal)
    adjacency = env.adjacency
    path_length = sum(
        adjacency[a][b] for a, b in zip(state.trajectory, state.trajectory[1:])
    )
    return EpisodeResult(
        episode_id=episode.episode_id,
        policy=cfg.exploit_policy,
        trajectory=tuple(state.trajectory),
        modes=tuple(state.modes),
        stopped=stopped,
        success=int(stopped and final_distance <= episode.d_success),
        oracle_success=int(
            any(goal_dist.get(v, np.inf) <= episode.d_success for v in state.trajectory)
        ),
        path_length=path_length,
        shortest_length=env.geodesic_distance(episode.start, episode.goal),
        final_distance=final_distance,
        grounding_success=_grounding_success(state, stopped),
    )


def config_for_policy(base: PolicyConfig, exploit_policy: str) -> PolicyConfig:
    if exploit_policy not in EXPLOIT_POLICIES:
        raise ConfigurationError(
            f"unknown exploit policy {exploit_policy!r}; "
            f"valid: {', '.join(EXPLOIT_POLICIES)}"
        )
    return replace(base, exploit_policy=exploit_policy)
