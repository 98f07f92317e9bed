"""Graph-world navigation benchmark with spectral scene features."""

from .augment import augment_trajectories, expand_prefixes, generate_detour_demo
from .controller import (
    PolicyConfig,
    explore_step,
    local_goal_search,
    progress,
    run_episode,
    select_mode,
)
from .env import (
    EnvGraph,
    Episode,
    GeneratorParams,
    Instruction,
    PanoObservation,
    PlacedObject,
    generate_env,
    generate_episode,
    generate_episodes,
    geodesic_distance,
    load_env,
    load_episodes,
    render_pano,
    save_env,
    save_episodes,
)
from .metrics import EpisodeResult, fspl, ne, osr, spl, sr, success, summarize, tl
from .scoring import ScoredTrajectory, nav_score, nds, similarity_matrix
from .spectrum import (
    CategoryStats,
    SosFeature,
    collect_category_stats,
    compute_sos,
    cosine_similarity,
    frontview_to_pano_box,
    reference_sos,
)
from .topomap import TopoMap

__version__ = "0.1.0"

__all__ = [
    "CategoryStats",
    "EnvGraph",
    "Episode",
    "EpisodeResult",
    "GeneratorParams",
    "Instruction",
    "PanoObservation",
    "PlacedObject",
    "PolicyConfig",
    "ScoredTrajectory",
    "SosFeature",
    "TopoMap",
    "augment_trajectories",
    "collect_category_stats",
    "compute_sos",
    "cosine_similarity",
    "expand_prefixes",
    "explore_step",
    "frontview_to_pano_box",
    "fspl",
    "generate_detour_demo",
    "generate_env",
    "generate_episode",
    "generate_episodes",
    "geodesic_distance",
    "load_env",
    "load_episodes",
    "local_goal_search",
    "nav_score",
    "nds",
    "ne",
    "osr",
    "progress",
    "reference_sos",
    "render_pano",
    "run_episode",
    "save_env",
    "save_episodes",
    "select_mode",
    "similarity_matrix",
    "spl",
    "sr",
    "success",
    "summarize",
    "tl",
]
