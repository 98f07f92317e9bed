"""Command-line interface.

Subcommands: gen-env, gen-episodes, run, study-score-nds, plot-simmatrix.
Every flag can also be supplied through an environment variable named
``SPECTRALNAV_<FLAG>`` (dashes become underscores); explicit flags win.
All commands are deterministic given their flags, input files, and seed.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path

from . import bench, storage
from .augment import augment_trajectories, save_augmented_set
from .controller import (
    EXPLOIT_POLICIES,
    PolicyConfig,
    env_category_stats,
    load_config,
    node_feature,
)
from .env import (
    DEFAULT_D_SUCCESS,
    GeneratorParams,
    generate_env,
    generate_episodes,
    load_env,
    load_episodes,
    save_env,
    save_episodes,
)
from .errors import EmptyInputError, SpectralNavError
from .plots import save_policy_bars, save_score_nds_scatter, save_similarity_heatmap
from .scoring import similarity_matrix
from .spectrum import reference_sos
from .study import score_nds_points, spearman_rho

ENV_PREFIX = "SPECTRALNAV_"


def _env_override(flag: str, cast):
    raw = os.environ.get(ENV_PREFIX + flag.upper().replace("-", "_"))
    if raw is None:
        return None
    return cast(raw)


def _add(parser: argparse.ArgumentParser, flag: str, *, cast, default=None, required=False, help=""):
    """Add a flag whose default can come from the mirroring environment variable."""
    env_value = _env_override(flag.lstrip("-"), cast)
    if env_value is not None:
        default, required = env_value, False
    parser.add_argument(
        flag, type=cast, default=default, required=required, help=help
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spectralnav",
        description="Graph-world navigation benchmark with spectral scene features.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-env", help="generate an environment file")
    _add(p, "--seed", cast=int, required=True)
    _add(p, "--out", cast=str, required=True)
    _add(p, "--nodes", cast=int, default=36)
    _add(p, "--rooms", cast=int, default=6)
    _add(p, "--categories", cast=int, default=12)
    _add(p, "--pano-width", cast=int, default=256)
    _add(p, "--pano-height", cast=int, default=64)
    _add(p, "--room-radius", cast=float, default=2.0)
    _add(p, "--room-spacing", cast=float, default=9.0)
    _add(p, "--objects-per-room", cast=int, default=3)
    _add(p, "--distractors-per-room", cast=int, default=1)
    _add(p, "--visibility-radius", cast=float, default=3.5)

    p = sub.add_parser("gen-episodes", help="generate an episode file for an environment")
    _add(p, "--env", cast=str, required=True)
    _add(p, "--seed", cast=int, required=True)
    _add(p, "--count", cast=int, default=20)
    _add(p, "--out", cast=str, required=True)
    _add(p, "--d-success", cast=float, default=DEFAULT_D_SUCCESS)
    _add(p, "--max-steps", cast=int, default=None)

    p = sub.add_parser("run", help="run the benchmark over episodes and policies")
    _add(p, "--env", cast=str, required=True)
    _add(p, "--episodes", cast=str, required=True)
    _add(p, "--seed", cast=int, required=True)
    _add(p, "--out-dir", cast=str, required=True)
    _add(p, "--config", cast=str, default=None)
    _add(p, "--policies", cast=str, default=",".join(EXPLOIT_POLICIES))
    _add(p, "--jobs", cast=int, default=1)

    p = sub.add_parser(
        "study-score-nds", help="score-vs-quality study over augmented trajectories"
    )
    # append-flags resolve their environment fallback after parsing; a non-None
    # default would make explicit flags extend it instead of replacing it
    p.add_argument("--env", action="append",
                   required=_env_override("env", str) is None, default=None,
                   help="environment file (repeatable)")
    p.add_argument("--episodes", action="append",
                   required=_env_override("episodes", str) is None, default=None,
                   help="episode file matching each --env (repeatable)")
    _add(p, "--seed", cast=int, required=True)
    _add(p, "--out-dir", cast=str, required=True)
    _add(p, "--per-episode", cast=int, default=10)
    _add(p, "--max-hops", cast=int, default=15)
    _add(p, "--eta", cast=int, default=64)
    p.add_argument("--save-augmented", action="store_true",
                   help="also write each augmented trajectory set as an "
                        "episode file with the augmented marker")

    p = sub.add_parser("plot-simmatrix", help="similarity-matrix heatmap for a trajectory")
    _add(p, "--env", cast=str, required=True)
    _add(p, "--episodes", cast=str, required=True)
    _add(p, "--episode-id", cast=str, default=None)
    _add(p, "--trajectory", cast=str, default=None,
         help="comma-separated node ids; defaults to the episode's reference path")
    _add(p, "--out", cast=str, required=True)
    _add(p, "--grid-out", cast=str, default=None,
         help="also write the numeric grid as a self-describing record stream")
    _add(p, "--eta", cast=int, default=64)
    _add(p, "--seed", cast=int, default=0)

    return parser


def _cmd_gen_env(args) -> int:
    params = GeneratorParams(
        node_count=args.nodes,
        room_count=args.rooms,
        category_count=args.categories,
        pano_width=args.pano_width,
        pano_height=args.pano_height,
        room_radius=args.room_radius,
        room_spacing=args.room_spacing,
        objects_per_room=args.objects_per_room,
        distractors_per_room=args.distractors_per_room,
        visibility_radius=args.visibility_radius,
    )
    env = generate_env(args.seed, params)
    save_env(args.out, env)
    print(f"wrote {args.out}: {env.node_count} nodes, {len(env.edges)} edges, "
          f"{len(env.objects)} objects")
    return 0


def _cmd_gen_episodes(args) -> int:
    env = load_env(args.env)
    episodes = generate_episodes(
        env, args.seed, args.count, d_success=args.d_success, max_steps=args.max_steps
    )
    save_episodes(args.out, env.env_id, episodes)
    print(f"wrote {args.out}: {len(episodes)} episodes for {env.env_id}")
    return 0


def _parse_policies(raw: str) -> list[str]:
    policies = [p.strip() for p in raw.split(",") if p.strip()]
    for p in policies:
        if p not in EXPLOIT_POLICIES:
            raise SpectralNavError(
                f"unknown policy {p!r}; valid policies: {', '.join(EXPLOIT_POLICIES)}"
            )
    if not policies:
        raise SpectralNavError(
            f"no policies given; valid policies: {', '.join(EXPLOIT_POLICIES)}"
        )
    return policies


def _cmd_run(args) -> int:
    env = load_env(args.env)
    episodes = load_episodes(args.episodes, env)
    policies = _parse_policies(args.policies)
    base = load_config(args.config) if args.config else PolicyConfig()
    base = PolicyConfig.from_doc({**base.to_doc(), "seed": args.seed})

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    results = bench.run_benchmark(
        env, episodes, base, policies, jobs=args.jobs,
        env_path=args.env, episodes_path=args.episodes,
    )

    with open(out_dir / "results.jsonl", "w", encoding="utf-8", newline="\n") as fh:
        storage.write_records(fh, [bench.result_to_record(r) for r in results])
    storage.write_document(str(out_dir / "summary.json"), bench.summary_doc(results, args.seed))
    rows = bench.comparison_rows(results, policies)
    table = bench.comparison_table(rows)
    (out_dir / "comparison.tsv").write_text(table, encoding="utf-8")
    figures = out_dir / "figures"
    figures.mkdir(exist_ok=True)
    save_policy_bars(str(figures / "policy_comparison.svg"), rows)
    print(table, end="")
    return 0


def _cmd_study(args) -> int:
    env_paths = args.env or ([_env_override("env", str)] if _env_override("env", str) else [])
    episode_paths = args.episodes or (
        [_env_override("episodes", str)] if _env_override("episodes", str) else []
    )
    if len(env_paths) != len(episode_paths):
        raise SpectralNavError(
            f"got {len(env_paths)} --env but {len(episode_paths)} --episodes"
        )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    points = []
    for env_path, episodes_path in zip(env_paths, episode_paths):
        env = load_env(env_path)
        episodes = load_episodes(episodes_path, env)
        points.extend(
            score_nds_points(
                env, episodes, args.seed, args.per_episode, args.max_hops, args.eta
            )
        )
        if args.save_augmented:
            trajectories = augment_trajectories(
                env, episodes, args.seed, args.per_episode, args.max_hops
            )
            save_augmented_set(
                str(out_dir / f"augmented_{env.env_id}.json"),
                env, episodes, trajectories, args.per_episode,
            )
    if not points:
        raise EmptyInputError("study produced no trajectory pairs")
    rho = spearman_rho([p.score for p in points], [p.nds for p in points])

    with open(out_dir / "pairs.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["episode_id", "length", "score", "nds"])
        for p in points:
            writer.writerow(
                [p.episode_id, p.length, storage.format_float(p.score),
                 storage.format_float(p.nds)]
            )
    storage.write_document(
        str(out_dir / "summary.json"),
        {
            "schema": bench.SUMMARY_SCHEMA,
            "schema_version": storage.SCHEMA_VERSION,
            "seed": args.seed,
            "pairs": len(points),
            "spearman_rho": rho,
        },
    )
    figures = out_dir / "figures"
    figures.mkdir(exist_ok=True)
    save_score_nds_scatter(
        str(figures / "score_vs_nds.svg"),
        [p.nds for p in points],
        [p.score for p in points],
        rho,
    )
    print(f"pairs: {len(points)}  spearman_rho: {rho:.4f}")
    return 0


def _cmd_plot_simmatrix(args) -> int:
    env = load_env(args.env)
    episodes = load_episodes(args.episodes, env)
    if args.episode_id is None:
        episode = episodes[0]
    else:
        matches = [ep for ep in episodes if ep.episode_id == args.episode_id]
        if not matches:
            raise SpectralNavError(
                f"episode {args.episode_id!r} not found; available: "
                f"{', '.join(ep.episode_id for ep in episodes)}"
            )
        episode = matches[0]
    if args.trajectory is None:
        trajectory = list(episode.gt_path)
    else:
        trajectory = [int(v) for v in args.trajectory.split(",") if v.strip() != ""]
    if not trajectory:
        raise EmptyInputError("trajectory is empty")
    for node in trajectory:
        if not 0 <= node < env.node_count:
            raise SpectralNavError(f"trajectory references unknown node {node}")

    stats = env_category_stats(env)
    refs = [
        reference_sos(tok, stats, args.eta, env.category_count)
        for tok in episode.instruction.tokens
    ]
    feats = [node_feature(env, n, args.eta) for n in trajectory]
    matrix = similarity_matrix(refs, feats)
    Path(args.out).parent.mkdir(parents=True, exist_ok=True)
    save_similarity_heatmap(args.out, matrix, list(episode.instruction.tokens))
    if args.grid_out:
        record = {
            "schema": "spectralnav/simmatrix",
            "schema_version": storage.SCHEMA_VERSION,
            "episode_id": episode.episode_id,
            "tokens": list(episode.instruction.tokens),
            "trajectory": trajectory,
            "matrix": [[float(v) for v in row] for row in matrix],
            "step_features": [f.to_doc() for f in feats],
        }
        with open(args.grid_out, "w", encoding="utf-8", newline="\n") as fh:
            storage.write_records(fh, [record])
    print(f"wrote {args.out}: {matrix.shape[0]} steps x {matrix.shape[1]} tokens")
    return 0


_COMMANDS = {
    "gen-env": _cmd_gen_env,
    "gen-episodes": _cmd_gen_episodes,
    "run": _cmd_run,
    "study-score-nds": _cmd_study,
    "plot-simmatrix": _cmd_plot_simmatrix,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except SpectralNavError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
