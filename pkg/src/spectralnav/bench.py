"""Batch benchmark runner: every episode under every exploit policy.

Episodes may be evaluated in parallel worker processes; records are always
emitted in (episode order, policy order), so the results stream is
byte-identical regardless of the job count.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor

from . import storage
from .controller import PolicyConfig, config_for_policy, run_episode
from .env import EnvGraph, Episode, load_env, load_episodes
from .metrics import EpisodeResult, summarize

RESULT_SCHEMA = "spectralnav/result"
SUMMARY_SCHEMA = "spectralnav/summary"

METRIC_COLUMNS = ("sr", "spl", "osr", "tl", "ne", "fspl")


def result_to_record(result: EpisodeResult) -> dict:
    rec = result.to_record()
    rec["schema"] = RESULT_SCHEMA
    rec["schema_version"] = storage.SCHEMA_VERSION
    return rec


def run_benchmark(
    env: EnvGraph,
    episodes: list[Episode],
    base_config: PolicyConfig,
    policies: list[str],
    jobs: int = 1,
    env_path: str | None = None,
    episodes_path: str | None = None,
) -> list[EpisodeResult]:
    """One result per (episode, policy), ordered by episode then policy."""
    configs = [config_for_policy(base_config, p) for p in policies]
    if jobs <= 1 or env_path is None or episodes_path is None:
        return [run_episode(env, ep, cfg) for ep in episodes for cfg in configs]

    indices = list(range(len(episodes)))
    chunks = [indices[i::jobs] for i in range(jobs)]
    results: dict[tuple[int, int], EpisodeResult] = {}
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        futures = [
            pool.submit(
                _run_chunk, env_path, episodes_path, base_config.to_doc(), policies, chunk
            )
            for chunk in chunks
            if chunk
        ]
        for fut in futures:
            for (ep_idx, pol_idx), rec in fut.result():
                results[(ep_idx, pol_idx)] = EpisodeResult.from_record(rec)
    return [
        results[(ep_idx, pol_idx)]
        for ep_idx in range(len(episodes))
        for pol_idx in range(len(policies))
    ]


def _run_chunk(
    env_path: str,
    episodes_path: str,
    config_doc: dict,
    policies: list[str],
    episode_indices: list[int],
) -> list[tuple[tuple[int, int], dict]]:
    env = load_env(env_path)
    episodes = load_episodes(episodes_path, env)
    base = PolicyConfig.from_doc(config_doc)
    out = []
    for ep_idx in episode_indices:
        for pol_idx, policy in enumerate(policies):
            result = run_episode(env, episodes[ep_idx], config_for_policy(base, policy))
            out.append(((ep_idx, pol_idx), result.to_record()))
    return out


def group_by_policy(results: list[EpisodeResult]) -> dict[str, list[EpisodeResult]]:
    grouped: dict[str, list[EpisodeResult]] = {}
    for r in results:
        grouped.setdefault(r.policy, []).append(r)
    return grouped


def summary_doc(results: list[EpisodeResult], seed: int) -> dict:
    doc: dict = {
        "schema": SUMMARY_SCHEMA,
        "schema_version": storage.SCHEMA_VERSION,
        "seed": seed,
    }
    for policy, group in sorted(group_by_policy(results).items()):
        for key, value in summarize(group).items():
            doc[f"{policy}.{key}"] = value
    return doc


def comparison_rows(results: list[EpisodeResult], policy_order: list[str]) -> list[dict]:
    grouped = group_by_policy(results)
    rows = []
    for policy in policy_order:
        row: dict = {"policy": policy}
        row.update(summarize(grouped.get(policy, [])))
        rows.append(row)
    return rows


def comparison_table(rows: list[dict]) -> str:
    """Tab-separated comparison table, one row per policy."""
    header = ("policy", "episodes") + METRIC_COLUMNS
    lines = ["\t".join(header)]
    for row in rows:
        cells = [str(row["policy"]), str(row["episodes"])]
        cells += [f"{row[m]:.4f}" for m in METRIC_COLUMNS]
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"
