"""Benchmark metrics over episode results.

sr: fraction of episodes that stopped within the success radius.
spl: success weighted by inverse path length, shortest/max(shortest, actual).
osr: success under an oracle stop rule (any trajectory node close enough).
tl / ne: mean trajectory length / mean final geodesic distance to goal.
fspl: navigation success gated by grounding success, weighted like spl
      with the ground-truth path length as the reference.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

from .errors import EmptyInputError


@dataclass(frozen=True)
class EpisodeResult:
    episode_id: str
    policy: str
    trajectory: tuple[int, ...]
    modes: tuple[str, ...]  # one label per executed action
    stopped: bool
    success: int
    oracle_success: int
    path_length: float
    shortest_length: float
    final_distance: float
    grounding_success: int

    def to_record(self) -> dict:
        rec = asdict(self)
        rec["trajectory"] = list(self.trajectory)
        rec["modes"] = list(self.modes)
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "EpisodeResult":
        return cls(
            episode_id=str(rec["episode_id"]),
            policy=str(rec["policy"]),
            trajectory=tuple(int(v) for v in rec["trajectory"]),
            modes=tuple(str(m) for m in rec["modes"]),
            stopped=bool(rec["stopped"]),
            success=int(rec["success"]),
            oracle_success=int(rec["oracle_success"]),
            path_length=float(rec["path_length"]),
            shortest_length=float(rec["shortest_length"]),
            final_distance=float(rec["final_distance"]),
            grounding_success=int(rec["grounding_success"]),
        )


def _require(results: list[EpisodeResult]) -> None:
    if not results:
        raise EmptyInputError("no episode results")


def success(result: EpisodeResult, d_success: float) -> int:
    """1 iff the agent stopped at most ``d_success`` from the goal (inclusive)."""
    return int(result.stopped and result.final_distance <= d_success)


def sr(results: list[EpisodeResult]) -> float:
    _require(results)
    return sum(r.success for r in results) / len(results)


def spl(results: list[EpisodeResult]) -> float:
    _require(results)
    total = 0.0
    for r in results:
        denom = max(r.shortest_length, r.path_length)
        total += r.success * (r.shortest_length / denom if denom > 0 else 1.0)
    return total / len(results)


def osr(results: list[EpisodeResult]) -> float:
    _require(results)
    return sum(r.oracle_success for r in results) / len(results)


def tl(results: list[EpisodeResult]) -> float:
    _require(results)
    return sum(r.path_length for r in results) / len(results)


def ne(results: list[EpisodeResult]) -> float:
    _require(results)
    return sum(r.final_distance for r in results) / len(results)


def fspl(results: list[EpisodeResult]) -> float:
    _require(results)
    total = 0.0
    for r in results:
        denom = max(r.shortest_length, r.path_length)
        total += (
            r.success
            * r.grounding_success
            * (r.shortest_length / denom if denom > 0 else 1.0)
        )
    return total / len(results)


def summarize(results: list[EpisodeResult]) -> dict[str, float]:
    """Flat key-value summary of all metrics."""
    return {
        "episodes": len(results),
        "sr": sr(results),
        "spl": spl(results),
        "osr": osr(results),
        "tl": tl(results),
        "ne": ne(results),
        "fspl": fspl(results),
    }
