"""Weighted-graph primitives: Dijkstra with deterministic tie-breaking, BFS.

Adjacency is ``Mapping[int, Mapping[int, float]]`` (symmetric, weights > 0).
Equal-length shortest paths are broken toward the lexicographically smallest
node-id sequence so runs are byte-reproducible.
"""

from __future__ import annotations

import heapq
from collections import deque
from typing import Mapping

from .errors import NoPathError

Adjacency = Mapping[int, Mapping[int, float]]


def dijkstra_distances(adj: Adjacency, src: int) -> dict[int, float]:
    """Geodesic distance from ``src`` to every reachable node."""
    dist = {src: 0.0}
    heap = [(0.0, src)]
    done: set[int] = set()
    while heap:
        d, node = heapq.heappop(heap)
        if node in done:
            continue
        done.add(node)
        for nbr, w in adj.get(node, {}).items():
            nd = d + w
            if nd < dist.get(nbr, float("inf")):
                dist[nbr] = nd
                heapq.heappush(heap, (nd, nbr))
    return dist


def dijkstra_path(adj: Adjacency, src: int, dst: int) -> tuple[list[int], float]:
    """Minimum-weight path from ``src`` to ``dst``.

    Heap entries carry the full path so pops are ordered by
    (distance, node-id sequence); the first time ``dst`` is settled we hold
    the lexicographically smallest among all minimum-weight paths.
    """
    if src == dst:
        return [src], 0.0
    heap: list[tuple[float, tuple[int, ...]]] = [(0.0, (src,))]
    done: set[int] = set()
    while heap:
        d, path = heapq.heappop(heap)
        node = path[-1]
        if node in done:
            continue
        done.add(node)
        if node == dst:
            return list(path), d
        for nbr in adj.get(node, {}):
            if nbr not in done:
                heapq.heappush(heap, (d + adj[node][nbr], path + (nbr,)))
    raise NoPathError(f"no path from {src} to {dst}")


def bfs_hops(adj: Adjacency, src: int) -> dict[int, int]:
    """Edge-count distance from ``src`` to every reachable node."""
    hops = {src: 0}
    queue = deque([src])
    while queue:
        node = queue.popleft()
        for nbr in adj.get(node, {}):
            if nbr not in hops:
                hops[nbr] = hops[node] + 1
                queue.append(nbr)
    return hops


def is_connected(adj: Adjacency, node_count: int) -> bool:
    if node_count == 0:
        return True
    return len(bfs_hops(adj, next(iter(adj)))) == node_count


def path_length(adj: Adjacency, path: list[int]) -> float:
    """Total weight along consecutive nodes of ``path``."""
    total = 0.0
    for a, b in zip(path, path[1:]):
        total += adj[a][b]
    return total
