"""Agent-side topological map built up during exploration.

Nodes are either visited (the agent stood there) or frontier (observed from
an adjacent visited node but never entered). Only edges the agent has
actually observed are available for planning; equal-length plans tie-break
toward the lexicographically smallest node-id sequence.
"""

from __future__ import annotations

import math
from typing import Iterable

from .errors import NoPathError
from .graphs import dijkstra_path
from .spectrum import SosFeature


class TopoMap:
    def __init__(self) -> None:
        self.visited: dict[int, int] = {}  # node -> last visit timestep
        self.frontier: set[int] = set()
        self.chosen_history: set[int] = set()
        self.node_features: dict[int, SosFeature] = {}
        self.positions: dict[int, tuple[float, float]] = {}
        self.adjacency: dict[int, dict[int, float]] = {}

    def known_nodes(self) -> set[int]:
        return set(self.visited) | self.frontier

    def update(
        self,
        current: int,
        neighbors: Iterable[tuple[int, tuple[float, float], SosFeature]],
        t: int,
        position: tuple[float, float] | None = None,
        feature: SosFeature | None = None,
    ) -> "TopoMap":
        """Mark ``current`` visited at time ``t`` and record its neighborhood.

        ``position``/``feature`` seed the very first node (t=0); afterwards
        frontier nodes already carry both from when they were observed.
        Re-observation overwrites stored features (latest wins).
        """
        if position is not None:
            self.positions[current] = position
        if feature is not None:
            self.node_features[current] = feature
        if current not in self.positions:
            raise KeyError(f"node {current} was never observed and no position given")
        self.frontier.discard(current)
        self.visited[current] = t
        here = self.positions[current]
        edges = self.adjacency.setdefault(current, {})
        for node, pos, feat in neighbors:
            self.positions[node] = pos
            self.node_features[node] = feat
            if node not in self.visited:
                self.frontier.add(node)
            w = math.dist(here, pos)
            edges[node] = w
            self.adjacency.setdefault(node, {})[current] = w
        return self

    def shortest_path(self, src: int, dst: int) -> tuple[list[int], float]:
        """Minimal-weight path over observed edges only."""
        known = self.known_nodes()
        for node in (src, dst):
            if node not in known:
                raise NoPathError(f"node {node} is not on the map")
        return dijkstra_path(self.adjacency, src, dst)

    def frontier_candidates(self) -> list[int]:
        """Frontier nodes never chosen as a local goal, in id order."""
        return sorted(self.frontier - self.chosen_history)

    def mark_chosen(self, node: int) -> None:
        self.chosen_history.add(node)

    def snapshot(self) -> dict:
        """Plain-data view for serialization or trajectory visualization."""
        return {
            "visited": {str(k): v for k, v in sorted(self.visited.items())},
            "frontier": sorted(self.frontier),
            "chosen": sorted(self.chosen_history),
            "positions": {
                str(k): [x, y] for k, (x, y) in sorted(self.positions.items())
            },
            "edges": sorted(
                [a, b] for a in self.adjacency for b in self.adjacency[a] if a < b
            ),
        }
