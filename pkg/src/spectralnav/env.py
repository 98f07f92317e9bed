"""Simulated graph world: rooms of nodes, placed objects, panoramic masks.

The world is an undirected graph whose nodes carry (x, y) positions in
meters; edge weights are Euclidean distances. Objects are axis-aligned
physical boxes with a hard visibility radius (no occlusion). A node's
observation is a stack of per-category binary masks rendered by projecting
each visible object's box onto an equirectangular panorama: heading angle
maps linearly to columns (forward = column 0), elevation maps linearly to
rows, and boxes crossing the 2*pi seam split into two rectangles.

Everything is deterministic per seed, and :class:`EnvGraph` is immutable
after construction, so one instance can back many concurrent episode runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from functools import cached_property

import numpy as np

from . import storage
from .errors import ConfigurationError, GenerationError, NoPathError
from .graphs import bfs_hops, dijkstra_distances, dijkstra_path, is_connected
from .seeding import derive_seed

ENV_SCHEMA = "spectralnav/env"
EPISODES_SCHEMA = "spectralnav/episodes"

DEFAULT_D_SUCCESS = 3.0  # success radius in meters


@dataclass(frozen=True)
class PlacedObject:
    """A physical box in the world, visible within a hard radius."""

    category: int
    x: float
    y: float
    width_m: float
    height_m: float
    visibility_radius: float


@dataclass(frozen=True)
class PanoObservation:
    """Per-category binary masks of shape (K, H, W), union of projected boxes."""

    masks: np.ndarray

    @property
    def category_count(self) -> int:
        return self.masks.shape[0]

    def pixel_counts(self) -> np.ndarray:
        """Mask area per category, in pixels."""
        return self.masks.reshape(self.masks.shape[0], -1).sum(axis=1)

    def visible_categories(self) -> list[int]:
        return [int(k) for k in np.flatnonzero(self.pixel_counts())]

    def dominant_category(self) -> int | None:
        """Category with the largest mask area; smallest index wins ties."""
        counts = self.pixel_counts()
        if counts.max(initial=0) == 0:
            return None
        return int(counts.argmax())


@dataclass(frozen=True)
class Instruction:
    """Ordered object-category tokens plus the goal object's category."""

    tokens: tuple[int, ...]
    target: int


@dataclass(frozen=True)
class Episode:
    episode_id: str
    env_id: str
    start: int
    goal: int
    instruction: Instruction
    gt_path: tuple[int, ...]
    d_success: float = DEFAULT_D_SUCCESS
    max_steps: int = 30


@dataclass(frozen=True)
class EnvGraph:
    """Immutable navigation graph with object placements.

    ``positions[i]`` is node ``i``'s (x, y); ``edges`` holds canonical
    ``a < b`` pairs. Derived structures (adjacency, per-source distances,
    rendered observations) are memoized on first use.
    """

    env_id: str
    positions: tuple[tuple[float, float], ...]
    edges: tuple[tuple[int, int], ...]
    objects: tuple[PlacedObject, ...]
    category_count: int
    pano_dims: tuple[int, int]  # (W columns, H rows)

    @property
    def node_count(self) -> int:
        return len(self.positions)

    @cached_property
    def adjacency(self) -> dict[int, dict[int, float]]:
        adj: dict[int, dict[int, float]] = {i: {} for i in range(self.node_count)}
        for a, b in self.edges:
            w = math.dist(self.positions[a], self.positions[b])
            adj[a][b] = w
            adj[b][a] = w
        return adj

    @cached_property
    def _memo(self) -> dict:
        return {}

    def __getstate__(self):
        return {f.name: getattr(self, f.name) for f in fields(self)}

    def __setstate__(self, state):
        for name, value in state.items():
            object.__setattr__(self, name, value)

    def neighbors(self, node: int) -> list[int]:
        return sorted(self.adjacency[node])

    def distances_from(self, src: int) -> dict[int, float]:
        key = ("dist", src)
        if key not in self._memo:
            self._memo[key] = dijkstra_distances(self.adjacency, src)
        return self._memo[key]

    def geodesic_distance(self, a: int, b: int) -> float:
        """Shortest weighted path length; raises :class:`NoPathError` if disconnected."""
        for node in (a, b):
            if not 0 <= node < self.node_count:
                raise KeyError(f"unknown node {node}")
        dist = self.distances_from(a)
        if b not in dist:
            raise NoPathError(f"nodes {a} and {b} are disconnected")
        return dist[b]

    def shortest_path(self, a: int, b: int) -> list[int]:
        path, _ = dijkstra_path(self.adjacency, a, b)
        return path

    def hop_distance(self, a: int, b: int) -> int:
        hops = bfs_hops(self.adjacency, a)
        if b not in hops:
            raise NoPathError(f"nodes {a} and {b} are disconnected")
        return hops[b]

    def observation(self, node: int) -> PanoObservation:
        """Memoized :func:`render_pano` for this node."""
        key = ("obs", node)
        if key not in self._memo:
            self._memo[key] = render_pano(self, node)
        return self._memo[key]

    def dominant_category(self, node: int) -> int | None:
        key = ("dom", node)
        if key not in self._memo:
            self._memo[key] = self.observation(node).dominant_category()
        return self._memo[key]

    def validate(self) -> None:
        """Check structural invariants; raises ``ValueError`` on violation."""
        n = self.node_count
        seen = set()
        for a, b in self.edges:
            if a == b:
                raise ValueError(f"self-loop on node {a}")
            if not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"edge ({a}, {b}) references unknown node")
            key = (min(a, b), max(a, b))
            if key in seen:
                raise ValueError(f"duplicate edge {key}")
            seen.add(key)
            if math.dist(self.positions[a], self.positions[b]) <= 0:
                raise ValueError(f"zero-length edge {key}")
        for obj in self.objects:
            if not 0 <= obj.category < self.category_count:
                raise ValueError(f"object category {obj.category} out of range")
            if obj.width_m <= 0 or obj.height_m <= 0 or obj.visibility_radius <= 0:
                raise ValueError("object extents and visibility radius must be positive")
        if not is_connected(self.adjacency, n):
            raise ValueError("environment graph is disconnected")


# ---------------- panoramic projection ----------------


@dataclass(frozen=True)
class ProjectedBox:
    """One object's box on the panorama, split at the seam when wrapping."""

    category: int
    col_spans: tuple[tuple[int, int], ...]  # [start, stop) pixel columns
    row_span: tuple[int, int]  # [start, stop) pixel rows

    @property
    def pixel_width(self) -> int:
        return sum(b - a for a, b in self.col_spans)

    @property
    def pixel_height(self) -> int:
        return self.row_span[1] - self.row_span[0]


def _wrap_col_spans(c0: float, c1: float, width: int) -> tuple[tuple[int, int], ...]:
    """Continuous column interval [c0, c1] -> pixel spans, wrapping mod width."""
    if c1 - c0 >= width:
        return ((0, width),)
    j0 = math.floor(c0)
    j1 = math.ceil(c1)
    if j1 == j0:
        j1 = j0 + 1
    count = min(j1 - j0, width)
    start = j0 % width
    if start + count <= width:
        return ((start, start + count),)
    return ((start, width), (0, start + count - width))


def project_visible_boxes(env: EnvGraph, node: int) -> list[ProjectedBox]:
    """Equirectangular boxes for every object within visibility range of ``node``.

    Heading theta (atan2 of the object offset, mod 2*pi) maps to column
    theta / 2*pi * W; the half-extent angles atan2(size/2, distance) give the
    angular footprint. Elevation is measured from eye level at the object's
    vertical center, mapped linearly over [-pi/2, pi/2] -> [H, 0].
    """
    W, H = env.pano_dims
    nx, ny = env.positions[node]
    boxes = []
    for obj in env.objects:
        dx, dy = obj.x - nx, obj.y - ny
        d = math.hypot(dx, dy)
        if d > obj.visibility_radius:
            continue
        theta = math.atan2(dy, dx) % (2 * math.pi)
        half_w = math.atan2(obj.width_m / 2, d)
        half_h = math.atan2(obj.height_m / 2, d)
        c_center = theta / (2 * math.pi) * W
        c_half = half_w / (2 * math.pi) * W
        r_half = half_h / math.pi * H
        r0 = max(0, math.floor(H / 2 - r_half))
        r1 = min(H, math.ceil(H / 2 + r_half))
        if r1 == r0:
            r1 = r0 + 1
        boxes.append(
            ProjectedBox(
                category=obj.category,
                col_spans=_wrap_col_spans(c_center - c_half, c_center + c_half, W),
                row_span=(r0, r1),
            )
        )
    return boxes


def render_pano(env: EnvGraph, node: int) -> PanoObservation:
    """Binary per-category masks at ``node``; same-category boxes union together."""
    W, H = env.pano_dims
    masks = np.zeros((env.category_count, H, W), dtype=np.uint8)
    for box in project_visible_boxes(env, node):
        r0, r1 = box.row_span
        for a, b in box.col_spans:
            masks[box.category, r0:r1, a:b] = 1
    return PanoObservation(masks=masks)


# ---------------- procedural generation ----------------


@dataclass(frozen=True)
class GeneratorParams:
    node_count: int = 36
    room_count: int = 6
    category_count: int = 12
    pano_width: int = 256
    pano_height: int = 64
    room_radius: float = 2.0
    room_spacing: float = 9.0
    objects_per_room: int = 3
    distractors_per_room: int = 1
    visibility_radius: float = 3.5

    def validate(self) -> None:
        if self.node_count < 4:
            raise ConfigurationError("node_count must be >= 4")
        if self.category_count < 3:
            raise ConfigurationError("category_count must be >= 3")
        if self.room_count < 2:
            raise ConfigurationError("room_count must be >= 2")
        if self.room_count > self.category_count:
            raise ConfigurationError(
                "room_count must not exceed category_count "
                "(each room needs a distinct dominant category)"
            )
        if self.room_count > self.node_count:
            raise ConfigurationError("room_count must not exceed node_count")
        if self.pano_width < 4 or self.pano_height < 1:
            raise ConfigurationError("pano dims too small")
        if min(self.room_radius, self.room_spacing, self.visibility_radius) <= 0:
            raise ConfigurationError("geometry parameters must be positive")


def _mst_edges(points: list[tuple[float, float]]) -> list[tuple[int, int]]:
    """Prim's tree over Euclidean distances, deterministic tie-breaking."""
    n = len(points)
    if n <= 1:
        return []
    in_tree = {0}
    edges = []
    while len(in_tree) < n:
        best = None
        for a in sorted(in_tree):
            for b in range(n):
                if b in in_tree:
                    continue
                cand = (math.dist(points[a], points[b]), a, b)
                if best is None or cand < best:
                    best = cand
        _, a, b = best
        in_tree.add(b)
        edges.append((a, b))
    return edges


def generate_env(seed: int, params: GeneratorParams = GeneratorParams()) -> EnvGraph:
    """Connected rooms-and-corridors world, deterministic per seed."""
    params.validate()
    rng = np.random.default_rng(derive_seed(seed, "env"))
    R = params.room_count
    grid_cols = math.ceil(math.sqrt(R))

    centers = []
    for r in range(R):
        gx, gy = r % grid_cols, r // grid_cols
        jitter = rng.uniform(-0.12, 0.12, size=2) * params.room_spacing
        centers.append(
            (gx * params.room_spacing + jitter[0], gy * params.room_spacing + jitter[1])
        )

    base, extra = divmod(params.node_count, R)
    room_sizes = [base + (1 if r < extra else 0) for r in range(R)]

    positions: list[tuple[float, float]] = []
    room_nodes: list[list[int]] = []
    for r in range(R):
        cx, cy = centers[r]
        members = []
        for _ in range(room_sizes[r]):
            for _attempt in range(64):
                rad = params.room_radius * math.sqrt(rng.uniform())
                ang = rng.uniform(0, 2 * math.pi)
                pos = (cx + rad * math.cos(ang), cy + rad * math.sin(ang))
                if all(math.dist(pos, positions[m]) > 0.25 for m in members):
                    break
            members.append(len(positions))
            positions.append(pos)
        room_nodes.append(members)

    edge_set: set[tuple[int, int]] = set()

    def add_edge(a: int, b: int) -> None:
        if a != b:
            edge_set.add((min(a, b), max(a, b)))

    for members in room_nodes:
        pts = [positions[m] for m in members]
        for a, b in _mst_edges(pts):
            add_edge(members[a], members[b])
        # a couple of shortcuts per room so planners face real choices
        for i, m in enumerate(members):
            others = sorted(
                (math.dist(positions[m], positions[o]), o)
                for o in members
                if o != m
            )
            for _, o in others[:2]:
                add_edge(m, o)

    def closest_pair(ra: int, rb: int) -> tuple[int, int]:
        best = None
        for a in room_nodes[ra]:
            for b in room_nodes[rb]:
                cand = (math.dist(positions[a], positions[b]), a, b)
                if best is None or cand < best:
                    best = cand
        return best[1], best[2]

    for ra, rb in _mst_edges(centers):
        add_edge(*closest_pair(ra, rb))
    if R >= 3:
        # one extra corridor so the room graph has a cycle
        a, b = closest_pair(0, R - 1)
        add_edge(a, b)

    dominant = [int(c) for c in rng.permutation(params.category_count)[:R]]
    spare = [c for c in range(params.category_count) if c not in dominant]
    base_w = rng.uniform(0.6, 2.4, size=params.category_count)
    base_h = rng.uniform(0.5, 2.0, size=params.category_count)

    def place_object(cat: int, cx: float, cy: float, spread: float) -> PlacedObject:
        rad = spread * math.sqrt(rng.uniform())
        ang = rng.uniform(0, 2 * math.pi)
        return PlacedObject(
            category=cat,
            x=cx + rad * math.cos(ang),
            y=cy + rad * math.sin(ang),
            width_m=float(base_w[cat] * rng.uniform(0.8, 1.25)),
            height_m=float(base_h[cat] * rng.uniform(0.8, 1.25)),
            visibility_radius=params.visibility_radius,
        )

    objects: list[PlacedObject] = []
    for r in range(R):
        cx, cy = centers[r]
        for _ in range(params.objects_per_room):
            objects.append(place_object(dominant[r], cx, cy, 0.6 * params.room_radius))
        for _ in range(params.distractors_per_room):
            if spare:
                cat = int(spare[rng.integers(len(spare))])
                objects.append(place_object(cat, cx, cy, 0.9 * params.room_radius))

    env = EnvGraph(
        env_id=f"env-{seed}",
        positions=tuple(positions),
        edges=tuple(sorted(edge_set)),
        objects=tuple(objects),
        category_count=params.category_count,
        pano_dims=(params.pano_width, params.pano_height),
    )
    env.validate()
    return env


# ---------------- episodes ----------------


def geodesic_distance(env: EnvGraph, a: int, b: int) -> float:
    return env.geodesic_distance(a, b)


def _instruction_tokens(env: EnvGraph, path: list[int]) -> list[int]:
    """Dominant visible category along the path, consecutive repeats collapsed."""
    tokens: list[int] = []
    for node in path:
        cat = env.dominant_category(node)
        if cat is None:
            continue
        if not tokens or tokens[-1] != cat:
            tokens.append(cat)
    return tokens


def _target_trigger_nodes(env: EnvGraph, target: int) -> list[int]:
    return [
        v for v in range(env.node_count) if env.observation(v).pixel_counts()[target] > 0
    ]


def default_max_steps(gt_hops: int) -> int:
    # tight enough that wasted moves hurt, loose enough that recovery is possible
    return 2 * gt_hops + 4


def generate_episode(
    env: EnvGraph,
    seed: int,
    d_success: float = DEFAULT_D_SUCCESS,
    max_steps: int | None = None,
) -> Episode:
    """Sample a solvable episode: start/goal >= 2 hops apart, tokens from the path.

    A candidate pair is accepted only if every node where the goal's target
    category is visible lies within ``d_success`` of the goal (and the goal is
    one of them). Stopping on first target sight is then never premature, so
    an oracle run always succeeds; it may legitimately stop a node or two
    short of the goal, inside the success ball.
    """
    if env.node_count < 2:
        raise GenerationError("cannot build an episode on a single-node environment")
    rng = np.random.default_rng(derive_seed(seed, "episode"))
    for _attempt in range(400):
        start, goal = (int(v) for v in rng.choice(env.node_count, size=2, replace=False))
        hops = bfs_hops(env.adjacency, start)
        if hops.get(goal, 0) < 2:
            continue
        gt_path = env.shortest_path(start, goal)
        tokens = _instruction_tokens(env, gt_path)
        target = env.dominant_category(goal)
        if not tokens or target is None or target not in tokens:
            continue
        triggers = _target_trigger_nodes(env, target)
        if goal not in triggers:
            continue
        goal_dist = env.distances_from(goal)
        if any(goal_dist.get(v, math.inf) > d_success for v in triggers):
            continue
        return Episode(
            episode_id=f"{env.env_id}-ep{seed}",
            env_id=env.env_id,
            start=start,
            goal=goal,
            instruction=Instruction(tokens=tuple(tokens), target=target),
            gt_path=tuple(gt_path),
            d_success=d_success,
            max_steps=max_steps
            if max_steps is not None
            else default_max_steps(len(gt_path) - 1),
        )
    raise GenerationError(
        f"no valid episode found for env {env.env_id} with seed {seed}"
    )


def generate_episodes(
    env: EnvGraph,
    seed: int,
    count: int,
    d_success: float = DEFAULT_D_SUCCESS,
    max_steps: int | None = None,
) -> list[Episode]:
    return [
        generate_episode(env, derive_seed(seed, "suite", i), d_success, max_steps)
        for i in range(count)
    ]


# ---------------- document I/O ----------------


def env_to_doc(env: EnvGraph) -> dict:
    return {
        "schema": ENV_SCHEMA,
        "schema_version": storage.SCHEMA_VERSION,
        "env_id": env.env_id,
        "category_count": env.category_count,
        "pano_dims": list(env.pano_dims),
        "nodes": [
            {"id": i, "x": x, "y": y} for i, (x, y) in enumerate(env.positions)
        ],
        "edges": [
            {
                "a": a,
                "b": b,
                "weight": math.dist(env.positions[a], env.positions[b]),
            }
            for a, b in env.edges
        ],
        "objects": [
            {
                "category": o.category,
                "x": o.x,
                "y": o.y,
                "width_m": o.width_m,
                "height_m": o.height_m,
                "visibility_radius": o.visibility_radius,
            }
            for o in env.objects
        ],
    }


def env_from_doc(doc: dict) -> EnvGraph:
    storage.check_schema(doc, ENV_SCHEMA)
    nodes = sorted(doc["nodes"], key=lambda n: n["id"])
    if [n["id"] for n in nodes] != list(range(len(nodes))):
        raise ValueError("node ids must be contiguous from 0")
    positions = tuple((float(n["x"]), float(n["y"])) for n in nodes)
    edges = []
    for e in doc["edges"]:
        a, b = int(e["a"]), int(e["b"])
        actual = math.dist(positions[a], positions[b])
        if abs(actual - float(e["weight"])) > 1e-9:
            raise ValueError(
                f"edge ({a}, {b}) weight {e['weight']} does not match "
                f"the Euclidean distance {actual}"
            )
        edges.append((min(a, b), max(a, b)))
    env = EnvGraph(
        env_id=str(doc["env_id"]),
        positions=positions,
        edges=tuple(sorted(edges)),
        objects=tuple(
            PlacedObject(
                category=int(o["category"]),
                x=float(o["x"]),
                y=float(o["y"]),
                width_m=float(o["width_m"]),
                height_m=float(o["height_m"]),
                visibility_radius=float(o["visibility_radius"]),
            )
            for o in doc["objects"]
        ),
        category_count=int(doc["category_count"]),
        pano_dims=(int(doc["pano_dims"][0]), int(doc["pano_dims"][1])),
    )
    env.validate()
    return env


def save_env(path: str, env: EnvGraph) -> None:
    storage.write_document(path, env_to_doc(env))


def load_env(path: str) -> EnvGraph:
    return env_from_doc(storage.read_document(path, ENV_SCHEMA))


def episodes_to_doc(env_id: str, episodes: list[Episode], augmented: bool = False) -> dict:
    return {
        "schema": EPISODES_SCHEMA,
        "schema_version": storage.SCHEMA_VERSION,
        "env_id": env_id,
        "augmented": augmented,
        "episodes": [
            {
                "episode_id": ep.episode_id,
                "start": ep.start,
                "goal": ep.goal,
                "tokens": list(ep.instruction.tokens),
                "target": ep.instruction.target,
                "gt_path": list(ep.gt_path),
                "d_success": ep.d_success,
                "max_steps": ep.max_steps,
            }
            for ep in episodes
        ],
    }


def episodes_from_doc(doc: dict, env: EnvGraph | None = None) -> list[Episode]:
    storage.check_schema(doc, EPISODES_SCHEMA)
    episodes = []
    for e in doc["episodes"]:
        ep = Episode(
            episode_id=str(e["episode_id"]),
            env_id=str(doc["env_id"]),
            start=int(e["start"]),
            goal=int(e["goal"]),
            instruction=Instruction(
                tokens=tuple(int(t) for t in e["tokens"]), target=int(e["target"])
            ),
            gt_path=tuple(int(v) for v in e["gt_path"]),
            d_success=float(e["d_success"]),
            max_steps=int(e["max_steps"]),
        )
        if not ep.instruction.tokens:
            raise ValueError(f"episode {ep.episode_id} has no instruction tokens")
        if ep.gt_path[0] != ep.start or ep.gt_path[-1] != ep.goal:
            raise ValueError(f"episode {ep.episode_id} gt_path endpoints mismatch")
        if env is not None:
            for a, b in zip(ep.gt_path, ep.gt_path[1:]):
                if b not in env.adjacency[a]:
                    raise ValueError(
                        f"episode {ep.episode_id} gt_path uses missing edge ({a}, {b})"
                    )
        episodes.append(ep)
    return episodes


def save_episodes(
    path: str, env_id: str, episodes: list[Episode], augmented: bool = False
) -> None:
    storage.write_document(path, episodes_to_doc(env_id, episodes, augmented))


def load_episodes(path: str, env: EnvGraph | None = None) -> list[Episode]:
    return episodes_from_doc(storage.read_document(path, EPISODES_SCHEMA), env)
