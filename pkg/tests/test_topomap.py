import numpy as np
import pytest

from spectralnav.env import EnvGraph
from spectralnav.errors import NoPathError
from spectralnav.spectrum import SosFeature, compute_sos
from spectralnav.topomap import TopoMap

from worlds import enumerate_shortest, fully_observed_map, random_connected_env


def zero_feat() -> SosFeature:
    return SosFeature(values=np.zeros((1, 2)))


def obs_of(env, node):
    return (node, env.positions[node], compute_sos(env.observation(node), 2))


def test_initial_update_seeds_visited_and_frontier():
    topo = TopoMap()
    topo.update(
        0,
        [(1, (1.0, 0.0), zero_feat()), (2, (0.0, 1.0), zero_feat()), (3, (-1.0, 0.0), zero_feat())],
        t=0,
        position=(0.0, 0.0),
        feature=zero_feat(),
    )
    assert set(topo.visited) == {0}
    assert topo.frontier == {1, 2, 3}
    assert set(topo.node_features) == {0, 1, 2, 3}


def test_revisit_refreshes_timestep_only():
    topo = TopoMap()
    topo.update(0, [(1, (1.0, 0.0), zero_feat())], t=0, position=(0.0, 0.0), feature=zero_feat())
    topo.update(1, [(0, (0.0, 0.0), zero_feat())], t=1)
    frontier_before = set(topo.frontier)
    topo.update(0, [(1, (1.0, 0.0), zero_feat())], t=2)
    assert topo.frontier == frontier_before
    assert topo.visited[0] == 2


def test_moving_to_frontier_swaps_membership():
    # 6-node path-and-branch fixture: moving to node 1 exposes nodes 3, 4
    topo = TopoMap()
    topo.update(
        0,
        [(1, (1.0, 0.0), zero_feat()), (2, (0.0, 1.0), zero_feat())],
        t=0,
        position=(0.0, 0.0),
        feature=zero_feat(),
    )
    topo.update(
        1,
        [
            (0, (0.0, 0.0), zero_feat()),
            (3, (2.0, 0.0), zero_feat()),
            (4, (1.0, 1.0), zero_feat()),
        ],
        t=1,
    )
    assert topo.frontier == {2, 3, 4}  # lost 1, gained 3 and 4
    assert set(topo.visited) == {0, 1}


def test_invariants_hold_under_random_walks():
    rng = np.random.default_rng(0)
    for seed in range(10):
        env = random_connected_env(seed, max_nodes=8)
        topo = TopoMap()
        node = 0
        topo.update(
            node,
            [obs_of(env, n) for n in env.neighbors(node)],
            t=0,
            position=env.positions[node],
            feature=compute_sos(env.observation(node), 2),
        )
        for t in range(1, 15):
            nbrs = env.neighbors(node)
            node = int(nbrs[rng.integers(len(nbrs))])
            topo.update(node, [obs_of(env, n) for n in env.neighbors(node)], t=t)
            assert not (set(topo.visited) & topo.frontier)
            for f in topo.frontier:
                assert any(n in topo.visited for n in topo.adjacency[f])
            for known in set(topo.visited) | topo.frontier:
                assert known in topo.node_features


def test_shortest_path_identity():
    env = random_connected_env(3)
    topo = fully_observed_map(env)
    path, length = topo.shortest_path(0, 0)
    assert path == [0] and length == 0.0


def test_shortest_path_matches_enumeration_oracle():
    for seed in range(20):
        env = random_connected_env(seed)
        topo = fully_observed_map(env)
        for src in range(env.node_count):
            for dst in range(env.node_count):
                want = enumerate_shortest(env.adjacency, src, dst)
                got_path, got_len = topo.shortest_path(src, dst)
                assert got_len == want[0]
                assert tuple(got_path) == want[1]


def test_shortest_path_lexicographic_tie_break():
    # diamond with mirror symmetry: both a-b-d and a-c-d have length 2*sqrt(2)
    env = EnvGraph(
        env_id="diamond",
        positions=((0.0, 0.0), (1.0, 1.0), (1.0, -1.0), (2.0, 0.0)),
        edges=((0, 1), (0, 2), (1, 3), (2, 3)),
        objects=(),
        category_count=1,
        pano_dims=(4, 1),
    )
    path, _ = fully_observed_map(env).shortest_path(0, 3)
    assert path == [0, 1, 3]


def test_frontier_path_through_visited_chain():
    topo = TopoMap()
    topo.update(0, [(1, (1.0, 0.0), zero_feat())], t=0, position=(0.0, 0.0), feature=zero_feat())
    topo.update(1, [(0, (0.0, 0.0), zero_feat()), (2, (2.0, 0.0), zero_feat())], t=1)
    path, length = topo.shortest_path(0, 2)  # 2 is frontier
    assert path == [0, 1, 2]
    assert length == pytest.approx(2.0)


def test_shortest_path_requires_known_nodes():
    topo = TopoMap()
    topo.update(0, [(1, (1.0, 0.0), zero_feat())], t=0, position=(0.0, 0.0), feature=zero_feat())
    with pytest.raises(NoPathError):
        topo.shortest_path(0, 99)


def test_path_lengths_non_increasing_as_map_grows():
    env = random_connected_env(7, max_nodes=8)
    rng = np.random.default_rng(5)
    topo = TopoMap()
    node = 0
    topo.update(
        node,
        [obs_of(env, n) for n in env.neighbors(node)],
        t=0,
        position=env.positions[node],
        feature=compute_sos(env.observation(node), 2),
    )
    previous: dict[tuple[int, int], float] = {}
    for t in range(1, 20):
        nbrs = env.neighbors(node)
        node = int(nbrs[rng.integers(len(nbrs))])
        topo.update(node, [obs_of(env, n) for n in env.neighbors(node)], t=t)
        known = sorted(topo.known_nodes())
        for src in known:
            for dst in known:
                try:
                    _, length = topo.shortest_path(src, dst)
                except NoPathError:
                    continue
                key = (src, dst)
                if key in previous:
                    assert length <= previous[key] + 1e-12
                previous[key] = length


def test_frontier_candidates_exclude_chosen():
    topo = TopoMap()
    topo.update(
        0,
        [(1, (1.0, 0.0), zero_feat()), (2, (0.0, 1.0), zero_feat())],
        t=0,
        position=(0.0, 0.0),
        feature=zero_feat(),
    )
    assert topo.frontier_candidates() == [1, 2]
    topo.mark_chosen(1)
    assert topo.frontier_candidates() == [2]
    topo.mark_chosen(2)
    assert topo.frontier_candidates() == []


def test_snapshot_is_serializable_plain_data():
    env = random_connected_env(1)
    topo = fully_observed_map(env)
    snap = topo.snapshot()
    assert set(snap) == {"visited", "frontier", "chosen", "positions", "edges"}
    assert all(isinstance(v, int) for v in snap["frontier"])
