import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dasalign.geometry import CellTopology, make_topology, pair_geometry, place_rrus, place_users


def test_rru_ring_equal_spacing():
    pos = place_rrus(8, 200.0)
    assert np.allclose(np.hypot(pos[:, 0], pos[:, 1]), 200.0, rtol=0, atol=1e-12)
    chords = np.hypot(*(np.roll(pos, -1, axis=0) - pos).T)
    # neighbouring RRUs are 2 D0 sin(pi / N) apart
    assert np.allclose(chords, 153.0733729460359, rtol=1e-12)


def test_rru_rotation():
    pos = place_rrus(4, 1.0, rotation=math.pi / 2)
    assert np.allclose(pos[0], [0.0, 1.0], atol=1e-15)


def test_users_uniform_over_disk(rng):
    users = place_users(200_000, 400.0, rng)
    r = np.hypot(users[:, 0], users[:, 1])
    assert r.max() <= 400.0
    # E[r] = 2 d / 3 for a uniform disk
    assert abs(r.mean() / (2 * 400.0 / 3) - 1) < 0.01
    # half the area lies inside radius d / sqrt(2)
    assert abs(np.mean(r < 400.0 / math.sqrt(2)) - 0.5) < 0.01


def test_pair_geometry_known_point():
    topo = CellTopology(400.0, 200.0, place_rrus(2, 200.0), np.array([[200.0, 100.0], [0.0, 0.0]]))
    d, b = pair_geometry(topo, 0, 0)
    assert d == pytest.approx(100.0)
    assert b == pytest.approx(math.pi / 2)
    d, b = pair_geometry(topo, 1, 1)   # RRU at (-200, 0), user at the origin
    assert d == pytest.approx(200.0)
    assert b == pytest.approx(0.0, abs=1e-15)


def test_pair_geometry_bad_index(rng):
    topo = make_topology(4, 400.0, 200.0, rng)
    with pytest.raises(IndexError):
        pair_geometry(topo, 4, 0)
    with pytest.raises(IndexError):
        pair_geometry(topo, 0, -1)


def test_invalid_inputs(rng):
    with pytest.raises(ValueError):
        place_rrus(0, 200.0)
    with pytest.raises(ValueError):
        place_users(3, -1.0, rng)
    with pytest.raises(ValueError):
        CellTopology(400.0, 200.0, place_rrus(2, 200.0), np.zeros((3, 2)))
    with pytest.raises(ValueError):
        CellTopology(400.0, 200.0, place_rrus(1, 200.0), np.array([[500.0, 0.0]]))
    with pytest.raises(ValueError):
        CellTopology(400.0, 200.0, np.array([[150.0, 0.0]]), np.zeros((1, 2)))


def test_colocated_moves_rrus_to_center(rng):
    topo = make_topology(8, 400.0, 200.0, rng)
    cent = topo.colocated()
    r = np.hypot(topo.user_positions[:, 0], topo.user_positions[:, 1])
    assert np.allclose(cent.distances(), np.broadcast_to(r, (8, 8)))


def test_topology_csv(tmp_path, rng):
    topo = make_topology(3, 400.0, 200.0, rng)
    path = tmp_path / "topo.csv"
    topo.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "entity,index,x_m,y_m"
    assert len(lines) == 1 + 1 + 3 + 3


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 16), seed=st.integers(0, 2**32 - 1),
       rotation=st.floats(-10, 10, allow_nan=False))
def test_bearings_and_distances_consistent(n, seed, rotation):
    topo = make_topology(n, 400.0, 200.0, np.random.default_rng(seed), rotation)
    dist, bear = topo.distances(), topo.bearings()
    assert np.all(bear >= 0) and np.all(bear < 2 * math.pi)
    assert np.all(dist <= 600.0 + 1e-9)
    for i in range(n):
        for k in range(n):
            d, b = pair_geometry(topo, i, k)
            assert d == pytest.approx(dist[i, k], rel=1e-12)
            assert b == pytest.approx(bear[i, k], abs=1e-12)
            # stepping d along the bearing from the RRU lands on the user
            end = topo.rru_positions[i] + d * np.array([math.cos(b), math.sin(b)])
            assert np.allclose(end, topo.user_positions[k], atol=1e-9)
