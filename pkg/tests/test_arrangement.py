import numpy as np
import pytest

from unknotkit.arrangement import (
    CurveError,
    LoopGeometryError,
    SphericalLoop,
    boundary_graph,
    read_loops_jsonl,
    region_decomposition,
    sphere_boundary_graph,
    write_loops_jsonl,
)
from unknotkit.trees import Tree, ahu_code, is_tree, multigraphs_isomorphic, trees_isomorphic

from fixtures_meshes import equator_ring_index, meridian_cycle, torus_grid, uv_sphere
from oracles import floodfill_tree_oracle, random_nested_loops

P2 = Tree(2, [(0, 1)])
STAR4 = Tree(4, [(0, 1), (0, 2), (0, 3)])
P4 = Tree(4, [(0, 1), (1, 2), (2, 3)])


def cap_loop(center, alpha, n=48):
    """Circle of angular radius alpha around unit vector `center`."""
    center = np.asarray(center, float)
    center = center / np.linalg.norm(center)
    helper = np.array([0.0, 0.0, 1.0]) if abs(center[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    u1 = np.cross(helper, center)
    u1 /= np.linalg.norm(u1)
    u2 = np.cross(center, u1)
    ts = np.linspace(0, 2 * np.pi, n, endpoint=False)
    pts = (
        np.cos(alpha) * center
        + np.sin(alpha) * (np.cos(ts)[:, None] * u1 + np.sin(ts)[:, None] * u2)
    )
    return SphericalLoop(pts)


class TestRegionDecomposition:
    def test_sphere_equator_two_regions(self):
        mesh, rings = uv_sphere(n_lat=9, n_lon=16)
        cyc = rings[equator_ring_index(9)]
        dec = region_decomposition(mesh, [cyc])
        assert dec.region_count == 2
        a, b = dec.curve_sides[0]
        assert a != b

    def test_torus_meridian_single_region(self):
        mesh, vid = torus_grid(n_u=16, n_v=10)
        dec = region_decomposition(mesh, [meridian_cycle(vid, 0)])
        assert dec.region_count == 1
        assert dec.curve_sides[0] == (0, 0)

    def test_sphere_two_parallel_circles_three_regions(self):
        mesh, rings = uv_sphere(n_lat=9, n_lon=16)
        dec = region_decomposition(mesh, [rings[2], rings[6]])
        assert dec.region_count == 3

    def test_region_ids_by_smallest_triangle(self):
        mesh, rings = uv_sphere(n_lat=9, n_lon=16)
        dec = region_decomposition(mesh, [rings[equator_ring_index(9)]])
        # triangle 0 touches the north pole, so the northern cap is region 0
        assert dec.region_of_triangle[0] == 0

    def test_errors(self):
        mesh, rings = uv_sphere(n_lat=9, n_lon=16)
        with pytest.raises(CurveError):
            region_decomposition(mesh, [[0, 1]])  # too short
        with pytest.raises(CurveError):
            region_decomposition(mesh, [[1, 2, 3, 2]])  # repeated vertex
        ring = rings[4]
        with pytest.raises(CurveError):
            region_decomposition(mesh, [ring, ring])  # shared vertices
        with pytest.raises(CurveError):
            # not a mesh edge: vertices on distinct non-adjacent rings
            region_decomposition(mesh, [[rings[0][0], rings[4][0], rings[8][0]]])


class TestBoundaryGraph:
    def test_torus_one_curve_self_loop(self):
        mesh, vid = torus_grid(n_u=16, n_v=10)
        g = boundary_graph(mesh, [meridian_cycle(vid, 0)])
        assert g.vertex_count == 1
        assert g.edges == ((0, 0),)
        assert not is_tree(g)

    def test_torus_two_parallel_curves(self):
        mesh, vid = torus_grid(n_u=16, n_v=10)
        g = boundary_graph(mesh, [meridian_cycle(vid, 0), meridian_cycle(vid, 8)])
        assert g.vertex_count == 2
        assert sorted(g.edges) == [(0, 1), (0, 1)]

    def test_sphere_nested_circles_path(self):
        mesh, rings = uv_sphere(n_lat=9, n_lon=16)
        for n in range(1, 5):
            cycles = [rings[2 * i] for i in range(n)]
            g = boundary_graph(mesh, cycles)
            assert g.vertex_count == n + 1
            assert g.edge_count == n
            assert is_tree(g)
            path = Tree(n + 1, [(i, i + 1) for i in range(n)])
            assert trees_isomorphic(Tree(g.vertex_count, g.edges), path)

    def test_edge_count_equals_curve_count(self):
        mesh, rings = uv_sphere(n_lat=9, n_lon=16)
        g = boundary_graph(mesh, [rings[0], rings[4], rings[8]])
        assert g.edge_count == 3

    def test_sphere_graph_is_tree(self):
        mesh, rings = uv_sphere(n_lat=9, n_lon=16)
        g = boundary_graph(mesh, [rings[1], rings[5], rings[7]])
        assert is_tree(g)

    def test_invariant_under_curve_reordering(self):
        mesh, rings = uv_sphere(n_lat=9, n_lon=16)
        g1 = boundary_graph(mesh, [rings[0], rings[4], rings[8]])
        g2 = boundary_graph(mesh, [rings[8], rings[0], rings[4]])
        assert multigraphs_isomorphic(g1, g2)


class TestSphereBoundaryGraph:
    def test_single_equatorial_loop(self):
        t = sphere_boundary_graph([cap_loop([0, 0, 1], np.pi / 2)])
        assert trees_isomorphic(t, P2)

    def test_three_disjoint_caps_star(self):
        loops = [
            cap_loop([1, 0, 0], 0.5),
            cap_loop([-0.5, 0.8, 0], 0.5),
            cap_loop([0, -0.6, -0.8], 0.5),
        ]
        t = sphere_boundary_graph(loops)
        assert trees_isomorphic(t, STAR4)

    def test_two_nested_plus_one_separate(self):
        loops = [
            cap_loop([0, 0, 1], 0.9),
            cap_loop([0, 0, 1], 0.45),
            cap_loop([0, 0, -1], 0.5),
        ]
        t = sphere_boundary_graph(loops)
        assert trees_isomorphic(t, P4)
        assert trees_isomorphic(t, floodfill_tree_oracle(loops))

    def test_empty_set(self):
        t = sphere_boundary_graph([])
        assert t.vertex_count == 1

    def test_edges_aligned_with_loop_indices(self):
        loops = [cap_loop([0, 0, 1], 0.9), cap_loop([0, 0, 1], 0.45)]
        t = sphere_boundary_graph(loops)
        # two nested loops: the annulus between them borders both, so the
        # edges for loop 0 and loop 1 share exactly one region vertex
        assert t.edge_count == 2
        shared = set(t.edges[0]) & set(t.edges[1])
        assert len(shared) == 1

    def test_intersecting_loops_rejected(self):
        with pytest.raises(LoopGeometryError):
            sphere_boundary_graph(
                [cap_loop([0, 0, 1], 0.8), cap_loop([np.sin(0.8), 0, np.cos(0.8)], 0.8)]
            )

    def test_degenerate_loop_rejected(self):
        with pytest.raises(LoopGeometryError):
            SphericalLoop(np.array([[1, 0, 0], [0, 1, 0]], float))

    def test_off_sphere_points_rejected(self):
        with pytest.raises(LoopGeometryError):
            SphericalLoop(np.array([[2, 0, 0], [0, 2, 0], [0, 0, 2]], float))

    def test_reference_point_independence(self):
        loops = [cap_loop([0, 0, 1], 1.0), cap_loop([0, 0, 1], 0.5), cap_loop([1, 0, 0], 0.3)]
        codes = {ahu_code(sphere_boundary_graph(loops, seed=s)) for s in range(8)}
        assert len(codes) == 1

    def test_randomized_agreement_with_construction_and_oracle(self):
        rng = np.random.default_rng(42)
        for trial in range(25):
            loops, expected = random_nested_loops(rng)
            t = sphere_boundary_graph(loops)
            assert t.edge_count == len(loops)
            assert trees_isomorphic(t, expected), f"trial {trial}"
            oracle = floodfill_tree_oracle(loops)
            assert trees_isomorphic(t, oracle), f"trial {trial} (oracle)"


def test_loops_jsonl_round_trip(tmp_path):
    loops = [cap_loop([0, 0, 1], 0.7, n=12), cap_loop([1, 0, 0], 0.4, n=9)]
    path = tmp_path / "loops.jsonl"
    write_loops_jsonl(loops, str(path))
    back = read_loops_jsonl(str(path))
    assert len(back) == 2
    assert np.allclose(back[0].points, loops[0].points)
    assert np.allclose(back[1].points, loops[1].points)
