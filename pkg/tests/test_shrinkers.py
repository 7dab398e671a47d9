import math

import numpy as np
import pytest

from unknotkit.analysis import genus_and_boundary
from unknotkit.geom import random_rotation
from unknotkit.mesh import TriMesh
from unknotkit.shrinkers import (
    HEEGAARD_RADIUS,
    TransversalityError,
    builtin_shrinker,
    default_steps,
    graph_at_infinity,
    slice_graph,
)
from unknotkit.trees import Tree, ahu_code, as_tree, is_tree, trees_isomorphic

P2 = ahu_code(Tree(2, [(0, 1)]))
P3 = ahu_code(Tree(3, [(0, 1), (1, 2)]))
P1 = ahu_code(Tree(1))


class TestBuiltins:
    def test_sphere2(self):
        m = builtin_shrinker("sphere2", resolution=32)
        assert genus_and_boundary(m) == (0, 0)
        assert m.euler_characteristic() == 2
        assert np.allclose(np.linalg.norm(m.vertices, axis=1), 2.0)

    def test_plane(self):
        m = builtin_shrinker("plane", extent=8, resolution=32)
        assert genus_and_boundary(m) == (0, 1)
        assert m.euler_characteristic() == 1

    def test_cylinder2(self):
        m = builtin_shrinker("cylinder2", extent=8, resolution=32)
        assert genus_and_boundary(m) == (0, 2)
        assert m.euler_characteristic() == 0

    def test_parameter_errors(self):
        with pytest.raises(ValueError):
            builtin_shrinker("plane", extent=3)
        with pytest.raises(ValueError):
            builtin_shrinker("cylinder2", resolution=6)
        with pytest.raises(ValueError):
            builtin_shrinker("torus")


class TestSliceGraph:
    def test_plane_great_circle(self):
        # extent 15 keeps R=4 away from the concentric vertex rings
        m = builtin_shrinker("plane", extent=15, resolution=32)
        s = slice_graph(m, 4.0)
        assert len(s.loops) == 1
        assert s.graph.vertex_count == 2
        assert s.graph.edge_count == 1

    def test_cylinder_two_circles(self):
        m = builtin_shrinker("cylinder2", extent=8, resolution=32)
        s = slice_graph(m, 4.0)
        assert len(s.loops) == 2
        assert trees_isomorphic(as_tree(s.graph), Tree(3, [(0, 1), (1, 2)]))

    def test_sphere_no_intersection(self):
        m = builtin_shrinker("sphere2", resolution=32)
        s = slice_graph(m, 4.0)
        assert s.loops == ()
        assert s.graph.vertex_count == 1
        assert s.graph.edge_count == 0

    def test_edge_count_equals_loop_count(self):
        m = builtin_shrinker("cylinder2", extent=8, resolution=32)
        for r in (3.1, 4.7, 6.3):
            s = slice_graph(m, r)
            assert s.graph.edge_count == len(s.loops)
            assert is_tree(as_tree(s.graph))

    def test_grazing_vertex_rejected(self):
        m = builtin_shrinker("plane", extent=16, resolution=48)
        # ring radii are multiples of 16/12; R=4 hits one exactly
        with pytest.raises(TransversalityError):
            slice_graph(m, 4.0)

    def test_loops_on_unit_sphere(self):
        m = builtin_shrinker("cylinder2", extent=8, resolution=32)
        s = slice_graph(m, 5.3)
        for loop in s.loops:
            assert np.allclose(np.linalg.norm(loop.points, axis=1), 1.0)


class TestStabilization:
    def test_three_genus_zero_models(self):
        expected = {"plane": (P2, 2), "sphere2": (P1, 1), "cylinder2": (P3, 3)}
        for kind, (code, n_vertices) in expected.items():
            m = builtin_shrinker(kind, extent=16, resolution=32)
            rep = graph_at_infinity(m, HEEGAARD_RADIUS, 12.0)
            assert rep.stabilized, kind
            assert rep.graph_at_infinity == code, kind
            from unknotkit.trees import parse_tree

            assert parse_tree(rep.graph_at_infinity).vertex_count == n_vertices
            assert rep.r0_estimate is not None
            assert rep.r0_estimate >= HEEGAARD_RADIUS - 1e-9

    def test_two_radii_consistency(self):
        # well-definedness at model scale: any two transversal radii agree
        for kind in ("plane", "sphere2", "cylinder2"):
            m = builtin_shrinker(kind, extent=16, resolution=32)
            codes = set()
            for r in (2.9, 4.4, 7.9, 11.3):
                s = slice_graph(m, r)
                codes.add(ahu_code(as_tree(s.graph)))
            assert len(codes) == 1, kind

    def test_rotation_invariance(self):
        rng = np.random.default_rng(9)
        m = builtin_shrinker("cylinder2", extent=16, resolution=32)
        base = graph_at_infinity(m, HEEGAARD_RADIUS, 12.0).graph_at_infinity
        for _ in range(2):
            rot = m.transformed(random_rotation(rng))
            rep = graph_at_infinity(rot, HEEGAARD_RADIUS, 12.0)
            assert rep.graph_at_infinity == base

    def test_truncated_cone_end(self):
        # single conical end: slices are single circles at every radius
        res = 40
        rows = []
        verts = []
        for i in range(25):
            r = 0.5 + 15.5 * i / 24
            z = r  # 45-degree cone
            ring = []
            for j in range(res):
                a = 2 * math.pi * j / res
                ring.append(len(verts))
                verts.append([r * math.cos(a), r * math.sin(a), z])
            rows.append(ring)
        tris = []
        for i in range(24):
            a, b = rows[i], rows[i + 1]
            for j in range(res):
                jn = (j + 1) % res
                tris.append((a[j], b[j], b[jn]))
                tris.append((a[j], b[jn], a[jn]))
        cone = TriMesh(np.array(verts), np.array(tris))
        rep = graph_at_infinity(cone, HEEGAARD_RADIUS, 12.0)
        assert rep.stabilized
        assert rep.graph_at_infinity == P2

    def test_parameter_validation(self):
        m = builtin_shrinker("sphere2", resolution=24)
        with pytest.raises(ValueError):
            graph_at_infinity(m, 1.0, 12.0)
        with pytest.raises(ValueError):
            graph_at_infinity(m, 3.0, 2.0)
        assert default_steps(HEEGAARD_RADIUS, 12.0) >= 2

    def test_report_json(self):
        m = builtin_shrinker("plane", extent=16, resolution=24)
        rep = graph_at_infinity(m, HEEGAARD_RADIUS, 12.0, steps=5)
        js = rep.to_json()
        assert js["stabilized"] is True
        assert len(js["radii_tested"]) == 5
        assert js["graph_at_infinity"] == P2
