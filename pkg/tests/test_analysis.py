import numpy as np
import pytest

from unknotkit.analysis import (
    BallDomain,
    InvalidSurfaceError,
    Signature,
    boundary_graph_of_surface,
    genus_and_boundary,
    isotopy_equivalent,
    isotopy_signature,
    self_intersecting_pairs,
    self_intersects,
    validate_properly_embedded,
)
from unknotkit.geom import random_rotation
from unknotkit.mesh import TriMesh
from unknotkit.modelsurface import ModelSurfaceSpec, generate_model_surface
from unknotkit.trees import ahu_code, is_tree, parse_tree, trees_isomorphic

from fixtures_meshes import uv_sphere
from oracles import mesh_self_intersects_allpairs

STAR4 = "(()()())"
P4 = "(((())))"


def gen(text, genus=0, res=24):
    return generate_model_surface(
        ModelSurfaceSpec(tree=parse_tree(text), genus=genus, resolution=res)
    )


def flat_disc(radius=1.0, n=16):
    verts = [np.zeros(3)]
    for j in range(n):
        a = 2 * np.pi * j / n
        verts.append([radius * np.cos(a), radius * np.sin(a), 0.0])
    tris = [(0, 1 + j, 1 + (j + 1) % n) for j in range(n)]
    return TriMesh(np.array(verts), np.array(tris))


class TestSelfIntersection:
    def test_flat_disc_clean(self):
        assert not self_intersects(flat_disc())

    def test_interpenetrating_spheres(self):
        a, _ = uv_sphere(radius=1.0, n_lat=7, n_lon=12)
        b, _ = uv_sphere(radius=1.0, n_lat=7, n_lon=12)
        shifted = TriMesh(b.vertices + np.array([0.8, 0.05, 0.1]), b.triangles)
        merged = TriMesh(
            np.vstack([a.vertices, shifted.vertices]),
            np.vstack([a.triangles, shifted.triangles + a.vertex_count]),
        )
        assert self_intersects(merged)
        pairs = self_intersecting_pairs(merged, max_pairs=4)
        assert pairs and all(i < j for i, j in pairs)

    def test_touching_far_apart_clean(self):
        a, _ = uv_sphere(radius=1.0, n_lat=7, n_lon=12)
        b = TriMesh(a.vertices + np.array([5.0, 0, 0]), a.triangles)
        merged = TriMesh(
            np.vstack([a.vertices, b.vertices]),
            np.vstack([a.triangles, b.triangles + a.vertex_count]),
        )
        assert not self_intersects(merged)

    @pytest.mark.parametrize("text,genus", [("(())", 0), ("(()())", 1), ("((()))", 0)])
    def test_agrees_with_allpairs_oracle_on_models(self, text, genus):
        mesh = gen(text, genus, res=12)
        assert not self_intersects(mesh)
        assert not mesh_self_intersects_allpairs(mesh)

    def test_bvh_agrees_with_oracle_on_positive(self):
        a, _ = uv_sphere(radius=1.0, n_lat=5, n_lon=8)
        b = TriMesh(a.vertices + np.array([0.7, 0.0, 0.2]), a.triangles)
        merged = TriMesh(
            np.vstack([a.vertices, b.vertices]),
            np.vstack([a.triangles, b.triangles + a.vertex_count]),
        )
        assert self_intersects(merged) == mesh_self_intersects_allpairs(merged) == True  # noqa: E712


class TestValidation:
    def test_model_surface_validates(self):
        rep = validate_properly_embedded(gen(STAR4))
        assert rep.properly_embedded
        assert rep.connected and rep.orientable and rep.manifold
        assert not rep.self_intersecting
        assert rep.boundary_sphericity_error <= 1e-9
        assert rep.interior_clearance > 0

    def test_translated_disc_fails_boundary(self):
        mesh = gen("(())")
        moved = TriMesh(mesh.vertices + np.array([0.2, 0, 0]), mesh.triangles)
        rep = validate_properly_embedded(moved)
        assert not rep.properly_embedded
        kinds = {k for k, _ in rep.offending_items}
        assert "boundary_vertex_off_sphere" in kinds

    def test_interior_vertex_at_radius_one(self):
        disc = flat_disc(radius=1.0)
        # boundary is off the unit sphere only at... it IS on the sphere;
        # push one interior vertex out to the sphere
        verts = disc.vertices.copy()
        verts[0] = [0.0, 0.0, 1.0]
        rep = validate_properly_embedded(TriMesh(verts, disc.triangles))
        assert not rep.properly_embedded
        kinds = {k for k, _ in rep.offending_items}
        assert "interior_vertex_at_sphere" in kinds

    def test_report_json_stable_fields(self):
        rep = validate_properly_embedded(gen("(())"))
        js = rep.to_json()
        assert set(js) == {
            "properly_embedded", "self_intersecting", "connected", "orientable",
            "manifold", "boundary_on_sphere", "interior_inside", "offending_items",
            "margins",
        }

    def test_ball_radius_scaling(self):
        mesh = gen("(())")
        scaled = TriMesh(mesh.vertices * 2.0, mesh.triangles)
        assert validate_properly_embedded(scaled, BallDomain(2.0)).properly_embedded
        assert not validate_properly_embedded(scaled, BallDomain(1.0)).properly_embedded


class TestInvariants:
    def test_disc_annulus_genus(self):
        assert genus_and_boundary(flat_disc()) == (0, 1)
        # annulus: cylinder wall
        n = 12
        verts = []
        for z in (0.0, 1.0):
            for j in range(n):
                a = 2 * np.pi * j / n
                verts.append([np.cos(a), np.sin(a), z])
        tris = []
        for j in range(n):
            jn = (j + 1) % n
            tris.append((j, n + j, n + jn))
            tris.append((j, n + jn, jn))
        annulus = TriMesh(np.array(verts), np.array(tris))
        assert genus_and_boundary(annulus) == (0, 2)

    def test_model_p4_g2(self):
        assert genus_and_boundary(gen(P4, 2)) == (2, 3)

    def test_chi_relation_exact(self):
        for text, g in [("(())", 0), (STAR4, 1), (P4, 2)]:
            mesh = gen(text, g)
            genus, b = genus_and_boundary(mesh)
            assert mesh.euler_characteristic() + 2 * genus + b == 2

    def test_boundary_graph_of_surface(self):
        t = boundary_graph_of_surface(gen("(())"))
        assert trees_isomorphic(t, parse_tree("(())"))
        t = boundary_graph_of_surface(gen(STAR4))
        assert trees_isomorphic(t, parse_tree(STAR4))
        assert is_tree(t)

    def test_boundary_graph_requires_validity(self):
        mesh = gen("(())")
        moved = TriMesh(mesh.vertices + np.array([0.2, 0, 0]), mesh.triangles)
        with pytest.raises(InvalidSurfaceError):
            boundary_graph_of_surface(moved)


class TestSignature:
    def test_disc_signature(self):
        sig = isotopy_signature(gen("(())"))
        assert sig == Signature(0, "(())")
        assert sig.display() == "g=0;tree=(())"

    def test_fig1_arrangements_differ(self):
        nested = isotopy_signature(gen(P4, 1))
        star = isotopy_signature(gen(STAR4, 1))
        assert nested.genus == star.genus == 1
        assert nested != star

    def test_isotopy_equivalent(self):
        assert isotopy_equivalent(gen(STAR4), gen(STAR4, res=16))
        assert not isotopy_equivalent(gen(STAR4), gen(P4))
        assert not isotopy_equivalent(gen(STAR4, 1), gen(STAR4, 0))

    def test_rotation_invariance(self):
        mesh = gen("((())())", genus=1)
        base = isotopy_signature(mesh)
        rng = np.random.default_rng(5)
        for _ in range(3):
            rot = mesh.transformed(random_rotation(rng))
            assert isotopy_signature(rot) == base

    def test_reflection_invariance(self):
        mesh = gen("((())())")
        refl = TriMesh(mesh.vertices * np.array([1.0, -1.0, 1.0]), mesh.triangles)
        assert isotopy_signature(refl) == isotopy_signature(mesh)

    def test_signature_matches_spec_inputs(self):
        for text, g in [("(()())", 0), (P4, 1)]:
            sig = isotopy_signature(gen(text, g))
            assert sig.genus == g
            assert sig.boundary_tree == ahu_code(parse_tree(text))
