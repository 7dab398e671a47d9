"""Acceptance criteria for the toolkit, one test per criterion.

Each test prints a PASS/FAIL line (run with -s to see them) and enforces the
stated runtime budget on top of the functional assertions.
"""

import json
import time
from contextlib import contextmanager

import numpy as np
import pytest

from unknotkit.analysis import isotopy_signature, self_intersects, validate_properly_embedded
from unknotkit.arrangement import boundary_graph, sphere_boundary_graph
from unknotkit.cli import run as cli_run
from unknotkit.mesh import obj_bytes
from unknotkit.modelsurface import ModelSurfaceSpec, generate_model_surface
from unknotkit.shrinkers import HEEGAARD_RADIUS, builtin_shrinker, graph_at_infinity
from unknotkit.trees import (
    Tree,
    ahu_code,
    as_tree,
    cayley_lower_bound,
    enumerate_free_trees,
    is_tree,
    parse_tree,
    trees_isomorphic,
)

from fixtures_meshes import meridian_cycle, torus_grid
from oracles import (
    floodfill_tree_oracle,
    free_tree_codes_prufer,
    mesh_self_intersects_allpairs,
    random_nested_loops,
)

STAR4 = parse_tree("(()()())")
P4 = parse_tree("(((())))")


@contextmanager
def criterion(number, name, budget_seconds):
    start = time.perf_counter()
    try:
        yield
        elapsed = time.perf_counter() - start
        print(f"\nACCEPTANCE {number} ({name}): PASS [{elapsed:.2f}s / {budget_seconds}s]")
        assert elapsed < budget_seconds, f"runtime {elapsed:.1f}s exceeds {budget_seconds}s"
    except BaseException:
        elapsed = time.perf_counter() - start
        print(f"\nACCEPTANCE {number} ({name}): FAIL [{elapsed:.2f}s]")
        raise


_FAMILY: dict[tuple[str, int], object] = {}


def family_meshes():
    """All trees on <= 7 vertices at genus 0..2, resolution 32 (cached)."""
    if not _FAMILY:
        for n in range(1, 8):
            for code in enumerate_free_trees(n):
                for g in (0, 1, 2):
                    spec = ModelSurfaceSpec(tree=parse_tree(code), genus=g, resolution=32)
                    _FAMILY[(code, g)] = generate_model_surface(spec)
    return _FAMILY


def cap_loop(center, alpha, n=48):
    center = np.asarray(center, float)
    center = center / np.linalg.norm(center)
    helper = np.array([0.0, 0.0, 1.0]) if abs(center[2]) < 0.9 else np.array([1.0, 0.0, 0.0])
    u1 = np.cross(helper, center)
    u1 /= np.linalg.norm(u1)
    u2 = np.cross(center, u1)
    ts = np.linspace(0, 2 * np.pi, n, endpoint=False)
    from unknotkit.arrangement import SphericalLoop

    return SphericalLoop(
        np.cos(alpha) * center + np.sin(alpha) * (np.cos(ts)[:, None] * u1 + np.sin(ts)[:, None] * u2)
    )


@pytest.fixture(scope="module")
def warmed_up():
    # first-call numpy/library warmup must not count against the budgets
    mesh = generate_model_surface(ModelSurfaceSpec(tree=parse_tree("(())"), resolution=12))
    isotopy_signature(mesh)
    return True


def test_criterion_1_figure_arrangements(warmed_up):
    with criterion(1, "star vs nested-path arrangements", 1.0):
        star_mesh = generate_model_surface(ModelSurfaceSpec(tree=STAR4, resolution=12))
        path_mesh = generate_model_surface(ModelSurfaceSpec(tree=P4, resolution=12))
        sig_star = isotopy_signature(star_mesh)
        sig_path = isotopy_signature(path_mesh)
        assert sig_star.boundary_tree == ahu_code(STAR4)
        assert sig_path.boundary_tree == ahu_code(P4)

        # same trees from raw loop arrangements on the sphere
        caps = [cap_loop([1, 0, 0], 0.4), cap_loop([-0.5, 0.8, 0], 0.4),
                cap_loop([0, -0.6, -0.8], 0.4)]
        nested = [cap_loop([0, 0, 1], 1.1), cap_loop([0, 0, 1], 0.7),
                  cap_loop([0, 0, 1], 0.3)]
        assert trees_isomorphic(sphere_boundary_graph(caps), STAR4)
        assert trees_isomorphic(sphere_boundary_graph(nested), P4)

        assert not trees_isomorphic(STAR4, P4)


def test_criterion_2_round_trip():
    with criterion(2, "signature round-trip, trees <= 7, genus 0..2", 120.0):
        meshes = family_meshes()
        assert len(meshes) == (1 + 1 + 1 + 2 + 3 + 6 + 11) * 3
        for (code, g), mesh in meshes.items():
            sig = isotopy_signature(mesh)
            assert sig.genus == g, (code, g)
            assert sig.boundary_tree == code, (code, g)


def test_criterion_3_embeddedness():
    with criterion(3, "proper embedding of every generated mesh", 300.0):
        meshes = family_meshes()
        for (code, g), mesh in meshes.items():
            rep = validate_properly_embedded(mesh)
            assert rep.properly_embedded, (code, g, rep.offending_items[:4])
            assert not rep.self_intersecting

        rng = np.random.default_rng(2024)
        keys = sorted(meshes)
        picks = rng.choice(len(keys), size=10, replace=False)
        for k in picks:
            code, g = keys[int(k)]
            low = generate_model_surface(
                ModelSurfaceSpec(tree=parse_tree(code), genus=g, resolution=12)
            )
            assert self_intersects(low) == mesh_self_intersects_allpairs(low) == False  # noqa: E712


def test_criterion_4_tree_property_randomized():
    with criterion(4, "200 random loop sets give trees matching the oracle", 60.0):
        rng = np.random.default_rng(7)
        for trial in range(200):
            loops, expected = random_nested_loops(rng)
            t = sphere_boundary_graph(loops)
            assert is_tree(t), trial
            assert t.edge_count == len(loops), trial
            assert trees_isomorphic(t, expected), trial
            oracle = floodfill_tree_oracle(loops)
            assert trees_isomorphic(t, oracle), trial


def test_criterion_5_multigraph_cases():
    with criterion(5, "torus curves give the loop and parallel-edge graphs", 30.0):
        mesh, vid = torus_grid(n_u=16, n_v=10)
        g1 = boundary_graph(mesh, [meridian_cycle(vid, 0)])
        assert g1.vertex_count == 1
        assert g1.edges == ((0, 0),)
        g2 = boundary_graph(mesh, [meridian_cycle(vid, 0), meridian_cycle(vid, 8)])
        assert g2.vertex_count == 2
        assert sorted(g2.edges) == [(0, 1), (0, 1)]


def test_criterion_6_enumeration():
    with criterion(6, "free-tree counts match the labelled enumeration", 30.0):
        expected = [1, 1, 1, 2, 3, 6, 11, 23]
        for n in range(1, 9):
            codes = enumerate_free_trees(n)
            oracle = free_tree_codes_prufer(n, ahu_code)
            assert set(codes) == oracle, n
            assert len(codes) == expected[n - 1], n
            assert cayley_lower_bound(n) <= len(codes), n


def test_criterion_7_shrinker_vertex_counts():
    with criterion(7, "genus-zero end models stabilize to 2/1/3 vertices", 30.0):
        expected = {"plane": 2, "sphere2": 1, "cylinder2": 3}
        for kind, n_vertices in expected.items():
            mesh = builtin_shrinker(kind, extent=16, resolution=48)
            rep = graph_at_infinity(mesh, HEEGAARD_RADIUS, 12.0)
            assert rep.stabilized, kind
            tree = parse_tree(rep.graph_at_infinity)
            assert tree.vertex_count == n_vertices, kind


def test_criterion_8_root_independence():
    with criterion(8, "signatures independent of the root choice", 180.0):
        for n in range(1, 7):
            for code in enumerate_free_trees(n):
                tree = parse_tree(code)
                signatures = set()
                for root in range(tree.vertex_count):
                    mesh = generate_model_surface(
                        ModelSurfaceSpec(tree=tree, genus=0, root_vertex=root, resolution=24)
                    )
                    signatures.add(isotopy_signature(mesh).display())
                assert len(signatures) == 1, (code, signatures)


def test_criterion_9_determinism(tmp_path, capsys):
    with criterion(9, "byte-identical outputs for identical flags and seed", 60.0):
        outs = []
        for name in ("one", "two"):
            obj = tmp_path / f"{name}.obj"
            assert cli_run(
                ["generate", "--tree", "((())())", "--genus", "1",
                 "--resolution", "24", "-o", str(obj), "--json"]
            ) == 0
            stdout = capsys.readouterr().out
            payload = json.loads(stdout)
            payload.pop("output"), payload.pop("sidecar")
            outs.append((obj.read_bytes(), (tmp_path / f"{name}.obj.json").read_text(),
                         json.dumps(payload)))
        assert outs[0][0] == outs[1][0]
        assert outs[0][1] == outs[1][1]
        assert outs[0][2] == outs[1][2]

        reports = []
        for _ in range(2):
            assert cli_run(
                ["shrinker-graph", "--builtin", "cylinder2", "--rmin", "2.8285",
                 "--rmax", "12", "--resolution", "32", "--seed", "0", "--json"]
            ) == 0
            reports.append(capsys.readouterr().out)
        assert reports[0] == reports[1]

        spec = ModelSurfaceSpec(tree=parse_tree("(()())"), genus=2, resolution=20)
        assert obj_bytes(generate_model_surface(spec)) == obj_bytes(generate_model_surface(spec))
