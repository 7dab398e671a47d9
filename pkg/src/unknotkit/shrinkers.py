"""Slice graphs at large radii and their stabilization for surfaces with ends.

A mesh standing in for a complete surface is cut with spheres of growing
radius; each cut gives a set of loops on the slicing sphere and hence a
region tree.  If the trailing slices all agree, the common tree is reported
as the graph at infinity, together with an estimate of the radius from which
it holds.  Built-in truncated models of the three genus-zero ends (plane,
sphere of radius 2, cylinder of radius 2) are provided.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .arrangement import SphericalLoop, sphere_boundary_graph
from .geom import EPS
from .mesh import TriMesh
from .trees import CanonicalCode, Multigraph, ahu_code, as_tree

__all__ = [
    "TransversalityError",
    "SliceResult",
    "StabilizationReport",
    "slice_graph",
    "graph_at_infinity",
    "builtin_shrinker",
    "HEEGAARD_RADIUS",
]

# smallest radius from which ball slices are meaningful for self-shrinker
# models (2 * sqrt(2))
HEEGAARD_RADIUS = 2.0 * math.sqrt(2.0)

DEFAULT_RADIUS_RATIO = 1.3


class TransversalityError(ValueError):
    """The slicing sphere is tangent to the mesh or cuts it along open curves."""


@dataclass(frozen=True)
class SliceResult:
    radius: float
    loops: tuple[SphericalLoop, ...]
    graph: Multigraph

    def canonical_code(self) -> CanonicalCode:
        return ahu_code(as_tree(self.graph))


@dataclass(frozen=True)
class StabilizationReport:
    radii_tested: tuple[float, ...]
    stabilized: bool
    r0_estimate: float | None
    graph_at_infinity: CanonicalCode | None

    def to_json(self) -> dict:
        return {
            "radii_tested": list(self.radii_tested),
            "stabilized": self.stabilized,
            "r0_estimate": self.r0_estimate,
            "graph_at_infinity": self.graph_at_infinity,
        }


def slice_graph(mesh: TriMesh, radius: float, *, seed: int = 0) -> SliceResult:
    """Intersect the mesh with the sphere of the given radius.

    The intersection polylines are chained across triangles, rescaled to the
    unit sphere, and fed to the spherical region engine.  Requires the sphere
    to be transversal: no mesh vertex may sit on it within tolerance, and the
    crossing curves must close up.
    """
    if radius <= 0:
        raise ValueError("slice radius must be positive")
    verts = mesh.vertices
    tris = mesh.triangles
    dist = np.linalg.norm(verts, axis=1) - radius
    # stricter than the nominal predicate tolerance: crossings clustered
    # around a nearly-grazed vertex degenerate the intersection polylines
    tol = 1e-7 * max(1.0, radius)
    grazing = np.abs(dist) <= tol
    if grazing.any():
        raise TransversalityError(
            f"{int(grazing.sum())} mesh vertices lie on the slice sphere "
            f"R={radius!r}; retry with a slightly jittered radius"
        )
    sign = dist > 0

    tri_signs = sign[tris]
    crossing = np.nonzero(tri_signs.any(axis=1) & ~tri_signs.all(axis=1))[0]
    if len(crossing) == 0:
        return SliceResult(radius, (), Multigraph(1))

    def edge_key(u, v):
        return (u, v) if u < v else (v, u)

    def crossing_point(u, v):
        a, b = verts[u], verts[v]
        d = b - a
        aa = float(d @ d)
        bb = 2.0 * float(a @ d)
        cc = float(a @ a) - radius * radius
        disc = bb * bb - 4 * aa * cc
        if disc < 0:
            raise TransversalityError("numerical failure solving an edge crossing")
        sq = math.sqrt(disc)
        for t in ((-bb - sq) / (2 * aa), (-bb + sq) / (2 * aa)):
            if -1e-12 <= t <= 1 + 1e-12:
                return a + min(max(t, 0.0), 1.0) * d
        raise TransversalityError("edge crossing parameter out of range")

    # one intersection point per crossing edge; one segment per crossing triangle
    points: dict[tuple[int, int], np.ndarray] = {}
    tri_edges: dict[int, list[tuple[int, int]]] = {}
    edge_tris: dict[tuple[int, int], list[int]] = {}
    for t in crossing:
        a, b, c = tris[t]
        keys = []
        for u, v in ((a, b), (b, c), (c, a)):
            if sign[u] != sign[v]:
                k = edge_key(int(u), int(v))
                keys.append(k)
                if k not in points:
                    points[k] = crossing_point(*k)
                edge_tris.setdefault(k, []).append(int(t))
        if len(keys) != 2:
            raise TransversalityError(
                f"triangle {t} crosses the slice sphere along {len(keys)} edges"
            )
        tri_edges[int(t)] = keys

    for k, ts in edge_tris.items():
        if len(ts) != 2:
            raise TransversalityError(
                "open intersection curve: the mesh is not closed across the "
                f"slice sphere (edge {k})"
            )

    # walk the crossing triangles into closed loops
    unvisited = set(tri_edges)
    loops: list[np.ndarray] = []
    while unvisited:
        t0 = min(unvisited)
        loop_pts = []
        t = t0
        enter = tri_edges[t][0]
        while True:
            unvisited.discard(t)
            exit_edge = tri_edges[t][1] if tri_edges[t][0] == enter else tri_edges[t][0]
            loop_pts.append(points[exit_edge])
            nxt = [x for x in edge_tris[exit_edge] if x != t][0]
            if nxt == t0:
                break
            t, enter = nxt, exit_edge
        loops.append(np.array(loop_pts))

    spherical = tuple(SphericalLoop(lp / radius) for lp in loops)
    tree = sphere_boundary_graph(spherical, seed=seed)
    return SliceResult(radius, spherical, Multigraph(tree.vertex_count, tree.edges))


def _slice_with_jitter(mesh, radius, rng, *, seed, retries=8, rel_jitter=1e-4):
    from .arrangement import LoopGeometryError

    last: Exception | None = None
    r = radius
    for attempt in range(retries + 1):
        try:
            return slice_graph(mesh, r, seed=seed)
        except (TransversalityError, LoopGeometryError) as exc:
            last = exc
            r = radius * (1.0 + rel_jitter * float(rng.uniform(-1.0, 1.0)))
    raise TransversalityError(
        f"no transversal slice near R={radius!r} after {retries} jitter retries"
    ) from last


def default_steps(r_min: float, r_max: float, ratio: float = DEFAULT_RADIUS_RATIO) -> int:
    """Number of geometrically spaced radii at the default growth ratio."""
    return max(2, int(math.floor(math.log(r_max / r_min) / math.log(ratio))) + 1)


def graph_at_infinity(
    mesh: TriMesh,
    r_min: float = HEEGAARD_RADIUS,
    r_max: float = 12.0,
    steps: int | None = None,
    *,
    seed: int = 0,
) -> StabilizationReport:
    """Slice at geometrically spaced radii and test the trailing half for agreement.

    Stabilization means the last ceil(steps/2) slice graphs are pairwise
    isomorphic; the reported radius estimate is the smallest tested radius
    from which every later slice agrees.
    """
    if r_min < HEEGAARD_RADIUS - 1e-12:
        raise ValueError(f"r_min must be at least 2*sqrt(2) ~ {HEEGAARD_RADIUS:.6f}")
    if not r_max > r_min:
        raise ValueError("r_max must exceed r_min")
    if steps is None:
        steps = default_steps(r_min, r_max)
    if steps < 2:
        raise ValueError("need at least 2 slice radii")

    radii = np.geomspace(r_min, r_max, steps)
    rng = np.random.default_rng(seed)
    codes = []
    for r in radii:
        result = _slice_with_jitter(mesh, float(r), rng, seed=seed)
        codes.append(result.canonical_code())

    tail = math.ceil(steps / 2)
    stabilized = len(set(codes[-tail:])) == 1
    r0 = None
    code = None
    if stabilized:
        code = codes[-1]
        idx = len(codes) - 1
        while idx > 0 and codes[idx - 1] == code:
            idx -= 1
        r0 = float(radii[idx])
    return StabilizationReport(tuple(float(r) for r in radii), stabilized, r0, code)


# ---------------------------------------------------------------------------
# Built-in truncated end models
# ---------------------------------------------------------------------------

def builtin_shrinker(kind: str, extent: float = 16.0, resolution: int = 64) -> TriMesh:
    """Truncated models of the genus-zero ends.

    plane     flat disc of the given radius through the origin;
    sphere2   round sphere of radius 2 (compact, no truncation);
    cylinder2 cylinder of radius 2 about the z-axis, height 2*extent, open ends.
    """
    if resolution < 12:
        raise ValueError("resolution must be at least 12")
    if kind == "plane":
        if extent <= 4:
            raise ValueError("plane extent must exceed 4")
        return _disc_mesh(extent, resolution)
    if kind == "sphere2":
        return _uv_sphere_mesh(2.0, resolution)
    if kind == "cylinder2":
        if extent <= 4:
            raise ValueError("cylinder extent must exceed 4")
        return _open_cylinder_mesh(2.0, extent, resolution)
    raise ValueError(f"unknown builtin {kind!r}; expected plane, sphere2 or cylinder2")


def _disc_mesh(radius: float, res: int) -> TriMesh:
    n_rings = max(4, res // 4)
    verts = [np.zeros(3)]
    rings = []
    for i in range(1, n_rings + 1):
        r = radius * i / n_rings
        ring = []
        for j in range(res):
            a = 2 * math.pi * j / res
            ring.append(len(verts))
            verts.append(np.array([r * math.cos(a), r * math.sin(a), 0.0]))
        rings.append(ring)
    tris = []
    for j in range(res):
        tris.append((0, rings[0][j], rings[0][(j + 1) % res]))
    for i in range(n_rings - 1):
        a, b = rings[i], rings[i + 1]
        for j in range(res):
            jn = (j + 1) % res
            tris.append((a[j], b[j], b[jn]))
            tris.append((a[j], b[jn], a[jn]))
    return TriMesh(np.array(verts), np.array(tris, dtype=np.int64))


def _uv_sphere_mesh(radius: float, res: int) -> TriMesh:
    n_lat = max(5, res // 2)
    verts = [np.array([0.0, 0.0, radius])]
    rings = []
    for i in range(1, n_lat):
        th = math.pi * i / n_lat
        ring = []
        for j in range(res):
            a = 2 * math.pi * j / res
            ring.append(len(verts))
            verts.append(
                radius
                * np.array([math.sin(th) * math.cos(a), math.sin(th) * math.sin(a), math.cos(th)])
            )
        rings.append(ring)
    south = len(verts)
    verts.append(np.array([0.0, 0.0, -radius]))
    tris = []
    for j in range(res):
        tris.append((0, rings[0][j], rings[0][(j + 1) % res]))
    for i in range(len(rings) - 1):
        a, b = rings[i], rings[i + 1]
        for j in range(res):
            jn = (j + 1) % res
            tris.append((a[j], b[j], b[jn]))
            tris.append((a[j], b[jn], a[jn]))
    for j in range(res):
        tris.append((south, rings[-1][(j + 1) % res], rings[-1][j]))
    return TriMesh(np.array(verts), np.array(tris, dtype=np.int64))


def _open_cylinder_mesh(radius: float, half_height: float, res: int) -> TriMesh:
    n_seg = max(8, res // 2)
    verts = []
    rings = []
    for i in range(n_seg + 1):
        z = -half_height + 2 * half_height * i / n_seg
        ring = []
        for j in range(res):
            a = 2 * math.pi * j / res
            ring.append(len(verts))
            verts.append(np.array([radius * math.cos(a), radius * math.sin(a), z]))
        rings.append(ring)
    tris = []
    for i in range(n_seg):
        a, b = rings[i], rings[i + 1]
        for j in range(res):
            jn = (j + 1) % res
            tris.append((a[j], b[j], b[jn]))
            tris.append((a[j], b[jn], a[jn]))
    return TriMesh(np.array(verts), np.array(tris, dtype=np.int64))
