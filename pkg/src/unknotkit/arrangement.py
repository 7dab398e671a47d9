"""Region decompositions and boundary graphs of disjoint simple closed curves.

Two input routes are supported.  On a general triangulated surface the curves
must be cycles of mesh edges and regions are found by flood fill over
triangles.  On the round unit sphere the curves may be arbitrary closed
polylines; the nesting structure is recovered with crossing-parity tests
along great-circle arcs to a randomized reference point, and the resulting
region adjacency is always a tree.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .geom import EPS, segment_segment_distance
from .mesh import MeshTopologyError, TriMesh
from .trees import Multigraph, Tree

__all__ = [
    "LoopGeometryError",
    "CurveError",
    "SphericalLoop",
    "RegionDecomposition",
    "region_decomposition",
    "boundary_graph",
    "sphere_boundary_graph",
    "read_loops_jsonl",
    "write_loops_jsonl",
]

_DET_TOL = 1e-12
_UNIT_ATOL = 1e-6


class CurveError(ValueError):
    """A curve input violates the edge-cycle requirements."""


class LoopGeometryError(ValueError):
    """A spherical loop set violates simplicity/disjointness, or predicates degenerate."""


class SphericalLoop:
    """Closed simple polyline on the unit sphere.

    Points are radially projected onto the sphere; inputs farther than 1e-6
    from unit length are rejected rather than silently rescaled.
    """

    def __init__(self, points):
        pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
        if len(pts) < 3:
            raise LoopGeometryError(f"degenerate loop: {len(pts)} points, need at least 3")
        norms = np.linalg.norm(pts, axis=1)
        if np.any(np.abs(norms - 1.0) > _UNIT_ATOL):
            worst = float(np.max(np.abs(norms - 1.0)))
            raise LoopGeometryError(
                f"loop points must lie on the unit sphere (max deviation {worst:.3g})"
            )
        self.points = pts / norms[:, None]
        segs = np.roll(self.points, -1, axis=0) - self.points
        if np.any(np.linalg.norm(segs, axis=1) < 10 * EPS):
            raise LoopGeometryError("loop has a zero-length segment")

    def __len__(self) -> int:
        return len(self.points)

    def segments(self) -> tuple[np.ndarray, np.ndarray]:
        return self.points, np.roll(self.points, -1, axis=0)


# ---------------------------------------------------------------------------
# Flood-fill route: curves as mesh-edge cycles
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RegionDecomposition:
    """Connected components of the surface cut along the curves.

    Region indices are assigned by the smallest triangle index each region
    contains, so the labelling does not depend on traversal order.
    `curve_sides[i]` holds the pair of region indices on the two sides of
    curve i (equal for a non-separating curve).
    """

    region_of_triangle: np.ndarray
    region_count: int
    curve_sides: tuple[tuple[int, int], ...]


def _validate_cycles(mesh: TriMesh, curves: Sequence[Sequence[int]]) -> list[list[int]]:
    ef = mesh.edge_faces()
    if not mesh.is_edge_manifold():
        bad = mesh.nonmanifold_edges()[0]
        raise MeshTopologyError(f"mesh is not edge-manifold (edge {bad})")
    seen_vertices: set[int] = set()
    cycles = []
    for ci, raw in enumerate(curves):
        cyc = [int(v) for v in raw]
        if len(cyc) >= 2 and cyc[0] == cyc[-1]:
            cyc = cyc[:-1]  # tolerate explicitly closed input
        if len(cyc) < 3:
            raise CurveError(f"curve {ci}: a simple closed mesh walk needs >= 3 vertices")
        if len(set(cyc)) != len(cyc):
            raise CurveError(f"curve {ci}: repeated vertex; the walk must be simple")
        overlap = seen_vertices.intersection(cyc)
        if overlap:
            raise CurveError(f"curve {ci}: shares vertex {min(overlap)} with another curve")
        seen_vertices.update(cyc)
        for k in range(len(cyc)):
            u, v = cyc[k], cyc[(k + 1) % len(cyc)]
            e = (u, v) if u < v else (v, u)
            faces = ef.get(e)
            if faces is None:
                raise CurveError(f"curve {ci}: ({u},{v}) is not a mesh edge")
            if len(faces) != 2:
                raise CurveError(
                    f"curve {ci}: edge ({u},{v}) borders {len(faces)} triangle(s); "
                    "curves must run along interior edges"
                )
        cycles.append(cyc)
    return cycles


def region_decomposition(
    mesh: TriMesh, curves: Sequence[Sequence[int]]
) -> RegionDecomposition:
    """Flood-fill the triangles of `mesh` without crossing any curve edge."""
    cycles = _validate_cycles(mesh, curves)
    blocked: set[tuple[int, int]] = set()
    for cyc in cycles:
        for k in range(len(cyc)):
            u, v = cyc[k], cyc[(k + 1) % len(cyc)]
            blocked.add((u, v) if u < v else (v, u))

    m = mesh.triangle_count
    label = np.full(m, -1, dtype=np.int64)
    ef = mesh.edge_faces()
    neighbors: list[list[int]] = [[] for _ in range(m)]
    for e, faces in ef.items():
        if len(faces) == 2 and e not in blocked:
            a, b = faces
            neighbors[a].append(b)
            neighbors[b].append(a)

    comp = 0
    for seed in range(m):
        if label[seed] >= 0:
            continue
        stack = [seed]
        label[seed] = comp
        while stack:
            t = stack.pop()
            for u in neighbors[t]:
                if label[u] < 0:
                    label[u] = comp
                    stack.append(u)
        comp += 1
    # seeds are scanned in increasing triangle order, so component ids are
    # already ordered by smallest contained triangle
    sides = []
    for cyc in cycles:
        u, v = cyc[0], cyc[1]
        e = (u, v) if u < v else (v, u)
        t1, t2 = sorted(ef[e])
        sides.append((int(label[t1]), int(label[t2])))
    return RegionDecomposition(label, comp, tuple(sides))


def boundary_graph(mesh: TriMesh, curves: Sequence[Sequence[int]]) -> Multigraph:
    """One vertex per region, one edge per curve joining its two side regions."""
    dec = region_decomposition(mesh, curves)
    return Multigraph(dec.region_count, dec.curve_sides)


# ---------------------------------------------------------------------------
# Round-sphere route: nesting of arbitrary polyline loops
# ---------------------------------------------------------------------------

def _point_segment_distance(p: np.ndarray, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = b - a
    t = np.einsum("...i,...i->...", p - a, d) / np.einsum("...i,...i->...", d, d)
    t = np.clip(t, 0.0, 1.0)
    closest = a + t[..., None] * d
    return np.linalg.norm(p - closest, axis=-1)


def validate_loop_set(loops: Sequence[SphericalLoop]) -> None:
    """Reject loops that self-intersect or approach each other within 2*EPS."""
    for li, loop in enumerate(loops):
        a, b = loop.segments()
        n = len(loop)
        if n > 3:
            d = segment_segment_distance(a[:, None], b[:, None], a[None, :], b[None, :])
            idx = np.arange(n)
            gap = np.abs(idx[:, None] - idx[None, :])
            adjacent = (gap <= 1) | (gap == n - 1)
            d[adjacent] = np.inf
            if float(d.min()) <= 2 * EPS:
                raise LoopGeometryError(f"loop {li} is not simple (self distance <= 2*EPS)")
    for i in range(len(loops)):
        ai, bi = loops[i].segments()
        for j in range(i + 1, len(loops)):
            aj, bj = loops[j].segments()
            d = segment_segment_distance(ai[:, None], bi[:, None], aj[None, :], bj[None, :])
            if float(d.min()) <= 2 * EPS:
                raise LoopGeometryError(
                    f"loops {i} and {j} intersect or touch within tolerance"
                )


class _DegenerateReference(Exception):
    pass


def _crossing_parity(q: np.ndarray, ref: np.ndarray, loop: SphericalLoop) -> int:
    """Parity of transversal crossings of the minor arc q->ref with `loop`.

    Raises _DegenerateReference when any orientation determinant is too close
    to zero to trust, which the caller handles by drawing a new reference.
    """
    n1 = np.cross(q, ref)
    if np.linalg.norm(n1) < 1e-6:  # q and ref nearly parallel or antipodal
        raise _DegenerateReference
    c, d = loop.segments()
    d1 = c @ n1
    d2 = d @ n1
    n2 = np.cross(c, d)
    d3 = n2 @ q
    d4 = n2 @ ref
    dets = np.stack([d1, d2, d3, d4])
    if float(np.min(np.abs(dets))) < _DET_TOL:
        raise _DegenerateReference
    crossings = (d1 * d2 < 0) & (d3 * d4 < 0) & (d1 * d4 > 0)
    return int(np.count_nonzero(crossings)) & 1


def sphere_boundary_graph(
    loops: Sequence[SphericalLoop | np.ndarray],
    *,
    seed: int = 0,
    max_retries: int = 16,
) -> Tree:
    """Region-adjacency tree of disjoint simple loops on the unit sphere.

    Vertex 0 is the region containing the reference point; vertex i+1 is the
    region immediately inside loop i.  Edge i joins the two regions separated
    by loop i, so edges are index-aligned with the input loops.  The unrooted
    tree does not depend on the reference point.
    """
    loops = [lp if isinstance(lp, SphericalLoop) else SphericalLoop(lp) for lp in loops]
    validate_loop_set(loops)
    k = len(loops)
    if k == 0:
        return Tree(1)

    rng = np.random.default_rng(seed)
    test_points = _containment_test_points(loops)
    last_error: Exception | None = None
    for _ in range(max_retries):
        ref = rng.normal(size=3)
        ref /= np.linalg.norm(ref)
        # the reference point must stay clear of every loop
        clear = True
        for loop in loops:
            a, b = loop.segments()
            if float(_point_segment_distance(ref, a, b).min()) < 1e-7:
                clear = False
                break
        if not clear:
            continue
        try:
            inside = np.zeros((k, k), dtype=bool)  # inside[i, j]: loop j inside loop i
            for i, big in enumerate(loops):
                for j in range(k):
                    if i == j:
                        continue
                    inside[i, j] = _parity_with_fallbacks(test_points[j], ref, big)
            return _nesting_tree(inside)
        except _DegenerateReference as exc:  # try another reference point
            last_error = exc
            continue
    raise LoopGeometryError(
        f"no usable reference point after {max_retries} retries"
    ) from last_error


def _containment_test_points(loops: Sequence[SphericalLoop]) -> list[list[np.ndarray]]:
    """Candidate probe points per loop for the containment tests.

    A loop's vertices can be exactly antipodal to another loop's points
    (symmetric inputs do this) and even its normalized chord midpoints stay
    coplanar with the mirrored chords, degenerating every crossing
    determinant.  Offsetting sideways off the loop breaks this; any offset
    smaller than the clearance to the other loops classifies like the loop
    itself, no matter which side it lands on.
    """
    k = len(loops)
    clearance = []
    for j in range(k):
        dmin = np.inf
        for i in range(k):
            if i == j:
                continue
            diff = loops[j].points[:, None, :] - loops[i].points[None, :, :]
            dmin = min(dmin, float(np.sqrt((diff ** 2).sum(axis=2)).min()))
        clearance.append(1e-3 if not np.isfinite(dmin) else min(1e-3, 0.3 * dmin))

    out = []
    for j, loop in enumerate(loops):
        pts = loop.points
        n = len(pts)
        cands = []
        for s in (0, n // 3, (2 * n) // 3):
            p0, p1 = pts[s], pts[(s + 1) % n]
            side = np.cross(p0, p1 - p0)
            norm = float(np.linalg.norm(side))
            if norm < 1e-12:
                continue
            side /= norm
            for sign in (1.0, -1.0):
                q = p0 + sign * clearance[j] * side
                cands.append(q / np.linalg.norm(q))
        cands.append(pts[0])
        out.append(cands)
    return out


def _parity_with_fallbacks(candidates, ref, loop) -> bool:
    for q in candidates:
        try:
            return bool(_crossing_parity(q, ref, loop))
        except _DegenerateReference:
            continue
    raise _DegenerateReference


def _nesting_tree(inside: np.ndarray) -> Tree:
    k = len(inside)
    depth = inside.sum(axis=0)
    edges = []
    for j in range(k):
        containers = np.nonzero(inside[:, j])[0]
        if {int(depth[i]) for i in containers} != set(range(len(containers))):
            raise LoopGeometryError(
                "inconsistent nesting structure; loops may intersect or the "
                "containment tests degenerated"
            )
        if len(containers) == 0:
            parent_region = 0
        else:
            parent = int(containers[np.argmax(depth[containers])])
            parent_region = parent + 1
        edges.append((parent_region, j + 1))
    return Tree(k + 1, edges)


# ---------------------------------------------------------------------------
# Loop I/O: JSON-lines, one loop per line as [[x, y, z], ...]
# ---------------------------------------------------------------------------

def read_loops_jsonl(path_or_file) -> list[SphericalLoop]:
    own = isinstance(path_or_file, str) or hasattr(path_or_file, "__fspath__")
    f = open(path_or_file, "r") if own else path_or_file
    try:
        loops = []
        for lineno, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                arr = json.loads(line)
            except json.JSONDecodeError as exc:
                raise LoopGeometryError(f"line {lineno}: invalid JSON: {exc}") from exc
            loops.append(SphericalLoop(np.asarray(arr, dtype=float)))
        return loops
    finally:
        if own:
            f.close()


def write_loops_jsonl(loops: Sequence[SphericalLoop], path_or_file) -> None:
    own = isinstance(path_or_file, str) or hasattr(path_or_file, "__fspath__")
    f = open(path_or_file, "w", newline="\n") if own else path_or_file
    try:
        for loop in loops:
            f.write(json.dumps(loop.points.tolist()) + "\n")
    finally:
        if own:
            f.close()
