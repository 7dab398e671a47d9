"""Validation and topological invariants of embedded surfaces in a ball.

The complete isotopy invariant computed here is the pair (genus, canonical
boundary tree): genus from the Euler characteristic, the tree from the
nesting of the radially projected boundary loops.  Meshes are screened first:
manifold, connected, orientable, self-intersection-free, boundary on the
ball's sphere, interior strictly inside.
"""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .arrangement import SphericalLoop, sphere_boundary_graph
from .geom import EPS
from .mesh import TriMesh
from .modelsurface import BallDomain
from .trees import CanonicalCode, Tree, ahu_code

__all__ = [
    "BallDomain",
    "Signature",
    "ValidationReport",
    "InvalidSurfaceError",
    "self_intersects",
    "self_intersecting_pairs",
    "validate_properly_embedded",
    "genus_and_boundary",
    "boundary_graph_of_surface",
    "isotopy_signature",
    "isotopy_equivalent",
    "HYPOTHESIS_NOTE",
]

HYPOTHESIS_NOTE = (
    "Equal signatures decide the smooth isotopy class for surfaces satisfying "
    "the classification hypotheses (free boundary minimal surfaces, or more "
    "generally strong Heegaard splittings of the ball). For arbitrary meshes "
    "an equal signature is a necessary condition only."
)


@dataclass(frozen=True)
class Signature:
    """Complete isotopy invariant: genus and canonical boundary tree."""

    genus: int
    boundary_tree: CanonicalCode

    def display(self) -> str:
        return f"g={self.genus};tree={self.boundary_tree}"

    def to_json(self) -> dict:
        return {"genus": self.genus, "boundary_tree": self.boundary_tree,
                "display": self.display()}


@dataclass
class ValidationReport:
    properly_embedded: bool = False
    self_intersecting: bool = False
    connected: bool = False
    orientable: bool = False
    manifold: bool = False
    boundary_on_sphere: bool = False
    interior_inside: bool = False
    offending_items: list = field(default_factory=list)
    boundary_sphericity_error: float = 0.0
    interior_clearance: float = 0.0

    @property
    def margins(self) -> tuple[float, float]:
        return (self.boundary_sphericity_error, self.interior_clearance)

    def to_json(self) -> dict:
        return {
            "properly_embedded": self.properly_embedded,
            "self_intersecting": self.self_intersecting,
            "connected": self.connected,
            "orientable": self.orientable,
            "manifold": self.manifold,
            "boundary_on_sphere": self.boundary_on_sphere,
            "interior_inside": self.interior_inside,
            "offending_items": [[kind, data] for kind, data in self.offending_items],
            "margins": {
                "boundary_sphericity_error": self.boundary_sphericity_error,
                "interior_clearance": self.interior_clearance,
            },
        }


class InvalidSurfaceError(ValueError):
    """Raised by operations whose preconditions require a valid embedding."""

    def __init__(self, message: str, report: ValidationReport | None = None):
        super().__init__(message)
        self.report = report


# ---------------------------------------------------------------------------
# Triangle-triangle intersection, vectorized over candidate pairs
# ---------------------------------------------------------------------------

def _dots(a, b):
    return np.einsum("...i,...i->...", a, b)


def _tri_pairs_intersect(p: np.ndarray, q: np.ndarray, eps: float) -> np.ndarray:
    """Boolean intersection mask for triangle pairs p[i] vs q[i] ((n,3,3) each)."""
    n = len(p)
    out = np.zeros(n, dtype=bool)
    if n == 0:
        return out

    n_q = np.cross(q[:, 1] - q[:, 0], q[:, 2] - q[:, 0])
    d_p = _dots(n_q[:, None, :], p - q[:, 0][:, None, :])  # (n, 3)
    n_p = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    d_q = _dots(n_p[:, None, :], q - p[:, 0][:, None, :])

    # scale-aware tolerance per pair
    scale_q = np.linalg.norm(n_q, axis=1)
    scale_p = np.linalg.norm(n_p, axis=1)
    tol_p = eps * np.maximum(scale_q, 1e-300)
    tol_q = eps * np.maximum(scale_p, 1e-300)

    sep = (np.all(d_p > tol_p[:, None], axis=1) | np.all(d_p < -tol_p[:, None], axis=1)
           | np.all(d_q > tol_q[:, None], axis=1) | np.all(d_q < -tol_q[:, None], axis=1))
    active = ~sep
    if not active.any():
        return out

    coplanar = active & np.all(np.abs(d_p) <= tol_p[:, None], axis=1) \
        & np.all(np.abs(d_q) <= tol_q[:, None], axis=1)
    general = active & ~coplanar

    idx = np.nonzero(general)[0]
    if len(idx):
        hit = np.zeros(len(idx), dtype=bool)
        hit |= _edges_cross_triangle(p[idx], q[idx], d_p[idx], tol_p[idx])
        hit |= _edges_cross_triangle(q[idx], p[idx], d_q[idx], tol_q[idx])
        out[idx] = hit

    cdx = np.nonzero(coplanar)[0]
    if len(cdx):
        out[cdx] = _coplanar_pairs_overlap(p[cdx], q[cdx], n_p[cdx])
    return out


def _edges_cross_triangle(p, q, d_p, tol):
    """For each pair: does some edge of p cross the plane of q inside q?"""
    n = len(p)
    hit = np.zeros(n, dtype=bool)
    q0, q1, q2 = q[:, 0], q[:, 1], q[:, 2]
    v0 = q1 - q0
    v1 = q2 - q0
    d00 = _dots(v0, v0)
    d01 = _dots(v0, v1)
    d11 = _dots(v1, v1)
    denom = d00 * d11 - d01 * d01
    safe = np.abs(denom) > 1e-300
    for i0, i1 in ((0, 1), (1, 2), (2, 0)):
        da, db = d_p[:, i0], d_p[:, i1]
        crossing = ((da > tol) & (db < -tol)) | ((da < -tol) & (db > tol))
        if not crossing.any():
            continue
        t = da / np.where(da - db == 0, 1.0, da - db)
        x = p[:, i0] + t[:, None] * (p[:, i1] - p[:, i0])
        v2 = x - q0
        d20 = _dots(v2, v0)
        d21 = _dots(v2, v1)
        u = (d11 * d20 - d01 * d21) / np.where(safe, denom, 1.0)
        w = (d00 * d21 - d01 * d20) / np.where(safe, denom, 1.0)
        bary_tol = 1e-10
        inside = (u >= -bary_tol) & (w >= -bary_tol) & (u + w <= 1 + bary_tol) & safe
        hit |= crossing & inside
    return hit


def _coplanar_pairs_overlap(p, q, normals):
    """2D overlap for coplanar triangle pairs: edge crossings or containment."""
    n = len(p)
    axis = np.argmax(np.abs(normals), axis=1)
    keep = np.array([[1, 2], [0, 2], [0, 1]])
    cols = keep[axis]  # (n, 2)
    ar = np.arange(n)
    a2 = p[ar[:, None, None], np.arange(3)[None, :, None], cols[:, None, :]]
    b2 = q[ar[:, None, None], np.arange(3)[None, :, None], cols[:, None, :]]

    def cross2(o, u, v):
        return (u[..., 0] - o[..., 0]) * (v[..., 1] - o[..., 1]) - \
               (u[..., 1] - o[..., 1]) * (v[..., 0] - o[..., 0])

    hit = np.zeros(n, dtype=bool)
    for i in range(3):
        p1, p2 = a2[:, i], a2[:, (i + 1) % 3]
        for j in range(3):
            p3, p4 = b2[:, j], b2[:, (j + 1) % 3]
            d1 = cross2(p3, p4, p1)
            d2 = cross2(p3, p4, p2)
            d3 = cross2(p1, p2, p3)
            d4 = cross2(p1, p2, p4)
            # deadband against rounding noise on (near-)collinear segments
            tol = 1e-12 * np.linalg.norm(p2 - p1, axis=-1) * np.linalg.norm(p4 - p3, axis=-1)
            hit |= ((d1 > tol) & (d2 < -tol) | (d1 < -tol) & (d2 > tol)) & (
                (d3 > tol) & (d4 < -tol) | (d3 < -tol) & (d4 > tol)
            )

    def contains(tri, pts):
        c1 = cross2(tri[:, 0], tri[:, 1], pts)
        c2 = cross2(tri[:, 1], tri[:, 2], pts)
        c3 = cross2(tri[:, 2], tri[:, 0], pts)
        pos = (c1 >= 0) & (c2 >= 0) & (c3 >= 0)
        neg = (c1 <= 0) & (c2 <= 0) & (c3 <= 0)
        return pos | neg

    hit |= contains(b2, a2[:, 0])
    hit |= contains(a2, b2[:, 0])
    return hit


# ---------------------------------------------------------------------------
# Bounding volume hierarchy over triangle AABBs
# ---------------------------------------------------------------------------

class _BVH:
    __slots__ = ("lo", "hi", "left", "right", "start", "count", "order", "_n_nodes")

    def __init__(self, tri_lo: np.ndarray, tri_hi: np.ndarray, leaf_size: int = 8):
        m = len(tri_lo)
        self.order = np.arange(m)
        max_nodes = max(1, 4 * m // leaf_size + 16)
        self.lo = np.empty((max_nodes, 3))
        self.hi = np.empty((max_nodes, 3))
        self.left = np.full(max_nodes, -1, dtype=np.int64)
        self.right = np.full(max_nodes, -1, dtype=np.int64)
        self.start = np.zeros(max_nodes, dtype=np.int64)
        self.count = np.zeros(max_nodes, dtype=np.int64)
        centers = 0.5 * (tri_lo + tri_hi)
        self._n_nodes = 0

        def new_node(start, count):
            i = self._n_nodes
            self._n_nodes += 1
            sl = self.order[start : start + count]
            self.lo[i] = tri_lo[sl].min(axis=0)
            self.hi[i] = tri_hi[sl].max(axis=0)
            self.start[i] = start
            self.count[i] = count
            return i

        root = new_node(0, m)
        stack = [root]
        while stack:
            node = stack.pop()
            start, count = self.start[node], self.count[node]
            if count <= leaf_size:
                continue
            ext = self.hi[node] - self.lo[node]
            axis = int(np.argmax(ext))
            sl = self.order[start : start + count]
            key = centers[sl, axis]
            half = count // 2
            part = np.argpartition(key, half, kind="introselect")
            self.order[start : start + count] = sl[part]
            l = new_node(start, half)
            r = new_node(start + half, count - half)
            self.left[node] = l
            self.right[node] = r
            stack.append(l)
            stack.append(r)

    def is_leaf(self, i):
        return self.left[i] < 0

    def leaf_tris(self, i):
        return self.order[self.start[i] : self.start[i] + self.count[i]]


def _candidate_pairs(bvh: _BVH, pad: float) -> np.ndarray:
    """Index pairs (i < j) of triangles with overlapping (padded) boxes.

    Batched traversal: the frontier of node pairs is classified and expanded
    with array operations instead of node-at-a-time recursion.
    """
    n_nodes = bvh._n_nodes
    is_leaf = bvh.left[:n_nodes] < 0
    volume = np.prod(np.maximum(bvh.hi[:n_nodes] - bvh.lo[:n_nodes], 0.0), axis=1)

    frontier = np.array([[0, 0]], dtype=np.int64)
    self_leaves: list[np.ndarray] = []
    cross_pairs: list[np.ndarray] = []
    while len(frontier):
        a, b = frontier[:, 0], frontier[:, 1]
        nxt: list[np.ndarray] = []

        same = a == b
        if same.any():
            nodes = a[same]
            leaf = is_leaf[nodes]
            if leaf.any():
                self_leaves.append(nodes[leaf])
            internal = nodes[~leaf]
            if len(internal):
                l, r = bvh.left[internal], bvh.right[internal]
                nxt.append(np.stack([l, l], axis=1))
                nxt.append(np.stack([r, r], axis=1))
                nxt.append(np.stack([l, r], axis=1))

        da, db = a[~same], b[~same]
        if len(da):
            overlap = ~(
                np.any(bvh.lo[da] > bvh.hi[db] + pad, axis=1)
                | np.any(bvh.lo[db] > bvh.hi[da] + pad, axis=1)
            )
            da, db = da[overlap], db[overlap]
        if len(da):
            both_leaf = is_leaf[da] & is_leaf[db]
            if both_leaf.any():
                cross_pairs.append(np.stack([da[both_leaf], db[both_leaf]], axis=1))
            rest_a, rest_b = da[~both_leaf], db[~both_leaf]
            if len(rest_a):
                split_b = is_leaf[rest_a] | (~is_leaf[rest_b] & (volume[rest_b] > volume[rest_a]))
                sa, sb = rest_a[split_b], rest_b[split_b]
                if len(sa):
                    nxt.append(np.stack([sa, bvh.left[sb]], axis=1))
                    nxt.append(np.stack([sa, bvh.right[sb]], axis=1))
                sa, sb = rest_a[~split_b], rest_b[~split_b]
                if len(sa):
                    nxt.append(np.stack([bvh.left[sa], sb], axis=1))
                    nxt.append(np.stack([bvh.right[sa], sb], axis=1))
        frontier = np.concatenate(nxt, axis=0) if nxt else np.empty((0, 2), dtype=np.int64)

    pairs: list[np.ndarray] = []
    if self_leaves:
        nodes = np.concatenate(self_leaves)
        for c in np.unique(bvh.count[nodes]):
            if c < 2:
                continue
            grp = nodes[bvh.count[nodes] == c]
            ii, jj = np.triu_indices(int(c), k=1)
            starts = bvh.start[grp][:, None]
            pa = bvh.order[starts + ii[None, :]].ravel()
            pb = bvh.order[starts + jj[None, :]].ravel()
            pairs.append(np.stack([pa, pb], axis=1))
    if cross_pairs:
        nodes = np.concatenate(cross_pairs, axis=0)
        ca, cb = bvh.count[nodes[:, 0]], bvh.count[nodes[:, 1]]
        for c1 in np.unique(ca):
            for c2 in np.unique(cb[ca == c1]):
                sel = (ca == c1) & (cb == c2)
                grp = nodes[sel]
                ii, jj = np.meshgrid(np.arange(c1), np.arange(c2), indexing="ij")
                ii, jj = ii.ravel()[None, :], jj.ravel()[None, :]
                pa = bvh.order[bvh.start[grp[:, 0]][:, None] + ii].ravel()
                pb = bvh.order[bvh.start[grp[:, 1]][:, None] + jj].ravel()
                pairs.append(np.stack([pa, pb], axis=1))
    if not pairs:
        return np.empty((0, 2), dtype=np.int64)
    allp = np.concatenate(pairs, axis=0)
    lo = np.minimum(allp[:, 0], allp[:, 1])
    hi = np.maximum(allp[:, 0], allp[:, 1])
    return np.unique(np.stack([lo, hi], axis=1), axis=0)


def self_intersecting_pairs(
    mesh: TriMesh, eps: float = EPS, max_pairs: int | None = None
) -> list[tuple[int, int]]:
    """Non-adjacent intersecting triangle pairs, BVH-accelerated.

    Traversal order does not affect the result; pairs are reported sorted.
    """
    tris = mesh.triangles
    coords = mesh.vertices[tris]
    if len(tris) < 2:
        return []
    lo = coords.min(axis=1)
    hi = coords.max(axis=1)
    bvh = _BVH(lo, hi)
    cand = _candidate_pairs(bvh, pad=eps)
    if len(cand) == 0:
        return []
    # drop index-adjacent pairs (sharing any vertex)
    a = tris[cand[:, 0]]
    b = tris[cand[:, 1]]
    shared = (a[:, :, None] == b[:, None, :]).any(axis=(1, 2))
    cand = cand[~shared]
    hits: list[tuple[int, int]] = []
    chunk = 200_000
    for s in range(0, len(cand), chunk):
        part = cand[s : s + chunk]
        mask = _tri_pairs_intersect(coords[part[:, 0]], coords[part[:, 1]], eps)
        for i, j in part[mask]:
            hits.append((int(i), int(j)))
            if max_pairs is not None and len(hits) >= max_pairs:
                return sorted(hits)
    return sorted(hits)


def self_intersects(mesh: TriMesh, eps: float = EPS) -> bool:
    """True iff some pair of non-adjacent triangles intersects."""
    return len(self_intersecting_pairs(mesh, eps, max_pairs=1)) > 0


# ---------------------------------------------------------------------------
# Proper embeddedness
# ---------------------------------------------------------------------------

def _vertex_links_ok(mesh: TriMesh) -> list[int]:
    """Vertices whose triangle link is not a single path/cycle (bowties)."""
    star: dict[int, list[tuple[int, int]]] = defaultdict(list)
    for a, b, c in mesh.triangles.tolist():
        star[a].append((b, c))
        star[b].append((c, a))
        star[c].append((a, b))
    bad = []
    for v, opp in star.items():
        adj: dict[int, list[int]] = defaultdict(list)
        for a, b in opp:
            adj[a].append(b)
            adj[b].append(a)
        if any(len(x) > 2 for x in adj.values()):
            bad.append(v)
            continue
        ends = [x for x, ns in adj.items() if len(ns) == 1]
        if len(ends) not in (0, 2):
            bad.append(v)
            continue
        start = ends[0] if ends else next(iter(adj))
        seen = {start}
        prev, cur = None, start
        while True:
            nxts = [x for x in adj[cur] if x != prev]
            if not nxts:
                break
            prev, cur = cur, nxts[0]
            if cur in seen:
                break
            seen.add(cur)
        if len(seen) != len(adj):
            bad.append(v)
    return sorted(bad)


def validate_properly_embedded(mesh: TriMesh, ball: BallDomain = BallDomain()) -> ValidationReport:
    """Screen a mesh as a properly embedded surface in the given ball.

    Failures are recorded in the report, not raised.  Reports are cached on
    the mesh (meshes are immutable), so repeated validation is free.
    """
    cache = getattr(mesh, "_validation_reports", None)
    if cache is None:
        cache = {}
        setattr(mesh, "_validation_reports", cache)
    if ball.radius in cache:
        return cache[ball.radius]
    rep = ValidationReport()
    r = ball.radius
    tol = EPS * max(1.0, r)

    rep.manifold = mesh.is_edge_manifold()
    if not rep.manifold:
        for e in mesh.nonmanifold_edges()[:16]:
            rep.offending_items.append(("nonmanifold_edge", list(e)))
    bad_links = _vertex_links_ok(mesh) if rep.manifold else []
    if bad_links:
        rep.manifold = False
        for v in bad_links[:16]:
            rep.offending_items.append(("nonmanifold_vertex", v))

    for v in mesh.isolated_vertices()[:16]:
        rep.offending_items.append(("isolated_vertex", int(v)))

    rep.connected = mesh.is_connected()
    if not rep.connected:
        rep.offending_items.append(("disconnected", None))
    rep.orientable = rep.manifold and mesh.is_orientable()
    if rep.manifold and not rep.orientable:
        rep.offending_items.append(("nonorientable", None))

    boundary_vertices: set[int] = set()
    loops_ok = True
    if rep.manifold:
        try:
            for loop in mesh.boundary_loops:
                boundary_vertices.update(loop)
        except Exception:
            loops_ok = False
            rep.offending_items.append(("boundary_not_simple", None))
    norms = np.linalg.norm(mesh.vertices, axis=1)
    bmask = np.zeros(mesh.vertex_count, dtype=bool)
    bmask[list(boundary_vertices)] = True

    if bmask.any():
        berr = np.abs(norms[bmask] - r)
        rep.boundary_sphericity_error = float(berr.max())
        rep.boundary_on_sphere = bool(rep.boundary_sphericity_error <= tol)
        if not rep.boundary_on_sphere:
            for v in np.nonzero(bmask)[0][np.argsort(-berr)][:16]:
                if abs(norms[v] - r) > tol:
                    rep.offending_items.append(("boundary_vertex_off_sphere", int(v)))
    else:
        rep.boundary_sphericity_error = 0.0
        rep.boundary_on_sphere = True

    interior = ~bmask
    ref = interior & np.isin(np.arange(mesh.vertex_count), mesh.referenced_vertices())
    if ref.any():
        inmax = float(norms[ref].max())
        rep.interior_clearance = r - inmax
        rep.interior_inside = bool(inmax < r - tol)
        if not rep.interior_inside:
            for v in np.nonzero(ref)[0]:
                if norms[v] >= r - tol:
                    rep.offending_items.append(("interior_vertex_at_sphere", int(v)))
                if len(rep.offending_items) > 64:
                    break
    else:
        rep.interior_clearance = r
        rep.interior_inside = True

    rep.self_intersecting = False
    if rep.manifold:
        pairs = self_intersecting_pairs(mesh, max_pairs=16)
        rep.self_intersecting = bool(pairs)
        for i, j in pairs:
            rep.offending_items.append(("intersecting_triangles", [i, j]))

    rep.properly_embedded = bool(
        rep.manifold
        and loops_ok
        and rep.connected
        and rep.orientable
        and not rep.self_intersecting
        and rep.boundary_on_sphere
        and rep.interior_inside
        and len(mesh.isolated_vertices()) == 0
    )
    cache[ball.radius] = rep
    return rep


# ---------------------------------------------------------------------------
# Invariants
# ---------------------------------------------------------------------------

def genus_and_boundary(mesh: TriMesh) -> tuple[int, int]:
    """(genus, boundary component count) from the Euler characteristic."""
    if not mesh.is_edge_manifold():
        raise InvalidSurfaceError("mesh is not edge-manifold")
    if not mesh.is_connected():
        raise InvalidSurfaceError("mesh is not connected")
    if not mesh.is_orientable():
        raise InvalidSurfaceError("mesh is not orientable")
    b = len(mesh.boundary_loops)
    chi = mesh.euler_characteristic()
    num = 2 - chi - b
    if num % 2 != 0 or num < 0:
        raise InvalidSurfaceError(f"inconsistent topology: chi={chi}, boundary={b}")
    return num // 2, b


def boundary_loops_as_spherical(mesh: TriMesh) -> list[SphericalLoop]:
    loops = []
    for loop in mesh.boundary_loops:
        pts = mesh.vertices[loop]
        norms = np.linalg.norm(pts, axis=1)
        loops.append(SphericalLoop(pts / norms[:, None]))
    return loops


def boundary_graph_of_surface(
    mesh: TriMesh, ball: BallDomain = BallDomain(), *, seed: int = 0
) -> Tree:
    """Nesting tree of the boundary loops radially projected to the unit sphere."""
    rep = validate_properly_embedded(mesh, ball)
    if not rep.properly_embedded:
        bad = ", ".join(sorted({k for k, _ in rep.offending_items})) or "unknown defect"
        raise InvalidSurfaceError(f"surface is not properly embedded ({bad})", rep)
    return sphere_boundary_graph(boundary_loops_as_spherical(mesh), seed=seed)


def isotopy_signature(
    mesh: TriMesh, ball: BallDomain = BallDomain(), *, seed: int = 0
) -> Signature:
    tree = boundary_graph_of_surface(mesh, ball, seed=seed)
    genus, b = genus_and_boundary(mesh)
    assert b == tree.vertex_count - 1
    return Signature(genus=genus, boundary_tree=ahu_code(tree))


def isotopy_equivalent(
    a: TriMesh, b: TriMesh, ball: BallDomain = BallDomain(), *, seed: int = 0
) -> bool:
    """Equality of isotopy signatures; see HYPOTHESIS_NOTE for its meaning."""
    return isotopy_signature(a, ball, seed=seed) == isotopy_signature(b, ball, seed=seed)
