"""Indexed triangle meshes: topology queries, welding, and OBJ I/O.

A TriMesh is a plain (vertices, triangles) pair.  Topological structure
(edge incidence, boundary loops, orientability) is derived lazily and cached;
meshes are treated as immutable after construction.
"""

from __future__ import annotations

import io
from collections import defaultdict

import numpy as np


class MeshTopologyError(ValueError):
    """The mesh violates a structural requirement (manifoldness, closedness, ...)."""


class TriMesh:
    def __init__(self, vertices, triangles):
        self.vertices = np.ascontiguousarray(vertices, dtype=np.float64).reshape(-1, 3)
        self.triangles = np.ascontiguousarray(triangles, dtype=np.int64).reshape(-1, 3)
        if len(self.triangles) and (
            self.triangles.min() < 0 or self.triangles.max() >= len(self.vertices)
        ):
            raise MeshTopologyError("triangle index out of range")
        if np.any(
            (self.triangles[:, 0] == self.triangles[:, 1])
            | (self.triangles[:, 1] == self.triangles[:, 2])
            | (self.triangles[:, 0] == self.triangles[:, 2])
        ):
            raise MeshTopologyError("degenerate triangle (repeated vertex index)")
        self._edge_faces: dict[tuple[int, int], list[int]] | None = None
        self._boundary_loops: list[list[int]] | None = None

    # -- basic counts -------------------------------------------------------

    @property
    def vertex_count(self) -> int:
        return len(self.vertices)

    @property
    def triangle_count(self) -> int:
        return len(self.triangles)

    def copy(self) -> "TriMesh":
        return TriMesh(self.vertices.copy(), self.triangles.copy())

    def transformed(self, matrix: np.ndarray) -> "TriMesh":
        """New mesh with vertices mapped through a 3x3 linear map."""
        return TriMesh(self.vertices @ np.asarray(matrix, float).T, self.triangles)

    # -- edge incidence -----------------------------------------------------

    def edge_faces(self) -> dict[tuple[int, int], list[int]]:
        """Map from undirected edge (u<v) to the triangles containing it."""
        if self._edge_faces is None:
            ef: dict[tuple[int, int], list[int]] = defaultdict(list)
            for t, (a, b, c) in enumerate(self.triangles.tolist()):
                for u, v in ((a, b), (b, c), (c, a)):
                    ef[(u, v) if u < v else (v, u)].append(t)
            self._edge_faces = dict(ef)
        return self._edge_faces

    @property
    def edge_count(self) -> int:
        return len(self.edge_faces())

    def is_edge_manifold(self) -> bool:
        return all(len(f) <= 2 for f in self.edge_faces().values())

    def nonmanifold_edges(self) -> list[tuple[int, int]]:
        return sorted(e for e, f in self.edge_faces().items() if len(f) > 2)

    def boundary_edges(self) -> list[tuple[int, int]]:
        return sorted(e for e, f in self.edge_faces().items() if len(f) == 1)

    def is_closed(self) -> bool:
        return all(len(f) == 2 for f in self.edge_faces().values())

    # -- global structure ---------------------------------------------------

    def is_connected(self) -> bool:
        """Connectivity of the triangle adjacency graph (isolated vertices ignored)."""
        m = self.triangle_count
        if m == 0:
            return False
        seen = np.zeros(m, dtype=bool)
        stack = [0]
        seen[0] = True
        ef = self.edge_faces()
        neighbors: list[list[int]] = [[] for _ in range(m)]
        for faces in ef.values():
            for i in faces:
                for j in faces:
                    if i != j:
                        neighbors[i].append(j)
        while stack:
            t = stack.pop()
            for u in neighbors[t]:
                if not seen[u]:
                    seen[u] = True
                    stack.append(u)
        return bool(seen.all())

    def referenced_vertices(self) -> np.ndarray:
        return np.unique(self.triangles)

    def isolated_vertices(self) -> np.ndarray:
        mask = np.ones(self.vertex_count, dtype=bool)
        mask[self.referenced_vertices()] = False
        return np.nonzero(mask)[0]

    def euler_characteristic(self) -> int:
        """V - E + F over referenced vertices."""
        return int(len(self.referenced_vertices()) - self.edge_count + self.triangle_count)

    def orientation_assignment(self) -> np.ndarray | None:
        """Per-triangle flip flags making the winding globally consistent.

        Returns None when the mesh is not orientable.  Requires edge-manifold
        input; raises MeshTopologyError otherwise.
        """
        if not self.is_edge_manifold():
            raise MeshTopologyError("orientability is undefined on a non-edge-manifold mesh")
        m = self.triangle_count
        flip = np.full(m, -1, dtype=np.int8)  # -1 unvisited, 0 keep, 1 flip
        ef = self.edge_faces()
        directed: dict[int, dict[tuple[int, int], bool]] = {}

        def edge_dirs(t: int) -> dict[tuple[int, int], bool]:
            # maps undirected edge -> True if traversed as (u, v) with u < v
            if t not in directed:
                a, b, c = self.triangles[t]
                d = {}
                for u, v in ((a, b), (b, c), (c, a)):
                    d[(u, v) if u < v else (v, u)] = u < v
                directed[t] = d
            return directed[t]

        for start in range(m):
            if flip[start] >= 0:
                continue
            flip[start] = 0
            stack = [start]
            while stack:
                t = stack.pop()
                for e in edge_dirs(t):
                    faces = ef[e]
                    if len(faces) != 2:
                        continue
                    other = faces[0] if faces[1] == t else faces[1]
                    # consistent orientation traverses a shared edge in
                    # opposite directions
                    same_dir = edge_dirs(t)[e] == edge_dirs(other)[e]
                    want = flip[t] ^ (1 if same_dir else 0)
                    if flip[other] < 0:
                        flip[other] = want
                        stack.append(other)
                    elif flip[other] != want:
                        return None
        return flip.astype(bool)

    def is_orientable(self) -> bool:
        return self.orientation_assignment() is not None

    def oriented(self) -> "TriMesh":
        """Copy with globally consistent winding (raises if non-orientable)."""
        flip = self.orientation_assignment()
        if flip is None:
            raise MeshTopologyError("mesh is not orientable")
        tris = self.triangles.copy()
        tris[flip] = tris[flip][:, [0, 2, 1]]
        return TriMesh(self.vertices, tris)

    # -- boundary loops -----------------------------------------------------

    @property
    def boundary_loops(self) -> list[list[int]]:
        """Boundary edges partitioned into simple vertex cycles.

        Deterministic: each loop starts at its smallest vertex and runs toward
        the smaller of that vertex's two boundary neighbors; loops are sorted
        by their starting vertex.
        """
        if self._boundary_loops is None:
            edges = self.boundary_edges()
            neighbor: dict[int, list[int]] = defaultdict(list)
            for u, v in edges:
                neighbor[u].append(v)
                neighbor[v].append(u)
            for v, ns in neighbor.items():
                if len(ns) != 2:
                    raise MeshTopologyError(
                        f"boundary vertex {v} lies on {len(ns)} boundary edges; "
                        "boundary does not split into simple cycles"
                    )
            unvisited = set(neighbor)
            loops = []
            while unvisited:
                start = min(unvisited)
                nxt = min(neighbor[start])
                loop = [start]
                unvisited.discard(start)
                prev, cur = start, nxt
                while cur != start:
                    loop.append(cur)
                    unvisited.discard(cur)
                    a, b = neighbor[cur]
                    prev, cur = cur, (b if a == prev else a)
                loops.append(loop)
            loops.sort(key=lambda lp: lp[0])
            self._boundary_loops = loops
        return self._boundary_loops


# ---------------------------------------------------------------------------
# Welding triangle soup into an indexed mesh
# ---------------------------------------------------------------------------

def weld_soup(points: np.ndarray, triangles) -> TriMesh:
    """Merge bitwise-identical points and reindex the triangles.

    Points are compared exactly (by their 8-byte float representations), so
    pieces that must share a ring have to construct the shared vertices with
    the same arithmetic.  First occurrence order is kept, which makes the
    result deterministic.
    """
    points = np.ascontiguousarray(points, dtype=np.float64).reshape(-1, 3)
    view = points.view([("x", np.float64), ("y", np.float64), ("z", np.float64)]).reshape(-1)
    _, first, inverse = np.unique(view, return_index=True, return_inverse=True)
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(len(order))
    new_index = rank[inverse]
    unique_points = points[np.sort(first)]
    tris = new_index[np.asarray(triangles, dtype=np.int64)]
    return TriMesh(unique_points, tris)


# ---------------------------------------------------------------------------
# Wavefront OBJ
# ---------------------------------------------------------------------------

def write_obj(mesh: TriMesh, path_or_file) -> None:
    """Vertices and triangular faces only; floats via repr for exact round-trip."""
    own = isinstance(path_or_file, (str,)) or hasattr(path_or_file, "__fspath__")
    f = open(path_or_file, "w", newline="\n") if own else path_or_file
    try:
        for x, y, z in mesh.vertices.tolist():
            f.write(f"v {x!r} {y!r} {z!r}\n")
        for a, b, c in mesh.triangles.tolist():
            f.write(f"f {a + 1} {b + 1} {c + 1}\n")
    finally:
        if own:
            f.close()


def read_obj(path_or_file) -> TriMesh:
    """Read v/f records; faces with more than 3 corners are fanned."""
    own = isinstance(path_or_file, (str,)) or hasattr(path_or_file, "__fspath__")
    f = open(path_or_file, "r") if own else path_or_file
    try:
        verts: list[list[float]] = []
        tris: list[tuple[int, int, int]] = []
        for lineno, line in enumerate(f, start=1):
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            tag = parts[0]
            if tag == "v":
                if len(parts) < 4:
                    raise MeshTopologyError(f"OBJ line {lineno}: vertex needs 3 coordinates")
                verts.append([float(parts[1]), float(parts[2]), float(parts[3])])
            elif tag == "f":
                idx = []
                for tok in parts[1:]:
                    head = tok.split("/")[0]
                    i = int(head)
                    if i == 0:
                        raise MeshTopologyError(f"OBJ line {lineno}: zero face index")
                    idx.append(i - 1 if i > 0 else len(verts) + i)
                if len(idx) < 3:
                    raise MeshTopologyError(f"OBJ line {lineno}: face needs 3 corners")
                for k in range(1, len(idx) - 1):
                    tris.append((idx[0], idx[k], idx[k + 1]))
            # other records (vn, vt, s, o, g, usemtl, ...) are ignored
        if not verts:
            raise MeshTopologyError("OBJ contains no vertices")
        return TriMesh(np.array(verts, dtype=np.float64), np.array(tris, dtype=np.int64).reshape(-1, 3))
    finally:
        if own:
            f.close()


def obj_bytes(mesh: TriMesh) -> bytes:
    buf = io.StringIO()
    write_obj(mesh, buf)
    return buf.getvalue().encode()
