"""Canonical unknotted surfaces in the unit ball realizing a (tree, genus) pair.

The construction follows the standard recursive picture: a small sphere at
the origin for the root vertex, a flat disc with boundary on the unit sphere
for every other tree vertex, a radial cylindrical bridge for every tree edge,
and a row of small torus handles on the central sphere for the genus.

All feature directions live on the great circle {y = 0}; a nonroot vertex v
gets a spherical cap of half-angle alpha_v around its direction, laminar with
the tree structure, and its disc is the flat plane chord of that cap.  Cap
laminarity makes every pair of discs disjoint by construction, which is what
keeps the mesh embedded at any tree size the resolution can support.

Meshes are assembled as exact-shared-point triangle soup and welded, so every
junction ring is stitched watertight without index bookkeeping.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .mesh import TriMesh, weld_soup
from .trees import Tree, ahu_code, as_tree, tree_centers, rooted_ahu_code

__all__ = [
    "GenerationError",
    "ModelSurfaceSpec",
    "BallDomain",
    "generate_model_surface",
    "generate_with_report",
    "attach_genus",
    "default_root",
]

SPHERE_RADIUS = 0.125  # central sphere; fixed by the construction
MIN_TUBE_RADIUS = 1e-7


class GenerationError(ValueError):
    """The requested surface cannot be realized with the given parameters."""


@dataclass(frozen=True)
class BallDomain:
    """Closed ball of the given radius centered at the origin."""

    radius: float = 1.0

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")


@dataclass(frozen=True)
class ModelSurfaceSpec:
    """Input for the generator: tree, genus, and geometry knobs.

    root_vertex defaults to a tree center, which minimizes nesting depth.
    `shrink` caps the per-generation scale factor of child features.
    `symmetric` keeps the vertex set invariant under reflection across
    {y = 0}; turning it off rotates every ring by a third of a step.
    `smooth_joints` applies one Laplacian step to the junction rings only.
    """

    tree: Tree
    genus: int = 0
    root_vertex: int | None = None
    resolution: int = 64
    shrink: float = 0.35
    symmetric: bool = True
    smooth_joints: bool = False

    def __post_init__(self):
        object.__setattr__(self, "tree", as_tree(self.tree))
        if self.genus < 0:
            raise ValueError("genus must be nonnegative")
        if self.resolution < 12:
            raise ValueError("resolution must be at least 12")
        if not 0.0 < self.shrink < 1.0:
            raise ValueError("shrink must lie strictly between 0 and 1")
        if self.root_vertex is not None and not 0 <= self.root_vertex < self.tree.vertex_count:
            raise ValueError("root_vertex out of range")

    @property
    def root(self) -> int:
        return default_root(self.tree) if self.root_vertex is None else self.root_vertex


def default_root(tree: Tree) -> int:
    """Deterministic center choice: smaller rooted code wins, then index."""
    centers = tree_centers(tree)
    return min(centers, key=lambda c: (rooted_ahu_code(tree, c), c))


# ---------------------------------------------------------------------------
# Feature layout: caps on the {y=0} great circle, tube radii, handle row
# ---------------------------------------------------------------------------

@dataclass
class _Feature:
    vertex: int
    parent: int              # -1 for children of the root
    depth: int
    phi: float               # azimuth of the cap center on the {y=0} circle
    alpha: float             # cap half-angle; disc plane at distance cos(alpha)
    tube_radius: float = 0.0
    children: list[int] = field(default_factory=list)  # vertex ids


@dataclass
class _Handle:
    psi: float     # azimuth of the neck on the central sphere
    scale: float   # torus major radius


@dataclass
class _Layout:
    root: int
    features: dict[int, _Feature]       # nonroot vertex -> feature
    root_children: list[int]
    handles: list[_Handle]
    max_depth: int
    root_slot_half: float = math.pi


def _children_lists(tree: Tree, root: int) -> list[list[int]]:
    adj = tree.adjacency()
    children: list[list[int]] = [[] for _ in range(tree.vertex_count)]
    seen = [False] * tree.vertex_count
    stack = [root]
    seen[root] = True
    order = []
    while stack:
        v = stack.pop()
        order.append(v)
        for w in sorted(adj[v]):
            if not seen[w]:
                seen[w] = True
                children[v].append(w)
                stack.append(w)
    return children


def _compute_layout(spec: ModelSurfaceSpec) -> _Layout:
    tree = spec.tree
    root = spec.root
    g = spec.genus
    children = _children_lists(tree, root)
    k = len(children[root])

    # Handle row reserved around azimuth pi/2 (the +z point of the circle).
    handles: list[_Handle] = []
    if g > 0:
        pitch = min(0.45, 2.4 / g)
        scale = min(0.02, 0.031 * pitch)
        start = math.pi / 2 - pitch * (g - 1) / 2
        handles = [_Handle(psi=start + j * pitch, scale=scale) for j in range(g)]
        reserve = g * pitch / 2 + 0.3
    else:
        reserve = 0.0

    features: dict[int, _Feature] = {}
    max_depth = 0

    def place_children(parent_vertex: int, parent_feature: _Feature | None):
        nonlocal max_depth
        kids = children[parent_vertex]
        if not kids:
            return
        if parent_feature is None:
            # root level: equal slots on the circle outside the handle arc
            arc = 2 * math.pi - 2 * reserve
            slot = arc / len(kids)
            base = math.pi / 2 + reserve
            for i, v in enumerate(kids):
                phi = base + (i + 0.5) * slot
                alpha = min(1.0, 0.8 * slot / 2)
                feat = _Feature(v, parent=-1, depth=1, phi=phi, alpha=alpha)
                features[v] = feat
                max_depth = max(max_depth, 1)
                place_children(v, feat)
            return
        # deeper levels: k+1 slots inside the parent cap; the slot nearest the
        # cap center stays free for the parent's own bridge
        kk = len(kids)
        avail = 0.7 * parent_feature.alpha
        nslots = kk + 1
        width = 2 * avail / nslots
        centers = [-avail + (i + 0.5) * width for i in range(nslots)]
        drop = min(range(nslots), key=lambda i: (abs(centers[i]), centers[i]))
        offsets = [c for i, c in enumerate(centers) if i != drop]
        for off, v in zip(offsets, kids):
            alpha = min(spec.shrink * parent_feature.alpha, 0.8 * width / 2)
            feat = _Feature(
                v,
                parent=parent_feature.vertex,
                depth=parent_feature.depth + 1,
                phi=parent_feature.phi + off,
                alpha=alpha,
            )
            features[v] = feat
            max_depth = max(max_depth, feat.depth)
            place_children(v, feat)

    place_children(root, None)
    for v, feat in features.items():
        feat.children = children[v]

    layout = _Layout(root, features, children[root], handles, max_depth)
    if k:
        layout.root_slot_half = (2 * math.pi - 2 * reserve) / k / 2
    _assign_tube_radii(spec, layout)
    return layout


def _direction(phi: float) -> np.ndarray:
    return np.array([math.cos(phi), 0.0, math.sin(phi)])


def _pierce_x(parent: _Feature, child: _Feature) -> float:
    """Signed in-plane position where the child's bridge meets the parent disc."""
    return math.cos(parent.alpha) * math.tan(child.phi - parent.phi)


def _assign_tube_radii(spec: ModelSurfaceSpec, layout: _Layout) -> None:
    feats = layout.features
    root_slot_half = layout.root_slot_half

    for v, feat in feats.items():
        disc_radius = math.sin(feat.alpha)
        if feat.parent < 0:
            r = min(SPHERE_RADIUS, disc_radius) / 4
            # the hole this bridge cuts on the central sphere must stay well
            # inside the feature's azimuth slot
            r = min(r, SPHERE_RADIUS * math.sin(0.35 * root_slot_half))
        else:
            parent = feats[feat.parent]
            r = min(math.sin(parent.alpha), disc_radius) / 4
            # clearance at the parent disc: distance from this pierce point to
            # the disc center, its siblings, and the disc rim
            x = _pierce_x(parent, feat)
            gaps = [abs(x), 0.98 * math.sin(parent.alpha) - abs(x)]
            for sib in parent.children:
                if sib != v and sib in feats:
                    gaps.append(abs(x - _pierce_x(parent, feats[sib])))
            tilt = abs(feat.phi - parent.phi)
            r = min(r, 0.26 * min(gaps) * math.cos(tilt))
        feat.tube_radius = r

    # a vertex with children also needs its own bridge to clear theirs
    for v, feat in feats.items():
        child_piercings = [
            abs(_pierce_x(feat, feats[w])) for w in feat.children if w in feats
        ]
        if child_piercings:
            feat.tube_radius = min(feat.tube_radius, 0.26 * min(child_piercings))

    for v, feat in feats.items():
        if feat.tube_radius < MIN_TUBE_RADIUS:
            raise GenerationError(
                f"resolution/geometry budget exhausted at tree depth {feat.depth}: "
                f"bridge radius {feat.tube_radius:.2e} below {MIN_TUBE_RADIUS:.0e}; "
                "use a shallower root or a smaller tree"
            )


# ---------------------------------------------------------------------------
# Soup assembly helpers
# ---------------------------------------------------------------------------

class _Soup:
    """Triangle soup with exact shared points; welded once at the end."""

    def __init__(self):
        self.points: list[np.ndarray] = []
        self.tris: list[tuple[int, int, int]] = []

    def tri(self, a, b, c):
        base = len(self.points)
        self.points.extend((np.asarray(a, float), np.asarray(b, float), np.asarray(c, float)))
        self.tris.append((base, base + 1, base + 2))

    def ladder(self, ring_a: np.ndarray, ring_b: np.ndarray, closed: bool = True):
        """Quad strip between two aligned rings with equal point counts."""
        n = len(ring_a)
        stop = n if closed else n - 1
        for j in range(stop):
            jn = (j + 1) % n
            self.tri(ring_a[j], ring_b[j], ring_b[jn])
            self.tri(ring_a[j], ring_b[jn], ring_a[jn])

    def fan(self, apex: np.ndarray, ring: np.ndarray, closed: bool = True):
        n = len(ring)
        stop = n if closed else n - 1
        for j in range(stop):
            self.tri(apex, ring[j], ring[(j + 1) % n])

    def mesh(self) -> TriMesh:
        return weld_soup(np.array(self.points), np.array(self.tris, dtype=np.int64))


def _unwrap_increasing(angles: np.ndarray) -> np.ndarray | None:
    """Unwrap a cyclic angle sequence to a strictly increasing one, or None."""
    a = np.asarray(angles, float).copy()
    for i in range(1, len(a)):
        while a[i] <= a[i - 1]:
            a[i] += 2 * math.pi
    if a[-1] - a[0] >= 2 * math.pi:
        return None
    return a


def _stitch(soup: _Soup, loop_a, angles_a, loop_b, angles_b):
    """Triangulate the annulus between two nested closed loops.

    Both loops must be angularly monotone around the common center used to
    compute `angles_*`; direction is normalized internally.
    """
    loop_a = [np.asarray(p, float) for p in loop_a]
    loop_b = [np.asarray(p, float) for p in loop_b]
    angles_a = np.asarray(angles_a, float)
    angles_b = np.asarray(angles_b, float)

    ua = _unwrap_increasing(angles_a)
    if ua is None:
        loop_a = loop_a[::-1]
        ua = _unwrap_increasing(angles_a[::-1])
    ub = _unwrap_increasing(angles_b)
    if ub is None:
        loop_b = loop_b[::-1]
        ub = _unwrap_increasing(angles_b[::-1])
    if ua is None or ub is None:
        raise GenerationError("stitch loops are not angularly monotone")

    na, nb = len(loop_a), len(loop_b)
    # rotate loop_b so it starts just at/after loop_a's start angle
    shift = int(np.argmin((ub - ua[0]) % (2 * math.pi)))
    loop_b = loop_b[shift:] + loop_b[:shift]
    start_b = ua[0] + float((ub[shift] - ua[0]) % (2 * math.pi))
    ub = _unwrap_increasing(np.concatenate([ub[shift:], ub[:shift]]) % (2 * math.pi))
    ub = ub - ub[0] + start_b

    i = j = 0
    while i < na or j < nb:
        next_a = ua[i + 1] if i + 1 < na else ua[0] + 2 * math.pi
        next_b = ub[j + 1] if j + 1 < nb else ub[0] + 2 * math.pi
        if i < na and (next_a <= next_b or j >= nb):
            soup.tri(loop_a[i % na], loop_a[(i + 1) % na], loop_b[j % nb])
            i += 1
        else:
            soup.tri(loop_a[i % na], loop_b[(j + 1) % nb], loop_b[j % nb])
            j += 1


def _ring_angles_2d(chart_pts: np.ndarray, center: np.ndarray) -> np.ndarray:
    d = np.asarray(chart_pts, float) - np.asarray(center, float)
    return np.arctan2(d[:, 1], d[:, 0])


def _rect_perimeter(x0, x1, y0, y1, nx, ny):
    """Closed counterclockwise rectangle boundary as 2D chart points."""
    xs = np.linspace(x0, x1, nx + 1)
    ys = np.linspace(y0, y1, ny + 1)
    pts = []
    pts += [(x, y0) for x in xs[:-1]]
    pts += [(x1, y) for y in ys[:-1]]
    pts += [(x, y1) for x in xs[::-1][:-1]]
    pts += [(x0, y) for y in ys[::-1][:-1]]
    return np.array(pts)


def _grid(soup: _Soup, to3d, xs, ys):
    """Regular chart-rectangle grid mapped through `to3d`."""
    rows = [np.array([to3d(x, y) for x in xs]) for y in ys]
    for r in range(len(ys) - 1):
        a, b = rows[r], rows[r + 1]
        for c in range(len(xs) - 1):
            soup.tri(a[c], b[c], b[c + 1])
            soup.tri(a[c], b[c + 1], a[c + 1])


def _dense_rect_perimeter(cx, cy, hx, hy, n_target):
    """Rectangle perimeter sampled with >= n_target points, spread by length."""
    per = 4 * (hx + hy)
    nx = max(3, math.ceil(n_target * 2 * hx / per))
    ny = max(3, math.ceil(n_target * 2 * hy / per))
    xs = np.linspace(cx - hx, cx + hx, nx + 1)
    ys = np.linspace(cy - hy, cy + hy, ny + 1)
    pts = []
    pts += [(x, cy - hy) for x in xs[:-1]]
    pts += [(cx + hx, y) for y in ys[:-1]]
    pts += [(x, cy + hy) for x in xs[::-1][:-1]]
    pts += [(cx - hx, y) for y in ys[::-1][:-1]]
    return np.array(pts)


def _collar(soup: _Soup, to3d, x0, x1, ys, hole_chart, hole_pts, h_target):
    """Full-height column patch around one junction ring.

    Three stages keep every strip angularly local so nothing can cut back
    across the hole: the ring is laddered to a concentric copy scaled by 1.3
    (radial quads stay in their sector); that ring is stitched to a densely
    sampled scaled copy of the column rectangle; and the scaled rectangle is
    stitched to the column boundary.  The last pair are concentric rectangles
    with the same aspect and aligned corners, for which every stitch edge
    approaches its target edge monotonically, so the coarse shared samples in
    `ys` are harmless.  Returns the x samples of the column's horizontal edges.
    """
    y0, y1 = float(ys[0]), float(ys[-1])
    center = hole_chart.mean(axis=0)
    cx, cy = float(center[0]), float(center[1])
    if not (x0 < cx < x1 and y0 < cy < y1):
        raise GenerationError("collar hole is not inside its column")
    n_ring = len(hole_pts)
    span_x = float(np.max(np.abs(hole_chart[:, 0] - cx)))
    span_y = float(np.max(np.abs(hole_chart[:, 1] - cy)))

    mid_chart = center + 1.3 * (hole_chart - center)
    mid3d = np.array([to3d(x, y) for x, y in mid_chart])
    soup.ladder(np.asarray(hole_pts), mid3d)

    ccx, ccy = 0.5 * (x0 + x1), 0.5 * (y0 + y1)
    half_w, half_h = 0.5 * (x1 - x0), 0.5 * (y1 - y0)
    kappa = max(
        (abs(cx - ccx) + 1.45 * span_x) / half_w,
        (abs(cy - ccy) + 1.45 * span_y) / half_h,
    )
    if kappa > 0.9:
        raise GenerationError("collar column too tight around its junction ring")
    bx, by = kappa * half_w, kappa * half_h
    # dense enough that consecutive box samples stay angularly close to the
    # ring even on the near edges of a very elongated box
    n_box = max(
        16,
        math.ceil(1.5 * n_ring),
        math.ceil(4 * (bx + by) / (0.55 * min(span_x, span_y))),
    )
    box2d = _dense_rect_perimeter(ccx, ccy, bx, by, n_box)
    box3d = [to3d(x, y) for x, y in box2d]
    _stitch(
        soup,
        box3d,
        _ring_angles_2d(box2d, center),
        list(mid3d),
        _ring_angles_2d(mid_chart, center),
    )

    nx = max(2, math.ceil((x1 - x0) / h_target))
    xs = np.linspace(x0, x1, nx + 1)
    col2d = []
    col2d += [(x, y0) for x in xs[:-1]]
    col2d += [(x1, y) for y in ys[:-1]]
    col2d += [(x, y1) for x in xs[::-1][:-1]]
    col2d += [(x0, y) for y in ys[::-1][:-1]]
    col2d = np.array(col2d)
    col3d = [to3d(x, y) for x, y in col2d]
    col_center = np.array([ccx, ccy])
    _stitch(
        soup,
        col3d,
        _ring_angles_2d(col2d, col_center),
        box3d,
        _ring_angles_2d(box2d, col_center),
    )
    return xs


def _ring_offsets(axis_frame, radius, res, offset_angle):
    """Points of a circle of `radius` in the plane spanned by the frame."""
    e1, e2 = axis_frame
    thetas = 2 * math.pi * np.arange(res) / res + offset_angle
    return radius * (np.cos(thetas)[:, None] * e1 + np.sin(thetas)[:, None] * e2)


def _plane_frame(phi: float) -> tuple[np.ndarray, np.ndarray]:
    """In-plane frame (e1, e2) of the disc plane normal to direction(phi)."""
    e1 = np.array([-math.sin(phi), 0.0, math.cos(phi)])
    e2 = np.array([0.0, 1.0, 0.0])
    return e1, e2


# ---------------------------------------------------------------------------
# Central sphere: latitude band with holes on the equator, plus polar caps
# ---------------------------------------------------------------------------

def _sphere_chart(radius):
    def to3d(phi, t):
        return np.array(
            [
                radius * math.cos(t) * math.cos(phi),
                radius * math.sin(t),
                radius * math.cos(t) * math.sin(phi),
            ]
        )

    return to3d


def _chart_coords_on_sphere(pts: np.ndarray, radius: float) -> np.ndarray:
    phi = np.arctan2(pts[:, 2], pts[:, 0])
    t = np.arcsin(np.clip(pts[:, 1] / radius, -1.0, 1.0))
    return np.stack([phi, t], axis=1)


def _build_sphere_with_holes(soup: _Soup, radius: float, res: int, holes):
    """Sphere of `radius` with the given junction rings cut out of its equator.

    `holes` is a list of (azimuth, ring_points) pairs; each ring must be a
    closed loop encircling the equator point at that azimuth.
    """
    to3d = _sphere_chart(radius)
    h_phi = 2 * math.pi / res

    if holes:
        charted = []
        for phi_c, ring in sorted(holes, key=lambda h: h[0] % (2 * math.pi)):
            phi_c = phi_c % (2 * math.pi)
            chart = _chart_coords_on_sphere(np.asarray(ring), radius)
            # re-center azimuths around the hole to dodge the branch cut
            chart[:, 0] = phi_c + np.mod(chart[:, 0] - phi_c + math.pi, 2 * math.pi) - math.pi
            charted.append((phi_c, chart, np.asarray(ring)))
        t_max = max(float(np.max(np.abs(c[:, 1]))) for _, c, _ in charted)
        half_w = [1.75 * float(np.max(np.abs(c[:, 0] - phi_c))) for phi_c, c, _ in charted]
        T = min(0.55, max(0.18, 1.75 * t_max))
    else:
        charted, half_w, T = [], [], 0.3

    ny = max(3, round(2 * T / h_phi))
    ys = np.linspace(-T, T, ny + 1)
    m = len(charted)
    boundaries: list[float] = []
    if m == 0:
        columns = [(0.0, 2 * math.pi)]
        xs = np.linspace(0.0, 2 * math.pi, max(8, res) + 1)
        # close the seam: reuse the first azimuth for the wrap column
        xs3d = list(xs[:-1]) + [xs[0]]
        rows = [np.array([to3d(x, y) for x in xs3d]) for y in ys]
        for r in range(ny):
            a, b = rows[r], rows[r + 1]
            for c in range(len(xs3d) - 1):
                soup.tri(a[c], b[c], b[c + 1])
                soup.tri(a[c], b[c + 1], a[c + 1])
        top_phis = list(xs[:-1])
    else:
        # verify collars stay disjoint along the equator
        for i in range(m):
            phi_i, w_i = charted[i][0], half_w[i]
            phi_j, w_j = charted[(i + 1) % m][0], half_w[(i + 1) % m]
            gap = (phi_j - phi_i) % (2 * math.pi) if m > 1 else 2 * math.pi
            if w_i + w_j + 0.05 > gap:
                raise GenerationError("junction collars overlap on the central sphere")
        top_phis = []
        for i, (phi_c, chart, ring) in enumerate(charted):
            a = phi_c - half_w[i]
            b = phi_c + half_w[i]
            xs_c = _collar(soup, to3d, a, b, ys, chart, ring, h_phi)
            top_phis.extend(xs_c[:-1])
            # gap column to the next collar
            nxt = charted[(i + 1) % m]
            ga = b
            gb = nxt[0] - half_w[(i + 1) % m]
            if i == m - 1:
                gb += 2 * math.pi
            ngap = max(1, round((gb - ga) / h_phi))
            gxs = list(np.linspace(ga, gb, ngap + 1))
            if i == m - 1:
                # land the wrap edge exactly on the first collar's left edge
                gxs[-1] = charted[0][0] - half_w[0] + 2 * math.pi
                wrap_target = charted[0][0] - half_w[0]
                cols = gxs[:-1] + [wrap_target]
                rows = [np.array([to3d(x, y) for x in cols]) for y in ys]
                for r in range(ny):
                    ra, rb = rows[r], rows[r + 1]
                    for c in range(len(cols) - 1):
                        soup.tri(ra[c], rb[c], rb[c + 1])
                        soup.tri(ra[c], rb[c + 1], ra[c + 1])
            else:
                _grid(soup, to3d, np.array(gxs), ys)
            top_phis.extend(gxs[:-1])

    # polar caps: ladder rows over the shared azimuth samples, then a fan
    top_phis = sorted(set(top_phis))
    n_rows = max(2, round((math.pi / 2 - T) / h_phi))
    for pole in (+1, -1):
        prev = np.array([to3d(p, pole * T) for p in top_phis])
        for r in range(1, n_rows):
            t = pole * (T + (math.pi / 2 - T) * r / n_rows)
            cur = np.array([to3d(p, t) for p in top_phis])
            if pole > 0:
                soup.ladder(prev, cur)
            else:
                soup.ladder(cur, prev)
            prev = cur
        apex = np.array([0.0, pole * radius, 0.0])
        if pole > 0:
            soup.fan(apex, prev[::-1])
        else:
            soup.fan(apex, prev)


# ---------------------------------------------------------------------------
# Discs, bridges, handles
# ---------------------------------------------------------------------------

def _build_disc(soup: _Soup, feat: _Feature, holes, res: int, offset: float):
    """Flat disc for one tree vertex: boundary circle on the unit sphere,
    a row of junction holes (own bridge plus child bridges) along the chart
    x-axis, boxed by collars and stitched to the outer circle."""
    phi, alpha = feat.phi, feat.alpha
    u = _direction(phi)
    e1, e2 = _plane_frame(phi)
    center = math.cos(alpha) * u
    disc_r = math.sin(alpha)

    def to3d(x, y):
        return center + x * e1 + y * e2

    chart_holes = []
    for ring in holes:
        ring = np.asarray(ring)
        rel = ring - center
        chart = np.stack([rel @ e1, rel @ e2], axis=1)
        chart_holes.append((float(chart[:, 0].mean()), chart, ring))
    chart_holes.sort(key=lambda h: h[0])

    semi_x = [float(np.max(np.abs(c[:, 0] - cx))) for cx, c, _ in chart_holes]
    semi_y = [float(np.max(np.abs(c[:, 1]))) for _, c, _ in chart_holes]
    H = 1.75 * max(semi_y)
    widths = [1.75 * sx for sx in semi_x]
    for i in range(len(chart_holes) - 1):
        gap = chart_holes[i + 1][0] - chart_holes[i][0]
        if widths[i] + widths[i + 1] >= gap:
            raise GenerationError("junction collars overlap on a disc")

    x_left = chart_holes[0][0] - widths[0]
    x_right = chart_holes[-1][0] + widths[-1]
    box_cx = 0.5 * (x_left + x_right)
    box_hx = 0.5 * (x_right - x_left)
    # the boundary-circle stitch stays embedded only while the radius ratio
    # R/rho_mid exceeds 1/cos(angular step), so back the middle circle off
    # further at coarse resolutions
    rho_mid = disc_r * min(0.93, 0.96 * math.cos(2 * math.pi / res + 0.08))
    if math.hypot(abs(box_cx) + 1.08 * box_hx, 1.08 * H) > 0.98 * rho_mid:
        raise GenerationError(
            f"junction box exceeds the disc at depth {feat.depth}; increase resolution "
            "or reduce nesting"
        )

    h_box = max(H, (x_right - x_left) / 24)
    ny = max(2, round(2 * H / h_box))
    ys = np.linspace(-H, H, ny + 1)
    perim_x: list[float] = []
    for i, (cx, chart, ring) in enumerate(chart_holes):
        a, b = cx - widths[i], cx + widths[i]
        xs_c = _collar(soup, to3d, a, b, ys, chart, ring, h_box)
        perim_x.extend(xs_c[:-1])
        if i + 1 < len(chart_holes):
            ga, gb = b, chart_holes[i + 1][0] - widths[i + 1]
            ngap = max(1, round((gb - ga) / h_box))
            gxs = np.linspace(ga, gb, ngap + 1)
            _grid(soup, to3d, gxs, ys)
            perim_x.extend(gxs[:-1])
    perim_x.append(x_right)

    # box perimeter from the exact shared x samples
    box2d = []
    box2d += [(x, -H) for x in perim_x[:-1]]
    box2d += [(x_right, y) for y in ys[:-1]]
    box2d += [(x, H) for x in perim_x[::-1][:-1]]
    box2d += [(x_left, y) for y in ys[::-1][:-1]]
    box2d = np.array(box2d)
    box3d = [to3d(x, y) for x, y in box2d]

    # grow through a scaled copy of the box (the only shape that tolerates the
    # coarse shared sampling), ladder radially out to a dense circle, and
    # finish against the resolution-gon boundary circle
    kappa = 1.08
    n_dense = max(96, 2 * len(box2d))
    corner_angles = [
        math.atan2(sy * kappa * H, box_cx + sx * kappa * box_hx)
        for sx in (-1.0, 1.0)
        for sy in (-1.0, 1.0)
    ]
    uniform = 2 * math.pi * np.arange(n_dense) / n_dense - math.pi
    # drop uniform samples that nearly coincide with a corner angle; equal or
    # near-equal angles would break the strict monotonicity of the stitches
    keep = np.all(
        np.abs(uniform[:, None] - np.asarray(corner_angles)[None, :]) > 1e-6, axis=1
    )
    thetas_d = np.sort(np.concatenate([uniform[keep], corner_angles]))

    def scaled_box_radius(theta):
        best = math.inf
        c, s = math.cos(theta), math.sin(theta)
        if c > 1e-12:
            best = min(best, (box_cx + kappa * box_hx) / c)
        elif c < -1e-12:
            best = min(best, (box_cx - kappa * box_hx) / c)
        if abs(s) > 1e-12:
            best = min(best, kappa * H / abs(s))
        return best

    scaled2d = np.array(
        [(scaled_box_radius(t) * math.cos(t), scaled_box_radius(t) * math.sin(t)) for t in thetas_d]
    )
    scaled3d = np.array([to3d(x, y) for x, y in scaled2d])
    box_center = np.array([box_cx, 0.0])
    _stitch(
        soup,
        list(scaled3d),
        _ring_angles_2d(scaled2d, box_center),
        box3d,
        _ring_angles_2d(box2d, box_center),
    )

    mid2d = np.stack([rho_mid * np.cos(thetas_d), rho_mid * np.sin(thetas_d)], axis=1)
    mid3d = np.array([to3d(x, y) for x, y in mid2d])
    soup.ladder(scaled3d, mid3d)

    thetas = 2 * math.pi * np.arange(res) / res + offset
    circle3d = [
        math.cos(alpha) * u + disc_r * (math.cos(t) * e1 + math.sin(t) * e2) for t in thetas
    ]
    circle2d = np.stack([disc_r * np.cos(thetas), disc_r * np.sin(thetas)], axis=1)
    origin = np.zeros(2)
    _stitch(
        soup,
        circle3d,
        _ring_angles_2d(circle2d, origin),
        list(mid3d),
        _ring_angles_2d(mid2d, origin),
    )
    return circle3d


def _build_tube(soup: _Soup, bottom: np.ndarray, top: np.ndarray, res: int, h_step: float):
    """Straight bridge wall between two aligned rings (exact cylinder lines)."""
    length = float(np.linalg.norm(top.mean(axis=0) - bottom.mean(axis=0)))
    n_seg = int(min(8, max(1, round(length / max(h_step, 1e-9)))))
    prev = bottom
    for s in range(1, n_seg + 1):
        f = s / n_seg
        cur = bottom * (1 - f) + top * f if s < n_seg else top
        soup.ladder(prev, cur)
        prev = cur


def _build_torus_with_hole(soup: _Soup, center, facing, axis, major, minor, na, nb, offset):
    """Torus around `axis` with the vertex star facing `facing` removed.

    Returns the hexagonal hole ring (points of the removed vertex's link).
    """
    center = np.asarray(center, float)
    facing = np.asarray(facing, float)
    axis = np.asarray(axis, float)
    d0 = facing / np.linalg.norm(facing)
    side = np.cross(axis, d0)
    side /= np.linalg.norm(side)

    def point(ia, jb):
        a = 2 * math.pi * ia / na
        b = 2 * math.pi * jb / nb + offset
        d = math.cos(a) * d0 + math.sin(a) * side
        return center + (major + minor * math.cos(b)) * d + minor * math.sin(b) * axis

    # the vertex at (0, 0) sits at b-offset 0 only in the symmetric case; use
    # the exact grid vertex regardless, its star is what we remove
    removed = {(0, 0)}
    grid = {}
    for ia in range(na):
        for jb in range(nb):
            grid[(ia, jb)] = point(ia, jb)
    for ia in range(na):
        for jb in range(nb):
            ian, jbn = (ia + 1) % na, (jb + 1) % nb
            for tri in (((ia, jb), (ian, jb), (ian, jbn)), ((ia, jb), (ian, jbn), (ia, jbn))):
                if any(c == (0, 0) for c in tri):
                    continue
                soup.tri(grid[tri[0]], grid[tri[1]], grid[tri[2]])
    link = [(1, 0), (1, 1), (0, 1), (na - 1, 0), (na - 1, nb - 1), (0, nb - 1)]
    return np.array([grid[c] for c in link])


def _ring_on_sphere(radius, phi, r_hole, res, offset):
    """Junction circle around the equator point at `phi`, exactly on the sphere."""
    u = _direction(phi)
    e1, e2 = _plane_frame(phi)
    h = math.sqrt(radius * radius - r_hole * r_hole)
    return h * u + _ring_offsets((e1, e2), r_hole, res, offset)


def _axis_angles(pts: np.ndarray, axis_point: np.ndarray, frame) -> np.ndarray:
    e1, e2 = frame
    rel = np.asarray(pts) - np.asarray(axis_point)
    return np.arctan2(rel @ e2, rel @ e1)


# ---------------------------------------------------------------------------
# Generator
# ---------------------------------------------------------------------------

def generate_model_surface(spec: ModelSurfaceSpec) -> TriMesh:
    mesh, _ = generate_with_report(spec)
    return mesh


def generate_with_report(spec: ModelSurfaceSpec) -> tuple[TriMesh, dict]:
    """Build the surface and a reproducibility report (features, handles)."""
    layout = _compute_layout(spec)
    res = spec.resolution
    offset = 0.0 if spec.symmetric else 2 * math.pi / (3 * res)
    soup = _Soup()
    feats = layout.features

    # junction rings on the central sphere
    sphere_holes = []
    tube_bottom: dict[int, np.ndarray] = {}
    for v in layout.root_children:
        feat = feats[v]
        ring = _ring_on_sphere(SPHERE_RADIUS, feat.phi, feat.tube_radius, res, offset)
        sphere_holes.append((feat.phi, ring))
        tube_bottom[v] = ring

    nb_t = max(8, res // 3)
    neck_rings = []
    for handle in layout.handles:
        r_neck = 0.15 * handle.scale
        ring = _ring_on_sphere(SPHERE_RADIUS, handle.psi, r_neck, res, offset)
        sphere_holes.append((handle.psi, ring))
        neck_rings.append(ring)

    _build_sphere_with_holes(soup, SPHERE_RADIUS, res, sphere_holes)

    # torus handles and their necks
    for handle, neck_ring in zip(layout.handles, neck_rings):
        hs = handle.scale
        w = _direction(handle.psi)
        center = (SPHERE_RADIUS + 1.85 * hs) * w
        hexagon = _build_torus_with_hole(
            soup,
            center,
            facing=-w,
            axis=np.array([0.0, 1.0, 0.0]),
            major=hs,
            minor=0.35 * hs,
            na=max(12, res // 2),
            nb=nb_t,
            offset=offset,
        )
        frame = _plane_frame(handle.psi)
        anchor = SPHERE_RADIUS * w
        _stitch(
            soup,
            list(neck_ring),
            _axis_angles(neck_ring, anchor, frame),
            list(hexagon),
            _axis_angles(hexagon, anchor, frame),
        )

    # bridges and discs, outside-in per vertex
    boundary_rings = {}
    for v, feat in feats.items():
        u = _direction(feat.phi)
        e1, e2 = _plane_frame(feat.phi)
        offsets = _ring_offsets((e1, e2), feat.tube_radius, res, offset)
        top = math.cos(feat.alpha) * u + offsets
        if feat.parent < 0:
            bottom = tube_bottom[v]
        else:
            parent = feats[feat.parent]
            u_p = _direction(parent.phi)
            denom = float(u @ u_p)
            ts = (math.cos(parent.alpha) - offsets @ u_p) / denom
            bottom = ts[:, None] * u + offsets
        h_step = 4 * math.pi * feat.tube_radius / res
        _build_tube(soup, bottom, top, res, h_step)
        feat._tube_top = top  # type: ignore[attr-defined]
        feat._tube_bottom = bottom  # type: ignore[attr-defined]

    for v, feat in feats.items():
        holes = [feat._tube_top]  # type: ignore[attr-defined]
        for w in feat.children:
            holes.append(feats[w]._tube_bottom)  # type: ignore[attr-defined]
        boundary_rings[v] = _build_disc(soup, feat, holes, res, offset)

    mesh = soup.mesh().oriented()
    if spec.smooth_joints:
        mesh = _smooth_junction_rings(mesh, layout, res, offset)

    report = {
        "tree": ahu_code(spec.tree),
        "genus": spec.genus,
        "root_vertex": spec.root,
        "resolution": res,
        "shrink": spec.shrink,
        "symmetric": spec.symmetric,
        "symmetry_plane": "y=0" if spec.symmetric else None,
        "sphere_radius": SPHERE_RADIUS,
        "features": [
            {
                "vertex": v,
                "parent": (feat.parent if feat.parent >= 0 else layout.root),
                "depth": feat.depth,
                "azimuth": feat.phi,
                "cap_half_angle": feat.alpha,
                "disc_center": (math.cos(feat.alpha) * _direction(feat.phi)).tolist(),
                "disc_radius": math.sin(feat.alpha),
                "bridge_radius": feat.tube_radius,
            }
            for v, feat in sorted(feats.items())
        ],
        "handles": [
            {"azimuth": h.psi, "major_radius": h.scale, "minor_radius": 0.35 * h.scale}
            for h in layout.handles
        ],
        "vertices": mesh.vertex_count,
        "triangles": mesh.triangle_count,
    }
    return mesh, report


def _smooth_junction_rings(mesh: TriMesh, layout: _Layout, res: int, offset: float) -> TriMesh:
    """One Laplacian step restricted to vertices on junction rings."""
    ring_points = []
    for feat in layout.features.values():
        ring_points.append(feat._tube_top)  # type: ignore[attr-defined]
        ring_points.append(feat._tube_bottom)  # type: ignore[attr-defined]
    if not ring_points:
        return mesh
    targets = np.vstack(ring_points)
    view = {p.tobytes() for p in targets}
    sel = np.array([v.tobytes() in view for v in mesh.vertices])
    idx = np.nonzero(sel)[0]
    if len(idx) == 0:
        return mesh
    neighbor_sum = np.zeros_like(mesh.vertices)
    neighbor_cnt = np.zeros(mesh.vertex_count)
    for e in mesh.edge_faces():
        u, v = e
        neighbor_sum[u] += mesh.vertices[v]
        neighbor_sum[v] += mesh.vertices[u]
        neighbor_cnt[u] += 1
        neighbor_cnt[v] += 1
    verts = mesh.vertices.copy()
    verts[idx] = 0.5 * verts[idx] + 0.5 * neighbor_sum[idx] / neighbor_cnt[idx, None]
    return TriMesh(verts, mesh.triangles)


# ---------------------------------------------------------------------------
# Generic genus attachment by connected sum with small tori
# ---------------------------------------------------------------------------

def attach_genus(mesh: TriMesh, g: int, site_center, site_radius: float) -> TriMesh:
    """Connected-sum `g` small torus handles onto a disc-like patch of `mesh`.

    Each handle removes one interior triangle inside the site ball and
    stitches a small torus over the opening, raising the genus by one and
    leaving the boundary untouched.
    """
    if g < 0:
        raise ValueError("genus increment must be nonnegative")
    if g == 0:
        return mesh
    site_center = np.asarray(site_center, float)
    if site_radius <= 0:
        raise ValueError("site radius must be positive")

    oriented = mesh.oriented()
    verts, tris = oriented.vertices, oriented.triangles
    inside = np.linalg.norm(verts - site_center, axis=1) <= site_radius
    patch = np.nonzero(inside[tris].any(axis=1))[0]
    if len(patch) == 0:
        raise GenerationError("site ball does not touch the mesh")
    if not _patch_is_disc(oriented, patch):
        raise GenerationError("site patch is not a disc")

    ef = oriented.edge_faces()
    boundary = {e for e, f in ef.items() if len(f) == 1}

    def interior(t):
        a, b, c = tris[t]
        return all(
            ((u, v) if u < v else (v, u)) not in boundary
            for u, v in ((a, b), (b, c), (c, a))
        )

    centroids = verts[tris[patch]].mean(axis=1)
    order = patch[np.argsort(np.linalg.norm(centroids - site_center, axis=1), kind="stable")]

    chosen: list[int] = []
    used_verts: set[int] = set()
    for t in order:
        if not interior(t):
            continue
        if used_verts.intersection(tris[t]):
            continue
        chosen.append(int(t))
        used_verts.update(int(x) for x in tris[t])
        if len(chosen) == g:
            break
    if len(chosen) < g:
        raise GenerationError(
            f"clearance violation: only {len(chosen)} of {g} handle sites fit in the patch"
        )

    soup = _Soup()
    remove = set()
    for t in chosen:
        corners = verts[tris[t]]
        centroid = corners.mean(axis=0)
        n = np.cross(corners[1] - corners[0], corners[2] - corners[0])
        n_norm = np.linalg.norm(n)
        if n_norm < 1e-300:
            raise GenerationError("degenerate triangle at handle site")
        n = n / n_norm
        mean_edge = float(
            np.mean([np.linalg.norm(corners[i] - corners[(i + 1) % 3]) for i in range(3)])
        )
        slack = site_radius - float(np.linalg.norm(centroid - site_center))
        hs = min(0.8 * mean_edge, 0.25 * slack / 3.2)
        if hs <= 0:
            raise GenerationError("clearance violation: handle does not fit in the site ball")
        n = _clear_side(oriented, t, centroid, n, 3.3 * hs)
        center = centroid + (1.85 * hs) * n
        e1 = corners[1] - corners[0]
        e1 = e1 - (e1 @ n) * n
        e1 /= np.linalg.norm(e1)
        hexagon = _build_torus_with_hole(
            soup, center, facing=-n, axis=e1, major=hs, minor=0.35 * hs, na=16, nb=10, offset=0.0
        )
        frame = (e1, np.cross(n, e1))
        ring = [verts[i] for i in tris[t]]
        _stitch(
            soup,
            ring,
            _axis_angles(np.array(ring), centroid, frame),
            list(hexagon),
            _axis_angles(hexagon, centroid, frame),
        )
        remove.add(int(t))

    kept = [t for i, t in enumerate(tris.tolist()) if i not in remove]
    pts = list(verts) + soup.points
    base = len(verts)
    new_tris = kept + [(a + base, b + base, c + base) for a, b, c in soup.tris]
    return weld_soup(np.array(pts), np.array(new_tris, dtype=np.int64)).oriented()


def _patch_is_disc(mesh: TriMesh, patch: np.ndarray) -> bool:
    """Connected and Euler characteristic 1 over the patch subcomplex."""
    patch_set = set(int(t) for t in patch)
    tris = mesh.triangles[patch]
    vs = set(int(v) for v in tris.ravel())
    es = set()
    for a, b, c in tris.tolist():
        for u, v in ((a, b), (b, c), (c, a)):
            es.add((u, v) if u < v else (v, u))
    chi = len(vs) - len(es) + len(patch)
    if chi != 1:
        return False
    ef = mesh.edge_faces()
    seen = {int(patch[0])}
    stack = [int(patch[0])]
    while stack:
        t = stack.pop()
        a, b, c = mesh.triangles[t]
        for u, v in ((a, b), (b, c), (c, a)):
            e = (u, v) if u < v else (v, u)
            for o in ef[e]:
                if o in patch_set and o not in seen:
                    seen.add(o)
                    stack.append(o)
    return len(seen) == len(patch_set)


def _clear_side(mesh: TriMesh, tri: int, centroid: np.ndarray, normal: np.ndarray, reach: float):
    """Pick the normal sign with more room for the handle."""
    others = np.ones(mesh.vertex_count, dtype=bool)
    others[mesh.triangles[tri]] = False
    pts = mesh.vertices[others]
    if len(pts) == 0:
        return normal
    d_plus = np.min(np.linalg.norm(pts - (centroid + reach * 0.6 * normal), axis=1))
    d_minus = np.min(np.linalg.norm(pts - (centroid - reach * 0.6 * normal), axis=1))
    return normal if d_plus >= d_minus else -normal
