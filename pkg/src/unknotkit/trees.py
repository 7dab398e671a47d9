"""Finite multigraphs, unrooted trees, canonical codes, and tree enumeration.

The canonical form for an unrooted tree is a balanced-parenthesis string:
root the tree at its center (at both centers for bicentral trees, keeping the
lexicographically smaller result) and sort child codes at every node.  Two
trees get equal codes exactly when they are isomorphic, which is what the
rest of the package uses to compare boundary graphs.
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass
from fractions import Fraction
from math import factorial

__all__ = [
    "CanonicalCode",
    "Multigraph",
    "Tree",
    "TreeFormatError",
    "InvalidTreeError",
    "parse_tree",
    "ahu_code",
    "tree_centers",
    "trees_isomorphic",
    "multigraphs_isomorphic",
    "is_tree",
    "enumerate_free_trees",
    "cayley_lower_bound",
    "to_dot",
]

# Canonical codes are plain strings over "()"; equal code <=> isomorphic tree.
CanonicalCode = str

MAX_ENUMERATION_VERTICES = 12


class TreeFormatError(ValueError):
    """Malformed tree text; carries the 0-based offset of the problem."""

    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class InvalidTreeError(ValueError):
    """A Multigraph that was required to be a tree is not one."""


@dataclass(frozen=True)
class Multigraph:
    """Undirected multigraph on vertices 0..vertex_count-1.

    Self-loops and parallel edges are allowed.  The order of the edge list
    carries no meaning; all operations are invariant under permuting it.
    """

    vertex_count: int
    edges: tuple[tuple[int, int], ...]
    vertex_labels: tuple[str, ...] | None = None

    def __init__(self, vertex_count, edges=(), vertex_labels=None):
        if vertex_count < 0:
            raise ValueError("vertex_count must be nonnegative")
        norm = []
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if not (0 <= u < vertex_count and 0 <= v < vertex_count):
                raise ValueError(f"edge {e} has an endpoint outside 0..{vertex_count - 1}")
            norm.append((u, v) if u <= v else (v, u))
        object.__setattr__(self, "vertex_count", int(vertex_count))
        object.__setattr__(self, "edges", tuple(norm))
        if vertex_labels is not None:
            vertex_labels = tuple(str(s) for s in vertex_labels)
            if len(vertex_labels) != vertex_count:
                raise ValueError("vertex_labels length must equal vertex_count")
        object.__setattr__(self, "vertex_labels", vertex_labels)

    @property
    def edge_count(self) -> int:
        return len(self.edges)

    def adjacency(self) -> list[list[int]]:
        """Neighbor lists; a self-loop contributes its vertex once."""
        adj: list[list[int]] = [[] for _ in range(self.vertex_count)]
        for u, v in self.edges:
            if u == v:
                adj[u].append(u)
            else:
                adj[u].append(v)
                adj[v].append(u)
        return adj

    def degrees(self) -> list[int]:
        """Vertex degrees with self-loops counted twice."""
        deg = [0] * self.vertex_count
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def is_connected(self) -> bool:
        if self.vertex_count == 0:
            return False
        adj = self.adjacency()
        seen = [False] * self.vertex_count
        stack = [0]
        seen[0] = True
        while stack:
            u = stack.pop()
            for w in adj[u]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        return all(seen)


class Tree(Multigraph):
    """A connected, loop-free, multi-edge-free Multigraph with V-1 edges."""

    def __init__(self, vertex_count, edges=(), vertex_labels=None):
        super().__init__(vertex_count, edges, vertex_labels)
        problem = _tree_violation(self)
        if problem is not None:
            raise InvalidTreeError(problem)


def _tree_violation(g: Multigraph) -> str | None:
    if g.vertex_count < 1:
        return "a tree has at least one vertex"
    if g.edge_count != g.vertex_count - 1:
        return f"a tree on {g.vertex_count} vertices needs {g.vertex_count - 1} edges, got {g.edge_count}"
    seen = set()
    for u, v in g.edges:
        if u == v:
            return f"self-loop at vertex {u}"
        if (u, v) in seen:
            return f"parallel edge {u}-{v}"
        seen.add((u, v))
    if not g.is_connected():
        return "graph is not connected"
    return None


def is_tree(g: Multigraph) -> bool:
    """True iff `g` is connected and acyclic with no self-loops or parallel edges."""
    return _tree_violation(g) is None


def as_tree(g: Multigraph) -> Tree:
    """View `g` as a Tree, validating the invariants."""
    if isinstance(g, Tree):
        return g
    return Tree(g.vertex_count, g.edges, g.vertex_labels)


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def parse_tree(text: str) -> Tree:
    """Parse the nested-parenthesis tree format.

    A tree is "(" child* ")" where each child is itself a tree; whitespace is
    ignored.  The outermost group becomes vertex 0, children are numbered in
    the order encountered.  The root choice in the text does not affect
    canonical codes downstream.
    """
    stripped = [(i, ch) for i, ch in enumerate(text) if not ch.isspace()]
    if not stripped:
        raise TreeFormatError("empty input", 0)

    edges: list[tuple[int, int]] = []
    stack: list[int] = []
    count = 0
    for idx, (pos, ch) in enumerate(stripped):
        if ch == "(":
            vertex = count
            count += 1
            if stack:
                edges.append((stack[-1], vertex))
            stack.append(vertex)
        elif ch == ")":
            if not stack:
                raise TreeFormatError("unmatched ')'", pos)
            stack.pop()
            if not stack and idx != len(stripped) - 1:
                raise TreeFormatError("trailing input after the root group", stripped[idx + 1][0])
        else:
            raise TreeFormatError(f"unexpected character {ch!r}", pos)
    if stack:
        raise TreeFormatError("unmatched '('", stripped[-1][0])
    return Tree(count, edges)


# ---------------------------------------------------------------------------
# Canonical codes
# ---------------------------------------------------------------------------

def tree_centers(t: Multigraph) -> list[int]:
    """The one or two center vertices of a tree, by iterated leaf removal."""
    t = as_tree(t)
    n = t.vertex_count
    if n <= 2:
        return list(range(n))
    adj = t.adjacency()
    deg = [len(a) for a in adj]
    layer = [v for v in range(n) if deg[v] == 1]
    remaining = n
    while remaining > 2:
        remaining -= len(layer)
        nxt = []
        for v in layer:
            deg[v] = 0
            for w in adj[v]:
                if deg[w] > 0:
                    deg[w] -= 1
                    if deg[w] == 1:
                        nxt.append(w)
        layer = nxt
    return sorted(layer)


def _rooted_code(t: Multigraph, root: int) -> str:
    adj = t.adjacency()
    # Iterative post-order; children codes sorted at every node.
    order: list[tuple[int, int]] = []
    stack = [(root, -1)]
    while stack:
        v, parent = stack.pop()
        order.append((v, parent))
        for w in adj[v]:
            if w != parent:
                stack.append((w, v))
    codes = [""] * t.vertex_count
    for v, parent in reversed(order):
        children = sorted(codes[w] for w in adj[v] if w != parent)
        codes[v] = "(" + "".join(children) + ")"
    return codes[root]


def rooted_ahu_code(t: Multigraph, root: int) -> CanonicalCode:
    """Canonical code of `t` rooted at `root` (root choice is significant)."""
    t = as_tree(t)
    if not 0 <= root < t.vertex_count:
        raise ValueError(f"root {root} out of range")
    return _rooted_code(t, root)


def ahu_code(t: Multigraph) -> CanonicalCode:
    """Root-independent canonical code of an unrooted tree.

    Roots at the tree's center; a bicentral tree is rooted at both centers and
    the lexicographically smaller code wins.
    """
    t = as_tree(t)
    return min(_rooted_code(t, c) for c in tree_centers(t))


def trees_isomorphic(a: Multigraph, b: Multigraph) -> bool:
    """Unrooted-tree isomorphism via canonical codes."""
    return ahu_code(a) == ahu_code(b)


# ---------------------------------------------------------------------------
# Multigraph isomorphism (exact backtracking; inputs here are tiny)
# ---------------------------------------------------------------------------

def _multi_adjacency(g: Multigraph) -> list[Counter]:
    adj = [Counter() for _ in range(g.vertex_count)]
    for u, v in g.edges:
        adj[u][v] += 1
        if u != v:
            adj[v][u] += 1
    return adj


def _vertex_signature(g: Multigraph) -> list[tuple[int, int]]:
    loops = [0] * g.vertex_count
    deg = [0] * g.vertex_count
    for u, v in g.edges:
        if u == v:
            loops[u] += 1
        else:
            deg[u] += 1
            deg[v] += 1
    return list(zip(deg, loops))


def multigraphs_isomorphic(a: Multigraph, b: Multigraph) -> bool:
    """True iff an edge-multiplicity-preserving vertex bijection exists.

    Degree/self-loop refinement narrows the candidate classes, then plain
    backtracking checks multiplicities exactly.
    """
    if a.vertex_count != b.vertex_count or a.edge_count != b.edge_count:
        return False
    n = a.vertex_count
    if n == 0:
        return True

    sig_a = _vertex_signature(a)
    sig_b = _vertex_signature(b)
    if sorted(sig_a) != sorted(sig_b):
        return False

    by_sig_b: dict[tuple[int, int], list[int]] = defaultdict(list)
    for v, s in enumerate(sig_b):
        by_sig_b[s].append(v)

    adj_a = _multi_adjacency(a)
    adj_b = _multi_adjacency(b)

    # Map vertices of `a` in order of most-constrained signature class first.
    order = sorted(range(n), key=lambda v: (len(by_sig_b[sig_a[v]]), v))
    mapping = [-1] * n
    inverse = [-1] * n

    def backtrack(k: int) -> bool:
        if k == n:
            return True
        v = order[k]
        for w in by_sig_b[sig_a[v]]:
            if inverse[w] >= 0:
                continue
            if adj_a[v][v] != adj_b[w][w]:
                continue
            ok = True
            for u, mult in adj_a[v].items():
                if u == v:
                    continue
                mu = mapping[u]
                if mu >= 0 and adj_b[w][mu] != mult:
                    ok = False
                    break
            if ok:
                # also reject edges w has to mapped vertices that v lacks
                for x, mult in adj_b[w].items():
                    if x == w or inverse[x] < 0:
                        continue
                    if adj_a[v][inverse[x]] != mult:
                        ok = False
                        break
            if not ok:
                continue
            mapping[v] = w
            inverse[w] = v
            if backtrack(k + 1):
                return True
            mapping[v] = -1
            inverse[w] = -1
        return False

    return backtrack(0)


# ---------------------------------------------------------------------------
# Enumeration and counting
# ---------------------------------------------------------------------------

def _tree_from_code(code: CanonicalCode) -> Tree:
    return parse_tree(code)


def enumerate_free_trees(n: int) -> list[CanonicalCode]:
    """All isomorphism classes of trees on `n` vertices, as sorted codes.

    Grows trees one leaf at a time: every class on n vertices arises from a
    class on n-1 vertices by attaching a leaf, so extending every vertex of
    every smaller class and deduplicating by canonical code is exhaustive.
    """
    if not 1 <= n <= MAX_ENUMERATION_VERTICES:
        raise ValueError(f"n must be in 1..{MAX_ENUMERATION_VERTICES}, got {n}")
    level: set[CanonicalCode] = {"()"}
    for size in range(2, n + 1):
        nxt: set[CanonicalCode] = set()
        for code in level:
            t = _tree_from_code(code)
            for v in range(t.vertex_count):
                grown = Tree(size, t.edges + ((v, size - 1),))
                nxt.add(ahu_code(grown))
        level = nxt
    return sorted(level)


def cayley_lower_bound(n: int) -> Fraction:
    """Exact lower bound n^(n-2)/n! for the number of tree classes on n vertices.

    For n = 1 the power n^(-1) is read as 1/n, making the bound 1.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if n == 1:
        return Fraction(1)
    return Fraction(n ** (n - 2), factorial(n))


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------

def to_dot(g: Multigraph, name: str = "G") -> str:
    """Undirected DOT text with stable vertex numbering."""
    lines = [f"graph {name} {{"]
    for v in range(g.vertex_count):
        if g.vertex_labels is not None:
            lines.append(f'  {v} [label="{g.vertex_labels[v]}"];')
        else:
            lines.append(f"  {v};")
    for u, v in g.edges:
        lines.append(f"  {u} -- {v};")
    lines.append("}")
    return "\n".join(lines) + "\n"
