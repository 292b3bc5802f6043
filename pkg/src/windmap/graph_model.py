"""Weighted oriented graphs and their cycle-space linear algebra.

The central object is :class:`WeightedGraph`, an ordered list of oriented
weighted edges over an ordered list of vertices.  Edge order and orientation
are authoritative: they fix the columns of the incidence matrix and therefore
the coordinates of every cycle-space computation downstream.

Input graphs must be simple, connected, and free of bridges (every edge has
to lie on a cycle, otherwise its angle difference is forced and the cycle
coordinates cannot see it).  Smoothing and subdivision produce derived graphs
that may relax the simplicity requirement.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

from ._intlinalg import bareiss_determinant, smith_normal_form


class GraphValidationError(ValueError):
    """Raised when a graph document violates a structural invariant."""


@dataclass(frozen=True)
class Edge:
    tail: object
    head: object
    weight: float

    def reversed(self) -> "Edge":
        return Edge(self.head, self.tail, self.weight)


@dataclass(frozen=True)
class WeightedGraph:
    """Oriented weighted graph with authoritative vertex and edge order.

    ``multi_ok`` marks derived graphs (smoothing output) where self-loops and
    parallel edges are tolerated; such graphs are never fed back into
    enumeration, only their combinatorics are read off.
    """

    vertices: tuple
    edges: tuple
    multi_ok: bool = False

    def __post_init__(self):
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple(self.edges))
        index = {v: i for i, v in enumerate(self.vertices)}
        if len(index) != len(self.vertices):
            raise GraphValidationError("duplicate vertex id")
        object.__setattr__(self, "_vindex", index)
        for e in self.edges:
            if e.tail not in index or e.head not in index:
                raise GraphValidationError(f"edge {e.tail}->{e.head} uses unknown vertex")

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @property
    def cycle_rank(self) -> int:
        """Dimension of the cycle space, |E| - |V| + 1 for a connected graph."""
        return self.n_edges - self.n_vertices + 1

    def vertex_index(self, v) -> int:
        return self._vindex[v]

    def weights(self) -> np.ndarray:
        return np.array([e.weight for e in self.edges], dtype=float)

    def endpoint_indices(self) -> np.ndarray:
        """(|E|, 2) array of (tail_index, head_index)."""
        return np.array(
            [(self._vindex[e.tail], self._vindex[e.head]) for e in self.edges], dtype=int
        )

    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n_vertices, dtype=int)
        for e in self.edges:
            deg[self._vindex[e.tail]] += 1
            deg[self._vindex[e.head]] += 1
        return deg

    def adjacency_lists(self) -> list[list[tuple[int, int]]]:
        """Per-vertex list of (edge_index, neighbor_vertex_index), both directions."""
        adj: list[list[tuple[int, int]]] = [[] for _ in range(self.n_vertices)]
        for j, e in enumerate(self.edges):
            t, h = self._vindex[e.tail], self._vindex[e.head]
            adj[t].append((j, h))
            if h != t:
                adj[h].append((j, t))
        return adj

    def is_connected(self) -> bool:
        if self.n_vertices == 0:
            return False
        adj = self.adjacency_lists()
        seen = {0}
        stack = [0]
        while stack:
            u = stack.pop()
            for _, w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return len(seen) == self.n_vertices


def incidence_matrix(g: WeightedGraph) -> np.ndarray:
    """Signed incidence matrix, +1 at the head and -1 at the tail of each edge.

    Columns follow the graph's edge order.  Self-loops are rejected because
    their column would vanish.
    """
    B = np.zeros((g.n_vertices, g.n_edges), dtype=int)
    for j, e in enumerate(g.edges):
        t, h = g.vertex_index(e.tail), g.vertex_index(e.head)
        if t == h:
            raise GraphValidationError("incidence matrix undefined for self-loops")
        B[t, j] -= 1
        B[h, j] += 1
    return B


def find_bridges(g: WeightedGraph) -> list[int]:
    """Edge indices whose removal disconnects the graph (Tarjan low-link)."""
    adj = g.adjacency_lists()
    n = g.n_vertices
    disc = [-1] * n
    low = [0] * n
    bridges: list[int] = []
    counter = [0]

    def dfs(root):
        # iterative DFS so deep subdivided graphs do not hit the recursion cap
        stack = [(root, -1, iter(adj[root]))]
        disc[root] = low[root] = counter[0]
        counter[0] += 1
        while stack:
            u, in_edge, it = stack[-1]
            advanced = False
            for eidx, w in it:
                if eidx == in_edge:
                    continue
                if disc[w] == -1:
                    disc[w] = low[w] = counter[0]
                    counter[0] += 1
                    stack.append((w, eidx, iter(adj[w])))
                    advanced = True
                    break
                low[u] = min(low[u], disc[w])
            if not advanced:
                stack.pop()
                if stack:
                    p, pedge, _ = stack[-1]
                    low[p] = min(low[p], low[u])
                    if low[u] > disc[p]:
                        bridges.append(pedge)

    for r in range(n):
        if disc[r] == -1:
            dfs(r)
    return sorted(bridges)


def validate_graph(g: WeightedGraph, *, require_bridge_free: bool = True) -> None:
    """Check the structural invariants of an input graph.

    Raises :class:`GraphValidationError` naming the offending element.
    """
    if g.n_vertices == 0:
        raise GraphValidationError("graph has no vertices")
    seen_pairs = set()
    for j, e in enumerate(g.edges):
        if e.weight == 0 or not math.isfinite(e.weight):
            raise GraphValidationError(f"edge {j} ({e.tail}->{e.head}) has weight {e.weight}")
        if not g.multi_ok:
            if e.tail == e.head:
                raise GraphValidationError(f"edge {j} is a self-loop at {e.tail}")
            key = frozenset((e.tail, e.head))
            if key in seen_pairs:
                raise GraphValidationError(f"edge {j} ({e.tail}->{e.head}) duplicates an earlier edge")
            seen_pairs.add(key)
    if not g.is_connected():
        raise GraphValidationError("graph is not connected")
    if require_bridge_free:
        bridges = find_bridges(g)
        if bridges:
            j = bridges[0]
            e = g.edges[j]
            raise GraphValidationError(
                f"edge {j} ({e.tail}->{e.head}) is a bridge; every edge must lie on a cycle"
            )


def load_graph(source) -> WeightedGraph:
    """Build and validate a graph from a document.

    ``source`` may be a dict, a JSON string, or a path to a JSON file with
    the schema ``{"vertices": [...], "edges": [{"tail","head","weight"}...]}``.
    Edge order in the document is preserved; orientation is tail -> head.
    """
    doc = read_document(source)
    try:
        vertices = list(doc["vertices"])
        edges = [Edge(e["tail"], e["head"], float(e.get("weight", 1.0))) for e in doc["edges"]]
    except (KeyError, TypeError) as exc:
        raise GraphValidationError(f"malformed graph document: {exc}") from exc
    g = WeightedGraph(tuple(vertices), tuple(edges))
    validate_graph(g)
    return g


def read_document(source) -> dict:
    """Load a graph document from a dict, JSON text, or file path."""
    if isinstance(source, dict):
        return source
    if isinstance(source, (str, bytes)) and not str(source).lstrip().startswith("{"):
        with open(source, "r", encoding="utf-8") as fh:
            return json.load(fh)
    return json.loads(source)


def document_omega(doc: dict, g: WeightedGraph) -> np.ndarray:
    """Natural frequencies from a document, defaulting to all zeros."""
    omega = doc.get("omega")
    if omega is None:
        return np.zeros(g.n_vertices)
    omega = np.asarray(omega, dtype=float)
    if omega.shape != (g.n_vertices,):
        raise GraphValidationError("omega length does not match vertex count")
    return omega


# ---------------------------------------------------------------------------
# spanning trees


def spanning_tree(g: WeightedGraph) -> tuple[int, ...]:
    """Deterministic BFS spanning tree, returned as sorted edge indices."""
    adj = g.adjacency_lists()
    seen = {0}
    order = [0]
    tree: list[int] = []
    for u in order:
        for eidx, w in sorted(adj[u]):
            if w not in seen:
                seen.add(w)
                order.append(w)
                tree.append(eidx)
    if len(seen) != g.n_vertices:
        raise GraphValidationError("graph is not connected")
    return tuple(sorted(tree))


def is_spanning_tree(g: WeightedGraph, edge_indices: Iterable[int]) -> bool:
    idx = list(edge_indices)
    if len(idx) != g.n_vertices - 1:
        return False
    parent = list(range(g.n_vertices))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for j in idx:
        e = g.edges[j]
        a, b = find(g.vertex_index(e.tail)), find(g.vertex_index(e.head))
        if a == b:
            return False
        parent[a] = b
    return True


def spanning_trees(g: WeightedGraph, mode: str = "count", cap: int = 10**6):
    """Count or enumerate spanning trees of the unweighted graph.

    Count mode evaluates the reduced-Laplacian determinant exactly over the
    integers.  Enumerate mode walks co-tree subsets (size = cycle rank), which
    keeps the combinatorics proportional to the cycle structure rather than
    the vertex count; each spanning tree is produced exactly once as a sorted
    tuple of edge indices.
    """
    if mode == "count":
        n = g.n_vertices
        L = np.zeros((n, n), dtype=object)
        for e in g.edges:
            t, h = g.vertex_index(e.tail), g.vertex_index(e.head)
            if t == h:
                continue
            L[t, t] += 1
            L[h, h] += 1
            L[t, h] -= 1
            L[h, t] -= 1
        if n == 1:
            return 1
        return int(bareiss_determinant(L[1:, 1:]))
    if mode != "enumerate":
        raise ValueError(f"unknown mode {mode!r}")

    total = spanning_trees(g, "count")
    if total > cap:
        raise ValueError(f"spanning tree count {total} exceeds enumeration cap {cap}")
    c = g.cycle_rank
    all_edges = set(range(g.n_edges))
    trees = []
    for cotree in combinations(range(g.n_edges), c):
        tree = sorted(all_edges - set(cotree))
        if is_spanning_tree(g, tree):
            trees.append(tuple(tree))
    assert len(trees) == total
    return trees


# ---------------------------------------------------------------------------
# cycle bases


@dataclass(frozen=True)
class CycleBasis:
    """Integer cycle basis, one row per independent cycle.

    ``tree`` records the spanning tree that generated a fundamental basis
    (None for bases supplied externally).
    """

    vectors: np.ndarray
    tree: tuple | None = None

    def __post_init__(self):
        v = np.asarray(self.vectors, dtype=int)
        object.__setattr__(self, "vectors", v)

    @property
    def size(self) -> int:
        return self.vectors.shape[0]


def fundamental_cycle_basis(g: WeightedGraph, tree: Sequence[int] | None = None) -> CycleBasis:
    """Fundamental cycle basis for a spanning tree.

    Row order follows the co-tree edge order.  Each co-tree edge f carries
    entry +1 in its own row; the rest of the row is the unique tree path from
    head(f) back to tail(f), signed by traversal direction.  Every row is an
    exact integer kernel vector of the incidence matrix.
    """
    if tree is None:
        tree = spanning_tree(g)
    tree = tuple(tree)
    if not is_spanning_tree(g, tree):
        raise GraphValidationError("provided edge set is not a spanning tree")
    tree_set = set(tree)
    n = g.n_vertices

    tree_adj: list[list[tuple[int, int]]] = [[] for _ in range(n)]
    for j in tree:
        e = g.edges[j]
        t, h = g.vertex_index(e.tail), g.vertex_index(e.head)
        tree_adj[t].append((j, h))
        tree_adj[h].append((j, t))

    def tree_path(src: int, dst: int) -> list[tuple[int, int, int]]:
        # returns [(edge, from, to)] along the unique tree path src -> dst
        prev: dict[int, tuple[int, int]] = {src: (-1, -1)}
        queue = [src]
        for u in queue:
            if u == dst:
                break
            for j, w in tree_adj[u]:
                if w not in prev:
                    prev[w] = (j, u)
                    queue.append(w)
        path = []
        u = dst
        while u != src:
            j, p = prev[u]
            path.append((j, p, u))
            u = p
        path.reverse()
        return path

    cotree = [j for j in range(g.n_edges) if j not in tree_set]
    rows = np.zeros((len(cotree), g.n_edges), dtype=int)
    for i, f in enumerate(cotree):
        e = g.edges[f]
        rows[i, f] = 1
        t, h = g.vertex_index(e.tail), g.vertex_index(e.head)
        for j, u, w in tree_path(h, t):
            ej = g.edges[j]
            forward = g.vertex_index(ej.tail) == u and g.vertex_index(ej.head) == w
            rows[i, j] = 1 if forward else -1
    basis = CycleBasis(rows, tree=tree)
    B = incidence_matrix(g)
    assert not (B @ rows.T).any(), "fundamental cycle rows must lie in ker(B)"
    return basis


def cycle_basis_lattice_check(basis: CycleBasis | np.ndarray) -> tuple[bool, list[int]]:
    """Whether the basis rows span the full integer lattice of cycle space.

    Decided exactly: the Smith normal form divisors must all equal 1.
    """
    vectors = basis.vectors if isinstance(basis, CycleBasis) else np.asarray(basis, dtype=int)
    divisors, _, _, _ = smith_normal_form(vectors)
    full_rank = len(divisors) == vectors.shape[0]
    return full_rank and all(d == 1 for d in divisors), divisors


# ---------------------------------------------------------------------------
# smoothing and subdivision


def smooth_two_valent(g: WeightedGraph) -> WeightedGraph:
    """Repeatedly merge the two edges at each 2-valent vertex.

    The result may contain self-loops and parallel edges; only its edge count
    is meaningful downstream (merged weights are set to the first edge's
    weight and are not used).  A graph that has collapsed to a single
    self-loop keeps its last vertex.
    """
    vertices = list(g.vertices)
    edges = [(e.tail, e.head, e.weight) for e in g.edges]

    while True:
        deg: dict = {v: 0 for v in vertices}
        incident: dict = {v: [] for v in vertices}
        for i, (t, h, w) in enumerate(edges):
            deg[t] += 1
            deg[h] += 1
            incident[t].append(i)
            if h != t:
                incident[h].append(i)
        target = None
        for v in vertices:
            if deg[v] != 2:
                continue
            inc = incident[v]
            if len(inc) == 1:
                # single self-loop: the lone-loop exception, leave it alone
                continue
            target = v
            break
        if target is None:
            break
        i1, i2 = incident[target]
        t1, h1, w1 = edges[i1]
        t2, h2, w2 = edges[i2]
        a = t1 if h1 == target else h1
        b = h2 if t2 == target else t2
        # orient the merged edge a -> b following the walk through the vertex
        merged = (a, b, w1)
        edges = [e for i, e in enumerate(edges) if i not in (i1, i2)]
        edges.append(merged)
        vertices.remove(target)

    return WeightedGraph(tuple(vertices), tuple(Edge(*e) for e in edges), multi_ok=True)


@dataclass(frozen=True)
class SubdivisionScheme:
    """Replace each edge by a path of ceil(rate * scale) edges.

    New edges inherit the parent's weight (and branch, via ``parent_edge`` in
    the result).  ``rates`` may be a scalar applied to every edge.
    """

    base: WeightedGraph
    rates: tuple
    scale: int = 1

    def __post_init__(self):
        rates = self.rates
        if np.isscalar(rates):
            rates = tuple(float(rates) for _ in range(self.base.n_edges))
        else:
            rates = tuple(float(r) for r in rates)
        if len(rates) != self.base.n_edges:
            raise ValueError("one rate per base edge required")
        if any(r <= 0 for r in rates):
            raise ValueError("subdivision rates must be positive")
        if self.scale < 1:
            raise ValueError("scale must be a positive integer")
        object.__setattr__(self, "rates", rates)


@dataclass(frozen=True)
class SubdividedGraph:
    graph: WeightedGraph
    parent_edge: tuple  # new edge index -> base edge index


def subdivide(scheme: SubdivisionScheme) -> SubdividedGraph:
    """Build the subdivided graph for a scheme.

    Interior vertices are 2-valent by construction so the cycle rank of the
    base graph is preserved exactly.
    """
    g = scheme.base
    vertices = list(g.vertices)
    new_edges: list[Edge] = []
    parent: list[int] = []
    for j, e in enumerate(g.edges):
        # epsilon guards float noise in rate*scale when the product is integral
        n_seg = max(1, math.ceil(scheme.rates[j] * scheme.scale - 1e-9))
        chain = [e.tail]
        for k in range(1, n_seg):
            v = f"s{j}.{k}"
            chain.append(v)
            vertices.append(v)
        chain.append(e.head)
        for a, b in zip(chain[:-1], chain[1:]):
            new_edges.append(Edge(a, b, e.weight))
            parent.append(j)
    out = WeightedGraph(tuple(vertices), tuple(new_edges))
    return SubdividedGraph(out, tuple(parent))
