"""Standard test graphs: cycles, theta graphs, diamonds, and random corpora.

Builders return graphs with deterministic vertex and edge order so results
are reproducible byte for byte.  Some builders also return a distinguished
cycle basis when a canonical choice matters.
"""
from __future__ import annotations

import numpy as np

from .graph_model import (
    CycleBasis,
    Edge,
    SubdivisionScheme,
    WeightedGraph,
    find_bridges,
    subdivide,
    validate_graph,
)


def cycle_graph(n: int, weights=1.0) -> WeightedGraph:
    """Ring on vertices 0..n-1 with uniform orientation i -> i+1."""
    if n < 3:
        raise ValueError("a simple ring needs at least 3 vertices")
    if np.isscalar(weights):
        weights = [float(weights)] * n
    edges = tuple(Edge(i, (i + 1) % n, float(weights[i])) for i in range(n))
    return WeightedGraph(tuple(range(n)), edges)


def triangle(weights=(1.0, 1.0, 1.0)) -> WeightedGraph:
    return cycle_graph(3, list(weights))


def path_graph(n: int) -> WeightedGraph:
    """Path on n vertices; every edge is a bridge, so this fails validation.

    Useful for exercising the rejection path.
    """
    edges = tuple(Edge(i, i + 1, 1.0) for i in range(n - 1))
    return WeightedGraph(tuple(range(n)), edges)


def theta_graph(arms=(2, 2, 2), weight: float = 1.0):
    """Two hubs joined by three internally disjoint paths.

    Arm lengths count edges per path; at most one arm may have length 1 to
    keep the graph simple.  Orientation is chosen so the canonical two-cycle
    basis has rows with entries in {0, 1} on the first two arms and the
    second row equal to -1 on the shared middle arm:

        v1 = +1 on arms 1 and 2,   v2 = -1 on arm 2, +1 on arm 3,

    which makes the per-edge sine targets take the three values a, a-b, b.
    Returns ``(graph, basis)``.
    """
    arms = tuple(int(a) for a in arms)
    if len(arms) != 3 or min(arms) < 1:
        raise ValueError("three arms with at least one edge each")
    if sorted(arms)[1] < 2:
        raise ValueError("at most one arm of length 1 (graph must stay simple)")
    h1, h2 = "h1", "h2"
    vertices = [h1, h2]
    edges: list[Edge] = []
    arm_edges: list[list[int]] = []
    # arm 1 runs h1 -> h2, arms 2 and 3 run h2 -> h1
    for a, (src, dst) in enumerate(((h1, h2), (h2, h1), (h2, h1))):
        chain = [src] + [f"a{a}.{k}" for k in range(1, arms[a])] + [dst]
        vertices.extend(chain[1:-1])
        idxs = []
        for u, v in zip(chain[:-1], chain[1:]):
            idxs.append(len(edges))
            edges.append(Edge(u, v, float(weight)))
        arm_edges.append(idxs)
    g = WeightedGraph(tuple(vertices), tuple(edges))
    validate_graph(g)
    c = g.cycle_rank
    assert c == 2
    rows = np.zeros((2, g.n_edges), dtype=int)
    rows[0, arm_edges[0]] = 1
    rows[0, arm_edges[1]] = 1
    rows[1, arm_edges[1]] = -1
    rows[1, arm_edges[2]] = 1
    return g, CycleBasis(rows)


def bowtie() -> WeightedGraph:
    """Two triangles sharing a single vertex (a figure-eight shape)."""
    edges = (
        Edge(0, 1, 1.0), Edge(1, 2, 1.0), Edge(2, 0, 1.0),
        Edge(0, 3, 1.0), Edge(3, 4, 1.0), Edge(4, 0, 1.0),
    )
    return WeightedGraph((0, 1, 2, 3, 4), edges)


def diamond() -> WeightedGraph:
    """Complete graph on 4 vertices minus one edge (two triangles sharing an edge)."""
    edges = (
        Edge(0, 1, 1.0), Edge(1, 2, 1.0), Edge(2, 0, 1.0),
        Edge(1, 3, 1.0), Edge(3, 0, 1.0),
    )
    return WeightedGraph((0, 1, 2, 3), edges)


def complete_graph(n: int, weight: float = 1.0) -> WeightedGraph:
    edges = tuple(Edge(i, j, weight) for i in range(n) for j in range(i + 1, n))
    return WeightedGraph(tuple(range(n)), edges)


def house() -> WeightedGraph:
    """5-cycle with one chord; generic weights keep its states interior."""
    edges = (
        Edge(0, 1, 1.3), Edge(1, 2, 0.8), Edge(2, 3, 1.1),
        Edge(3, 4, 0.9), Edge(4, 0, 1.2), Edge(1, 4, 0.7),
    )
    return WeightedGraph((0, 1, 2, 3, 4), edges)


def wheel(n_rim: int, weight: float = 1.0) -> WeightedGraph:
    """Hub vertex connected to every vertex of an n_rim-cycle."""
    edges = [Edge(i, (i + 1) % n_rim, weight) for i in range(n_rim)]
    edges += [Edge(n_rim, i, weight) for i in range(n_rim)]
    return WeightedGraph(tuple(range(n_rim + 1)), tuple(edges))


def three_loop_chain():
    """Two triangles sharing an edge plus a third triangle glued at a hub.

    With this vertex and edge order the fundamental basis for the spanning
    tree {e2, e3, e4, e6, e7} comes out as the three rows

        (1,1,1,0,0,0,0,0), (0,0,1,1,1,0,0,0), (0,0,0,0,0,1,1,1).

    Returns ``(graph, basis)`` with that basis.
    """
    edges = (
        Edge(1, 3, 1.0),  # e1
        Edge(3, 2, 1.0),  # e2
        Edge(2, 1, 1.0),  # e3  shared by the first two cycles
        Edge(1, 4, 1.0),  # e4
        Edge(4, 2, 1.0),  # e5
        Edge(2, 5, 1.0),  # e6
        Edge(5, 6, 1.0),  # e7
        Edge(6, 2, 1.0),  # e8
    )
    g = WeightedGraph((1, 2, 3, 4, 5, 6), edges)
    rows = np.array(
        [
            [1, 1, 1, 0, 0, 0, 0, 0],
            [0, 0, 1, 1, 1, 0, 0, 0],
            [0, 0, 0, 0, 0, 1, 1, 1],
        ],
        dtype=int,
    )
    return g, CycleBasis(rows, tree=(1, 2, 3, 5, 6))


def expanded_diamond():
    """19-vertex, 20-edge subdivided diamond with unit weights.

    Reconstruction notes.  The graph is a diamond (two triangles sharing an
    edge) whose five edges were subdivided into three strands joining hubs
    1 and 9:

    * strand A, 8 edges: 1-2-3-4-5-6-7-8-9,
    * strand B, 8 edges: 9-10-11-12-13-14-15-16-1,
    * strand C, 4 edges: 1-17-18-19-9.

    Edge order and orientation are chosen so the two reference cycle rows
    below are exact kernel vectors of the incidence matrix: row 1 circulates
    strand C forward and strand B backward, row 2 strand C forward and
    strand A backward.  Smoothing collapses the graph to two hubs joined by
    three parallel strands (3 edges).

    Returns ``(graph, basis)`` with the reference basis.
    """
    raw = [
        (7, 8),    # e1   strand A (wrapped segment)
        (1, 16),   # e2   strand B closing edge (reversed)
        (1, 17),   # e3   strand C
        (1, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7),  # e4..e9 strand A
        (8, 9),    # e10  strand A
        (12, 13),  # e11  strand B (wrapped segment)
        (18, 17),  # e12  strand C (reversed)
        (9, 10), (10, 11), (11, 12),   # e13..e15 strand B
        (13, 14), (14, 15), (15, 16),  # e16..e18 strand B
        (18, 19), (19, 9),             # e19, e20 strand C
    ]
    g = WeightedGraph(tuple(range(1, 20)), tuple(Edge(t, h, 1.0) for t, h in raw))
    validate_graph(g)
    rows = np.array(
        [
            [0, -1, 1, 0, 0, 0, 0, 0, 0, 0, 1, -1, 1, 1, 1, 1, 1, 1, 1, 1],
            [-1, 0, 1, -1, -1, -1, -1, -1, -1, -1, 0, -1, 0, 0, 0, 0, 0, 0, 1, 1],
        ],
        dtype=int,
    )
    return g, CycleBasis(rows)


def q_twisted_state(n: int, q: int) -> np.ndarray:
    """The ring state whose successive angles step by 2*pi*q/n."""
    return np.mod(2.0 * np.pi * q * np.arange(n) / n, 2.0 * np.pi)


def subdivided(base: WeightedGraph, scale: int, rates=1.0):
    return subdivide(SubdivisionScheme(base, rates, scale))


# ---------------------------------------------------------------------------
# random corpora


def random_bridge_free_graph(
    rng: np.random.Generator,
    n_vertices: int,
    n_chords: int,
    weight_range=(0.5, 2.0),
    mixed_signs: bool = False,
) -> WeightedGraph:
    """Random connected bridge-free simple graph.

    A random spanning tree is decorated with random chords; chords are added
    beyond ``n_chords`` if needed until no bridge remains.  Weights are drawn
    uniformly from ``weight_range`` (sign-flipped at random when
    ``mixed_signs``), so degenerate alignments have probability zero.
    """
    n = int(n_vertices)
    if n < 3:
        raise ValueError("need at least 3 vertices")
    pairs = []
    for k in range(1, n):
        attach = int(rng.integers(0, k))
        pairs.append((attach, k))
    existing = {frozenset(p) for p in pairs}

    def add_chord():
        for _ in range(200):
            a, b = rng.integers(0, n, size=2)
            if a == b:
                continue
            key = frozenset((int(a), int(b)))
            if key in existing:
                continue
            existing.add(key)
            pairs.append((int(a), int(b)))
            return True
        return False

    for _ in range(n_chords):
        add_chord()

    def build():
        edges = []
        for i, (a, b) in enumerate(pairs):
            w = float(rng.uniform(*weight_range))
            if mixed_signs and rng.random() < 0.5:
                w = -w
            edges.append(Edge(a, b, w))
        return WeightedGraph(tuple(range(n)), tuple(edges))

    g = build()
    for _ in range(4 * n):
        if not find_bridges(g):
            break
        if not add_chord():
            break
        g = build()
    validate_graph(g)
    return g


def random_smoothable_graph(
    rng: np.random.Generator, max_vertices: int = 10
) -> WeightedGraph:
    """Random bridge-free graph padded with 2-valent vertices via subdivision.

    Produces corpora where smoothing actually removes vertices, which is what
    the face-counting identity exercises.
    """
    base_n = int(rng.integers(3, 6))
    base = random_bridge_free_graph(rng, base_n, int(rng.integers(1, 4)))
    room = max_vertices - base.n_vertices
    if room <= 0:
        return base
    rates = np.ones(base.n_edges)
    grow = rng.permutation(base.n_edges)
    for j in grow:
        extra = int(rng.integers(0, 3))
        extra = min(extra, room)
        rates[j] += extra
        room -= extra
        if room == 0:
            break
    return subdivide(SubdivisionScheme(base, tuple(rates), 1)).graph
