"""Half-space polytopes over the cycle coordinates.

The admissible-coordinate region is cut out by one pair of constraints per
edge.  Facet counting is a discrete claim, so it is made noise-proof in two
layers: constraint directions are deduplicated exactly over the integers
(directions are integer cycle columns up to a positive scale), and for up to
three dimensions redundancy is settled by exact rational vertex enumeration.
Higher dimensions fall back to LP with tight tolerances.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from math import gcd

import numpy as np
from scipy.optimize import linprog

_FEAS_TOL = 1e-9


class PolytopeError(ValueError):
    pass


@dataclass(frozen=True)
class ConstraintGroup:
    """Positively proportional constraint rows collapsed to one direction."""

    direction: tuple          # canonical integer direction d
    offset: float             # tightest b in d * x <= b scaling
    rows: tuple               # original row indices in the ungrouped system
    edges: tuple              # edge indices contributing to the group


class HalfspacePolytope:
    """System A x <= b with exact integer direction bookkeeping.

    ``int_directions`` holds, for each row, an integer vector d and a float
    scale s > 0 with ``A[i] == s * d``.  All deduplication happens on d.
    """

    def __init__(self, A, b, int_directions, scales, edge_of_row, full_range: bool, omega_free: bool):
        self.A = np.asarray(A, dtype=float)
        self.b = np.asarray(b, dtype=float)
        self.int_directions = [tuple(int(x) for x in d) for d in int_directions]
        self.scales = np.asarray(scales, dtype=float)
        self.edge_of_row = tuple(edge_of_row)
        self.full_range = bool(full_range)
        self.omega_free = bool(omega_free)
        self._groups: list[ConstraintGroup] | None = None
        self._facet_flags: np.ndarray | None = None
        self._cheb: tuple | None = None
        self._vertices: list | None = None

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]

    def violations(self, x) -> np.ndarray:
        return self.A @ np.asarray(x, dtype=float) - self.b

    def max_violation(self, x) -> float:
        return float(np.max(self.violations(x)))

    def contains(self, x, tol: float = _FEAS_TOL) -> bool:
        return self.max_violation(x) <= tol

    # -- LP helpers ---------------------------------------------------------

    def chebyshev_center(self):
        """(center, radius) of the largest inscribed ball, or None if empty."""
        if self._cheb is not None:
            return self._cheb
        c = self.dim
        norms = np.linalg.norm(self.A, axis=1)
        A_ub = np.hstack([self.A, norms[:, None]])
        obj = np.zeros(c + 1)
        obj[-1] = -1.0
        res = linprog(
            obj, A_ub=A_ub, b_ub=self.b,
            bounds=[(None, None)] * c + [(0, None)], method="highs",
        )
        if not res.success:
            self._cheb = None
            return None
        self._cheb = (res.x[:c].copy(), float(res.x[c]))
        return self._cheb

    def is_empty(self, tol: float = _FEAS_TOL) -> bool:
        cheb = self.chebyshev_center()
        return cheb is None or self.max_violation(cheb[0]) > tol

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        """Componentwise (lo, hi) over the polytope via 2*dim LPs."""
        c = self.dim
        lo = np.empty(c)
        hi = np.empty(c)
        for i in range(c):
            obj = np.zeros(c)
            obj[i] = 1.0
            r1 = linprog(obj, A_ub=self.A, b_ub=self.b, bounds=[(None, None)] * c, method="highs")
            r2 = linprog(-obj, A_ub=self.A, b_ub=self.b, bounds=[(None, None)] * c, method="highs")
            if not (r1.success and r2.success):
                raise PolytopeError("polytope is empty or unbounded")
            lo[i], hi[i] = r1.fun, -r2.fun
        return lo, hi

    # -- exact dedup and facets ---------------------------------------------

    def _canonical(self, row: int) -> tuple[tuple, float]:
        d = self.int_directions[row]
        g = 0
        for x in d:
            g = gcd(g, abs(x))
        if g == 0:
            raise PolytopeError(f"zero constraint direction in row {row}")
        d = tuple(x // g for x in d)
        # offset in the canonical scaling: A[i] = s * d_orig, b scaled to d
        offset = self.b[row] / (self.scales[row] * g)
        return d, float(offset)

    def deduped(self) -> list[ConstraintGroup]:
        if self._groups is not None:
            return self._groups
        table: dict[tuple, list] = {}
        for i in range(self.n_rows):
            d, off = self._canonical(i)
            entry = table.setdefault(d, [np.inf, [], []])
            entry[0] = min(entry[0], off)
            entry[1].append(i)
            entry[2].append(self.edge_of_row[i])
        groups = [
            ConstraintGroup(d, off, tuple(rows), tuple(edges))
            for d, (off, rows, edges) in table.items()
        ]
        groups.sort(key=lambda gr: gr.direction)
        self._groups = groups
        return groups

    def facet_flags(self) -> np.ndarray:
        """Nonredundancy flag per deduplicated constraint group."""
        if self._facet_flags is not None:
            return self._facet_flags
        groups = self.deduped()
        if self.dim <= 3:
            flags = self._facets_exact(groups)
        else:
            flags = self._facets_lp(groups)
        self._facet_flags = flags
        return flags

    def facet_count(self) -> int:
        return int(np.sum(self.facet_flags()))

    def _facets_exact(self, groups) -> np.ndarray:
        """Exact rational facet decision via vertex enumeration (dim <= 3).

        A group is a facet iff its active vertex set has affine dimension
        dim-1.  Binary floats convert to Fractions exactly, so this certifies
        the polytope exactly as represented.
        """
        c = self.dim
        D = [[Fraction(x) for x in gr.direction] for gr in groups]
        off = [Fraction(gr.offset) for gr in groups]
        m = len(groups)
        vertices: list[tuple] = []
        vertex_active: list[set] = []
        for subset in combinations(range(m), c):
            sol = _solve_fraction([[D[i][j] for j in range(c)] for i in subset],
                                  [off[i] for i in subset])
            if sol is None:
                continue
            feasible = True
            active = set()
            for i in range(m):
                val = sum(D[i][j] * sol[j] for j in range(c))
                if val > off[i]:
                    feasible = False
                    break
                if val == off[i]:
                    active.add(i)
            if not feasible:
                continue
            key = tuple(sol)
            if key in (v for v in vertices):
                idx = vertices.index(key)
                vertex_active[idx] |= active
            else:
                vertices.append(key)
                vertex_active.append(active)
        flags = np.zeros(m, dtype=bool)
        for i in range(m):
            pts = [vertices[k] for k in range(len(vertices)) if i in vertex_active[k]]
            if not pts:
                continue
            if c == 1:
                flags[i] = True
                continue
            base = pts[0]
            diffs = [[p[j] - base[j] for j in range(c)] for p in pts[1:]]
            flags[i] = _fraction_rank(diffs) >= c - 1
        return flags

    def _facets_lp(self, groups) -> np.ndarray:
        """LP redundancy test: maximize each direction subject to the others.

        A constraint is a facet iff the optimum with the constraint relaxed by
        one unit strictly exceeds its offset.
        """
        m = len(groups)
        c = self.dim
        D = np.array([gr.direction for gr in groups], dtype=float)
        off = np.array([gr.offset for gr in groups], dtype=float)
        flags = np.zeros(m, dtype=bool)
        for i in range(m):
            b_rel = off.copy()
            b_rel[i] += 1.0
            res = linprog(-D[i], A_ub=D, b_ub=b_rel, bounds=[(None, None)] * c, method="highs")
            if not res.success:
                raise PolytopeError("facet LP failed")
            flags[i] = (-res.fun) > off[i] + _FEAS_TOL
        return flags

    # -- geometry for dim <= 2 ----------------------------------------------

    def vertices_exact(self) -> list[np.ndarray]:
        """All vertices (dim <= 3), computed exactly and returned as floats."""
        if self.dim > 3:
            raise PolytopeError("exact vertex enumeration limited to dim <= 3")
        if self._vertices is not None:
            return [v.copy() for v in self._vertices]
        groups = self.deduped()
        c = self.dim
        D = [[Fraction(x) for x in gr.direction] for gr in groups]
        off = [Fraction(gr.offset) for gr in groups]
        m = len(groups)
        seen: dict[tuple, None] = {}
        for subset in combinations(range(m), c):
            sol = _solve_fraction([[D[i][j] for j in range(c)] for i in subset],
                                  [off[i] for i in subset])
            if sol is None:
                continue
            if all(sum(D[i][j] * sol[j] for j in range(c)) <= off[i] for i in range(m)):
                seen.setdefault(tuple(sol))
        self._vertices = [np.array([float(x) for x in v]) for v in seen]
        return [v.copy() for v in self._vertices]

    def polygon(self) -> list[tuple[np.ndarray, np.ndarray, tuple]]:
        """CCW boundary of a 2-d polytope.

        Returns segments ``(p, q, active_edges)`` where ``active_edges`` are
        the edge indices whose constraint is active along the segment.
        """
        if self.dim != 2:
            raise PolytopeError("polygon() requires a 2-d polytope")
        verts = self.vertices_exact()
        if len(verts) < 3:
            raise PolytopeError("degenerate polytope (fewer than 3 vertices)")
        centroid = np.mean(verts, axis=0)
        order = sorted(
            range(len(verts)),
            key=lambda i: np.arctan2(*(verts[i] - centroid)[::-1]),
        )
        verts = [verts[i] for i in order]
        groups = self.deduped()
        D = np.array([gr.direction for gr in groups], dtype=float)
        off = np.array([gr.offset for gr in groups], dtype=float)
        segments = []
        for i in range(len(verts)):
            p, q = verts[i], verts[(i + 1) % len(verts)]
            mid = 0.5 * (p + q)
            scale = np.linalg.norm(D, axis=1) * max(1.0, np.linalg.norm(mid))
            active = np.abs(D @ mid - off) <= 1e-9 * np.maximum(scale, 1.0)
            edges: list[int] = []
            for gi in np.nonzero(active)[0]:
                edges.extend(groups[gi].edges)
            segments.append((p, q, tuple(sorted(set(edges)))))
        return segments


def _solve_fraction(A, b):
    """Solve a small square Fraction system; None if singular."""
    n = len(A)
    M = [row[:] + [b[i]] for i, row in enumerate(A)]
    for col in range(n):
        piv = None
        for r in range(col, n):
            if M[r][col] != 0:
                piv = r
                break
        if piv is None:
            return None
        M[col], M[piv] = M[piv], M[col]
        inv = M[col][col]
        M[col] = [x / inv for x in M[col]]
        for r in range(n):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[col])]
    return [M[i][n] for i in range(n)]


def _fraction_rank(rows) -> int:
    if not rows:
        return 0
    M = [row[:] for row in rows]
    n_cols = len(M[0])
    rank = 0
    for col in range(n_cols):
        piv = None
        for r in range(rank, len(M)):
            if M[r][col] != 0:
                piv = r
                break
        if piv is None:
            continue
        M[rank], M[piv] = M[piv], M[rank]
        inv = M[rank][col]
        M[rank] = [x / inv for x in M[rank]]
        for r in range(len(M)):
            if r != rank and M[r][col] != 0:
                f = M[r][col]
                M[r] = [x - f * y for x, y in zip(M[r], M[rank])]
        rank += 1
    return rank
