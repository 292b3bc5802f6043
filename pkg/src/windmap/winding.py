"""Branch-restricted sine inversion and the winding map machinery.

Given a graph with cycle basis rows v_1..v_c, branch intervals I_e on which
sine is injective, and natural frequencies summing to zero, the model context
exposes:

* ``edge_sine_values(a)``: the affine map sending cycle coordinates to the
  sine of each edge's angle difference,
* ``winding_map(a)``: per-cycle winding numbers (1/2pi) <v_i, asin-values>,
* ``winding_jacobian(a)``: its symmetric derivative,
* ``det_via_spanning_trees(a)``: the same determinant expanded as a signed
  sum over spanning-tree complements.

The admissible coordinates form a compact polytope; its facets obey the
smoothing identity checked by :func:`count_faces`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graph_model import (
    CycleBasis,
    GraphValidationError,
    WeightedGraph,
    fundamental_cycle_basis,
    incidence_matrix,
    spanning_trees,
)
from .polytope import HalfspacePolytope

TWO_PI = 2.0 * math.pi

DOMAIN_TOL = 1e-12      # clamp slack for sine values at branch range endpoints
BOUNDARY_TOL = 1e-9     # "interior of the polytope" margin
INTERIOR_GUARD = 1e-9   # derivative evaluations refuse points closer than this


class BranchDomainError(ValueError):
    """Value outside the sine range of a branch (beyond clamping tolerance)."""


class BoundaryError(ValueError):
    """Derivative requested too close to the polytope boundary."""


@dataclass(frozen=True)
class Branch:
    """Closed angle interval on which sine is injective.

    The interval must fit inside a half-period [m*pi - pi/2, m*pi + pi/2];
    ``m`` determines the inversion formula and the derivative sign
    (+1 on even half-periods, -1 on odd ones).
    """

    lo: float
    hi: float

    def __post_init__(self):
        if not (self.hi > self.lo):
            raise ValueError("branch interval must have positive width")
        if self.hi - self.lo > math.pi + 1e-12:
            raise ValueError("branch interval wider than pi cannot have injective sine")
        m = round((self.lo + self.hi) / 2.0 / math.pi)
        if self.lo < m * math.pi - math.pi / 2 - 1e-12 or self.hi > m * math.pi + math.pi / 2 + 1e-12:
            raise ValueError("sine is not injective on this interval")
        object.__setattr__(self, "_m", int(m))

    @property
    def slope_sign(self) -> int:
        return 1 if self._m % 2 == 0 else -1

    @property
    def sine_range(self) -> tuple[float, float]:
        a, b = math.sin(self.lo), math.sin(self.hi)
        return (a, b) if a <= b else (b, a)

    def arcsin(self, y: float, *, clamp_tol: float = DOMAIN_TOL) -> float:
        """The unique angle in the branch whose sine equals ``y``.

        Values beyond the sine range by at most ``clamp_tol`` are clamped to
        the nearest endpoint; anything farther raises.
        """
        lo_v, hi_v = self.sine_range
        if y < lo_v - clamp_tol or y > hi_v + clamp_tol:
            raise BranchDomainError(f"{y} outside sine range [{lo_v}, {hi_v}] of branch")
        y = min(max(y, lo_v), hi_v)
        x = self._m * math.pi + self.slope_sign * math.asin(y)
        return min(max(x, self.lo), self.hi)

    def contains_angle(self, theta: float, tol: float = 1e-9) -> bool:
        """Whether theta lies in the branch modulo full turns."""
        shifted = (theta - self.lo) % TWO_PI
        return shifted <= (self.hi - self.lo) + tol or shifted >= TWO_PI - tol


PRINCIPAL = Branch(-math.pi / 2, math.pi / 2)
REFLECTED = Branch(math.pi / 2, 3 * math.pi / 2)


def branch_arcsin(branch: Branch, y: float) -> float:
    """Module-level convenience wrapper around :meth:`Branch.arcsin`."""
    return branch.arcsin(y)


class BranchAssignment:
    """One injectivity branch per edge."""

    def __init__(self, branches: Sequence[Branch]):
        self.branches = tuple(branches)
        self.lo_vals = np.array([b.sine_range[0] for b in self.branches])
        self.hi_vals = np.array([b.sine_range[1] for b in self.branches])
        self.slope_signs = np.array([b.slope_sign for b in self.branches], dtype=float)
        self.half_period = np.array([b._m for b in self.branches], dtype=float)
        self.angle_lo = np.array([b.lo for b in self.branches])
        self.angle_hi = np.array([b.hi for b in self.branches])

    def __len__(self) -> int:
        return len(self.branches)

    def __iter__(self):
        return iter(self.branches)

    def __getitem__(self, i) -> Branch:
        return self.branches[i]

    def __eq__(self, other):
        return isinstance(other, BranchAssignment) and self.branches == other.branches

    @property
    def full_range(self) -> bool:
        return bool(np.all(self.lo_vals <= -1 + 1e-15) and np.all(self.hi_vals >= 1 - 1e-15))

    @classmethod
    def uniform(cls, n_edges: int, branch: Branch = PRINCIPAL) -> "BranchAssignment":
        return cls([branch] * n_edges)

    @classmethod
    def for_weights(cls, weights) -> "BranchAssignment":
        """Principal branch on positive edges, reflected on negative ones.

        This is the assignment that keeps every edge factor of the
        spanning-tree determinant expansion positive, which maximizes the
        volume of the winding map image (its global flip does equally well).
        """
        return cls([PRINCIPAL if w > 0 else REFLECTED for w in np.asarray(weights, float)])

    @classmethod
    def from_document(cls, doc: dict, g: WeightedGraph) -> "BranchAssignment":
        """Per-edge ``branch`` entries: "principal", "reflected", or [lo, hi]."""
        def parse(spec) -> Branch:
            if spec is None or spec == "principal":
                return PRINCIPAL
            if spec == "reflected":
                return REFLECTED
            lo, hi = spec
            return Branch(float(lo), float(hi))

        default = parse(doc.get("branch"))
        branches = [parse(e.get("branch")) if isinstance(e, dict) and "branch" in e else default
                    for e in doc.get("edges", [{}] * g.n_edges)]
        if len(branches) != g.n_edges:
            raise GraphValidationError("branch list length mismatch")
        return cls(branches)

    def arcsin_vec(self, y: np.ndarray, *, clamp_tol: float = DOMAIN_TOL) -> np.ndarray:
        lo, hi = self.lo_vals, self.hi_vals
        if np.any(y < lo - clamp_tol) or np.any(y > hi + clamp_tol):
            j = int(np.argmax(np.maximum(lo - y, y - hi)))
            raise BranchDomainError(f"edge {j}: value {y[j]} outside its branch sine range")
        yc = np.clip(y, lo, hi)
        return self.half_period * math.pi + self.slope_signs * np.arcsin(yc)

    def arcsin_span(self, y_lo: np.ndarray, y_hi: np.ndarray) -> np.ndarray:
        """Exact bound on per-edge inverted-angle increments over sine intervals.

        Branch inversion is monotone and clamping shrinks increments, so the
        arcsin span of the clipped interval bounds the increment; the slope
        sign does not affect its magnitude.
        """
        lo = np.clip(np.minimum(y_lo, y_hi), self.lo_vals, self.hi_vals)
        hi = np.clip(np.maximum(y_lo, y_hi), self.lo_vals, self.hi_vals)
        return np.arcsin(hi) - np.arcsin(lo)


class ModelContext:
    """Graph, cycle basis, branch assignment, and natural frequencies.

    Immutable after construction; all evaluations are pure, so contexts can
    be shared freely across threads.
    """

    def __init__(
        self,
        graph: WeightedGraph,
        basis: CycleBasis | None = None,
        branches: BranchAssignment | None = None,
        omega=None,
    ):
        self.graph = graph
        self.basis = basis if basis is not None else fundamental_cycle_basis(graph)
        self.branches = branches if branches is not None else BranchAssignment.uniform(graph.n_edges)
        if len(self.branches) != graph.n_edges:
            raise ValueError("one branch per edge required")

        V = np.asarray(self.basis.vectors, dtype=int)
        if V.ndim != 2 or V.shape[1] != graph.n_edges:
            raise ValueError("basis shape must be (c, n_edges)")
        if V.shape[0] != graph.cycle_rank:
            raise ValueError(
                f"basis has {V.shape[0]} rows, cycle rank is {graph.cycle_rank}"
            )
        B = incidence_matrix(graph)
        if (B @ V.T).any():
            raise ValueError("basis rows must be integer kernel vectors of the incidence matrix")
        if np.linalg.matrix_rank(V) != V.shape[0]:
            raise ValueError("basis rows are linearly dependent")

        self.cycle_vectors = V
        self.incidence = B
        self.weights = graph.weights()

        if omega is None:
            omega = np.zeros(graph.n_vertices)
        omega = np.asarray(omega, dtype=float)
        if omega.shape != (graph.n_vertices,):
            raise ValueError("omega length must equal the vertex count")
        scale = max(1.0, float(np.max(np.abs(omega))))
        if abs(float(np.sum(omega))) > 1e-12 * scale * graph.n_vertices:
            raise ValueError("omega must sum to zero for a steady state to exist")
        self.omega = omega

        # minimum-norm solution of B x = omega; any other particular solution
        # differs by a cycle vector, which the coordinates absorb
        x0, *_ = np.linalg.lstsq(B.astype(float), omega, rcond=None)
        self.omega_term = x0 / self.weights
        # constraint rows of the sine map: L_e(a) = omega_term_e + row_e . a
        self.coeff_rows = (V / self.weights).T

        self._pinv_bt: np.ndarray | None = None
        self._polytope: HalfspacePolytope | None = None

    @property
    def c(self) -> int:
        return self.cycle_vectors.shape[0]

    @property
    def pinv_incidence_t(self) -> np.ndarray:
        if self._pinv_bt is None:
            self._pinv_bt = np.linalg.pinv(self.incidence.T.astype(float))
        return self._pinv_bt

    def with_basis(self, basis: CycleBasis) -> "ModelContext":
        return ModelContext(self.graph, basis, self.branches, self.omega)

    def with_branches(self, branches: BranchAssignment) -> "ModelContext":
        return ModelContext(self.graph, self.basis, branches, self.omega)

    # -- maps -----------------------------------------------------------------

    def edge_sine_values(self, alpha) -> np.ndarray:
        alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
        return self.omega_term + self.coeff_rows @ alpha

    def polytope(self) -> HalfspacePolytope:
        if self._polytope is None:
            self._polytope = coordinate_polytope(self)
        return self._polytope

    def contains(self, alpha, tol: float = BOUNDARY_TOL) -> bool:
        return self.polytope().max_violation(alpha) <= tol

    def winding_map_batch(self, points: np.ndarray, rates=None) -> np.ndarray:
        """Winding map over rows of ``points`` with sines clamped to branch ranges."""
        y = self.omega_term + np.asarray(points, dtype=float) @ self.coeff_rows.T
        y = np.clip(y, self.branches.lo_vals, self.branches.hi_vals)
        s = self.branches.half_period * math.pi + self.branches.slope_signs * np.arcsin(y)
        if rates is not None:
            s = s * np.asarray(rates, dtype=float)
        return s @ self.cycle_vectors.T / TWO_PI

    def winding_map(self, alpha, *, check: bool = True, clamp_tol: float = BOUNDARY_TOL,
                    rates=None) -> np.ndarray:
        """Winding numbers (1/2pi) <v_i, branch-arcsin of the edge sines>.

        With ``rates`` each edge's inverted angle is scaled before pairing,
        which is the continuum limit of refining edges into paths of
        proportional lengths.
        """
        y = self.edge_sine_values(alpha)
        if check:
            viol = max(np.max(self.branches.lo_vals - y), np.max(y - self.branches.hi_vals))
            if viol > clamp_tol:
                raise BranchDomainError(
                    f"coordinates outside the admissible polytope by {viol:.3e}"
                )
        s = self.branches.arcsin_vec(y, clamp_tol=np.inf)
        if rates is not None:
            s = s * np.asarray(rates, dtype=float)
        return (self.cycle_vectors @ s) / TWO_PI

    def winding_jacobian(self, alpha, *, interior_tol: float = INTERIOR_GUARD,
                         rates=None) -> np.ndarray:
        """Symmetric derivative of the winding map.

        Diverges like 1/sqrt(distance) at the polytope boundary, so points
        with any sine value within ``interior_tol`` of a branch range
        endpoint are rejected instead of regularized.
        """
        y = self.edge_sine_values(alpha)
        slack = np.minimum(y - self.branches.lo_vals, self.branches.hi_vals - y)
        if np.min(slack) < interior_tol and interior_tol > 0:
            raise BoundaryError(
                f"edge {int(np.argmin(slack))} is within {np.min(slack):.2e} of its branch boundary"
            )
        return self._jacobian_from_sines(y, rates=rates, floor=0.0)

    def _jacobian_from_sines(self, y, *, rates=None, floor: float = 0.0) -> np.ndarray:
        root = np.sqrt(np.maximum(1.0 - np.clip(y, -1.0, 1.0) ** 2, floor))
        root = np.maximum(root, 1e-300)
        u = self.branches.slope_signs / (self.weights * root)
        if rates is not None:
            u = u * np.asarray(rates, dtype=float)
        V = self.cycle_vectors.astype(float)
        return (V * u) @ V.T / TWO_PI

    def guarded_jacobian(self, alpha, *, floor: float = 1e-12, rates=None) -> np.ndarray:
        """Jacobian with the inverse square roots floored; solver internal."""
        y = self.edge_sine_values(alpha)
        return self._jacobian_from_sines(y, rates=rates, floor=floor)


# ---------------------------------------------------------------------------
# polytope construction and face counting


def coordinate_polytope(ctx: ModelContext) -> HalfspacePolytope:
    """Half-space form of the admissible cycle coordinates.

    Each edge contributes the pair  lo_e <= L_e(a) <= hi_e.  Row directions
    are the integer cycle columns scaled by 1/weight, recorded exactly for
    deduplication.
    """
    V = ctx.cycle_vectors
    w = ctx.weights
    t = ctx.omega_term
    rows = []
    bs = []
    int_dirs = []
    scales = []
    edge_of_row = []
    for e in range(ctx.graph.n_edges):
        col = V[:, e]
        if not col.any():
            raise GraphValidationError(
                f"edge {e} is invisible to the cycle basis (bridge?); polytope undefined"
            )
        sgn = 1.0 if w[e] > 0 else -1.0
        a = col / w[e]
        lo, hi = ctx.branches.lo_vals[e], ctx.branches.hi_vals[e]
        # upper side: a . x <= hi - t ; lower side: -a . x <= t - lo
        rows.append(a)
        bs.append(hi - t[e])
        int_dirs.append(tuple(int(x) * int(sgn) for x in col))
        scales.append(1.0 / abs(w[e]))
        edge_of_row.append(e)
        rows.append(-a)
        bs.append(t[e] - lo)
        int_dirs.append(tuple(-int(x) * int(sgn) for x in col))
        scales.append(1.0 / abs(w[e]))
        edge_of_row.append(e)
    return HalfspacePolytope(
        np.array(rows), np.array(bs), int_dirs, scales, edge_of_row,
        full_range=ctx.branches.full_range,
        omega_free=not ctx.omega.any(),
    )


def count_faces(poly: HalfspacePolytope) -> int:
    """Number of facets of the admissible polytope.

    Requires the full sine range [-1, 1] on every edge and zero natural
    frequencies; under those hypotheses the count equals twice the edge count
    of the smoothed graph.
    """
    if not poly.full_range:
        raise ValueError("face counting requires sin range [-1, 1] on every edge")
    if not poly.omega_free:
        raise ValueError("face counting requires zero natural frequencies")
    if poly.is_empty():
        raise ValueError("empty polytope")
    return poly.facet_count()


# ---------------------------------------------------------------------------
# determinant via spanning trees


def det_via_spanning_trees(ctx: ModelContext, alpha, *, cap: int = 10**6,
                           interior_tol: float = INTERIOR_GUARD) -> float:
    """Winding-map Jacobian determinant as a sum over spanning trees.

    Each tree contributes the product over its co-tree edges of
    1 / (slope_sign * weight * sqrt(1 - L_e^2)); the (1/2pi)^c normalization
    matches :meth:`ModelContext.winding_jacobian`, so both routes agree to
    rounding error.
    """
    y = ctx.edge_sine_values(alpha)
    slack = np.minimum(y - ctx.branches.lo_vals, ctx.branches.hi_vals - y)
    if np.min(slack) < interior_tol:
        raise BoundaryError("tree-sum determinant needs interior coordinates")
    factors = 1.0 / (
        ctx.branches.slope_signs * ctx.weights * np.sqrt(1.0 - np.clip(y, -1, 1) ** 2)
    )
    trees = spanning_trees(ctx.graph, "enumerate", cap=cap)
    all_edges = set(range(ctx.graph.n_edges))
    total = 0.0
    for tree in trees:
        cotree = all_edges - set(tree)
        prod = 1.0
        for e in cotree:
            prod *= factors[e]
        total += prod
    return total / TWO_PI ** ctx.c
