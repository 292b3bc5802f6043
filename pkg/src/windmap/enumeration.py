"""Steady-state enumeration through lattice points of the winding map image.

Every steady state whose edge angle differences respect the chosen branches
corresponds to exactly one integer point of the winding map image.  The
enumeration walks a conservative integer box, solves the winding equation for
each candidate, reconstructs the angle vector for each solution, and records
an exclusion certificate or an explicit failure for every candidate without
a solution.  Nothing is silently dropped.
"""
from __future__ import annotations

import itertools
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from ._intlinalg import solve_integer
from .angles import gauge_fix, wrap_to_2pi, wrap_to_pi
from .graph_model import WeightedGraph
from .stability import fixed_point_residual
from .winding import BOUNDARY_TOL, BranchAssignment, ModelContext, TWO_PI

SOLVER_TOL = 1e-10
RESIDUAL_TOL = 1e-9
DEFAULT_CYCLE_CAP = 6
DEFAULT_CANDIDATE_CAP = 10**7


class EnumerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class SteadyState:
    """One steady state with its winding data.

    ``theta`` is gauge-fixed (first vertex at 0, entries in [0, 2pi)),
    ``alpha`` the cycle coordinates, ``winding`` the integer lattice point,
    ``lift`` the integer edge vector relating the angle differences to the
    branch representatives, ``boundary`` whether any edge sits at a branch
    range endpoint within tolerance.
    """

    theta: np.ndarray
    alpha: np.ndarray
    winding: tuple
    lift: np.ndarray
    boundary: bool
    residual: float


@dataclass(frozen=True)
class SolverFailure:
    winding: tuple
    message: str


@dataclass
class EnumerationReport:
    states: list
    candidates_tested: int
    solver_failures: list
    winding_box: tuple
    timing: float

    def state_by_winding(self, k) -> SteadyState | None:
        k = tuple(int(x) for x in k)
        for s in self.states:
            if s.winding == k:
                return s
        return None


def winding_bounds(ctx: ModelContext) -> tuple[np.ndarray, np.ndarray]:
    """Integer box guaranteed to contain every winding lattice point.

    Componentwise, each edge contributes the extremes of its cycle entry
    times its branch interval; the sum over edges bounds the winding map on
    the whole admissible set.
    """
    V = ctx.cycle_vectors
    lo_angles = ctx.branches.angle_lo
    hi_angles = ctx.branches.angle_hi
    lo = np.zeros(ctx.c)
    hi = np.zeros(ctx.c)
    for i in range(ctx.c):
        a = V[i] * lo_angles
        b = V[i] * hi_angles
        lo[i] = np.sum(np.minimum(a, b)) / TWO_PI
        hi[i] = np.sum(np.maximum(a, b)) / TWO_PI
    k_lo = np.ceil(lo - 1e-9).astype(int)
    k_hi = np.floor(hi + 1e-9).astype(int)
    return k_lo, k_hi


# ---------------------------------------------------------------------------
# solving W(alpha) = k


@dataclass
class SolveOutcome:
    alpha: np.ndarray | None
    status: str            # "found" | "excluded" | "failed"
    detail: str = ""


def _newton(ctx: ModelContext, k: np.ndarray, x0: np.ndarray, *, tol: float,
            max_iter: int = 80) -> np.ndarray | None:
    poly = ctx.polytope()
    x = np.array(x0, dtype=float)
    if poly.max_violation(x) > BOUNDARY_TOL:
        return None
    f = ctx.winding_map(x, check=False) - k
    fn = np.linalg.norm(f, np.inf)
    for _ in range(max_iter):
        if fn <= tol:
            return x
        J = ctx.guarded_jacobian(x)
        try:
            step = np.linalg.solve(J, -f)
        except np.linalg.LinAlgError:
            step, *_ = np.linalg.lstsq(J, -f, rcond=None)
        if not np.all(np.isfinite(step)):
            return None
        # largest feasible step; landing exactly on the boundary is allowed
        viol = poly.A @ step
        slack = poly.b - poly.A @ x
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.where(viol > 1e-300, slack / viol, np.inf)
        t_max = float(min(1.0, np.min(ratios)))
        if t_max <= 0:
            t_max = 0.0
        t = t_max
        improved = False
        for _ in range(40):
            x_new = x + t * step
            f_new = ctx.winding_map(x_new, check=False) - k
            fn_new = np.linalg.norm(f_new, np.inf)
            if fn_new < fn:
                x, f, fn = x_new, f_new, fn_new
                improved = True
                break
            t *= 0.5
            if t < 1e-14:
                break
        if not improved:
            return x if fn <= tol else None
    return x if fn <= tol else None


def _halton(index: int, base: int) -> float:
    f, r = 1.0, 0.0
    while index > 0:
        f /= base
        r += f * (index % base)
        index //= base
    return r


def _halton_starts(ctx: ModelContext, n: int) -> list[np.ndarray]:
    poly = ctx.polytope()
    try:
        lo, hi = poly.bounding_box()
    except Exception:
        return []
    primes = [2, 3, 5, 7, 11, 13]
    pts = []
    i = 1
    while len(pts) < n and i <= 40 * n:
        u = np.array([_halton(i, primes[d % len(primes)]) for d in range(ctx.c)])
        x = lo + u * (hi - lo)
        if poly.max_violation(x) <= 0:
            pts.append(x)
        i += 1
    return pts


def _continuation(ctx: ModelContext, k: np.ndarray, x0: np.ndarray, *, tol: float) -> np.ndarray | None:
    """Path-follow from an interior winding value toward k.

    Handles lattice points on the image boundary, where the Jacobian blows up
    and plain iterations from far away stall.
    """
    x = np.array(x0, dtype=float)
    w0 = ctx.winding_map(x, check=False)
    t, dt = 0.0, 0.25
    while t < 1.0:
        t_next = min(1.0, t + dt)
        target = w0 + t_next * (k - w0)
        x_new = _newton(ctx, target, x, tol=max(tol, 1e-12))
        if x_new is None:
            dt *= 0.5
            if dt < 1e-6:
                return None
            continue
        x, t = x_new, t_next
        dt = min(2 * dt, 0.25)
    f = ctx.winding_map(x, check=False) - k
    return x if np.linalg.norm(f, np.inf) <= tol else None


class ExclusionGrid:
    """Adaptive cell certificates that a lattice point has no preimage.

    Cells carry an exact per-cell modulus of continuity for the winding map:
    the arcsin increment over a sine increment d is at most arccos(1 - d),
    so each cell center's value plus the accumulated bound brackets the map
    over the cell.  A candidate is excluded when every cell either misses the
    admissible set or certifiably cannot reach it.  Undecided cell centers
    double as extra solver starts.
    """

    def __init__(self, ctx: ModelContext, *, max_cells: int = 200_000, max_depth: int = 14):
        self.ctx = ctx
        self.max_cells = max_cells
        self.max_depth = max_depth
        poly = ctx.polytope()
        lo, hi = poly.bounding_box()
        pad = 1e-12 + 1e-9 * np.maximum(1.0, np.abs(hi - lo))
        self.lo = lo - pad
        self.hi = hi + pad

    def _cell_data(self, centers: np.ndarray, half: np.ndarray):
        # centers, half: (n_cells, c)
        ctx = self.ctx
        poly = ctx.polytope()
        A, b = poly.A, poly.b
        # outside test: the whole cell violates some constraint
        viol = centers @ A.T - b          # (n_cells, rows)
        spread = half @ np.abs(A).T       # (n_cells, rows)
        outside = np.any(viol - spread > 0, axis=1)
        # winding values (sines clamped into branch ranges keeps the bound valid)
        W = ctx.winding_map_batch(centers)
        # per-cell bound radius from exact arcsin spans over the sine intervals
        y0 = ctx.omega_term + centers @ ctx.coeff_rows.T        # (n_cells, E)
        dL = half @ np.abs(ctx.coeff_rows).T
        span = ctx.branches.arcsin_span(y0 - dL, y0 + dL)
        radius = span @ np.abs(ctx.cycle_vectors).T / TWO_PI    # (n_cells, c)
        return outside, W, radius

    def adjudicate(self, k: np.ndarray, *, newton_tol: float,
                   start_budget: int = 48) -> SolveOutcome:
        ctx = self.ctx
        c = ctx.c
        n0 = max(2, int(round(self.max_cells ** (1.0 / max(c, 1)) / 8)))
        n0 = min(n0, 8)
        grids = [np.linspace(self.lo[d], self.hi[d], n0 + 1) for d in range(c)]
        centers = np.array(
            list(itertools.product(*[(g[:-1] + g[1:]) / 2 for g in grids]))
        )
        half = np.array(
            list(itertools.product(*[np.diff(g) / 2 for g in grids]))
        )
        starts_used = 0
        for depth in range(self.max_depth):
            outside, W, radius = self._cell_data(centers, half)
            resid = np.abs(W - k)
            excluded = np.any(resid > radius + newton_tol, axis=1)
            undecided = ~(outside | excluded)
            if not np.any(undecided):
                return SolveOutcome(None, "excluded", f"certified at depth {depth}")
            idx = np.nonzero(undecided)[0]
            # most promising cells first
            order = idx[np.argsort(resid[idx].max(axis=1))]
            for j in order[: max(1, start_budget // (depth + 1))]:
                if starts_used >= start_budget:
                    break
                starts_used += 1
                x = _newton(ctx, k, _project_into(ctx, centers[j]), tol=newton_tol)
                if x is not None:
                    return SolveOutcome(x, "found", "from exclusion-grid start")
            if len(idx) * (2**c) > self.max_cells:
                return SolveOutcome(None, "failed", f"{len(idx)} cells undecided at depth {depth}")
            # split undecided cells
            shifts = np.array(list(itertools.product((-0.5, 0.5), repeat=c)))
            centers = (centers[idx][:, None, :] + shifts[None, :, :] * half[idx][:, None, :]).reshape(-1, c)
            half = np.repeat(half[idx] * 0.5, 2**c, axis=0)
        return SolveOutcome(None, "failed", "exclusion depth exhausted")


def _solve_1d(ctx: ModelContext, k: float, *, tol: float) -> SolveOutcome:
    """Complete one-cycle solver: bracketing plus exact-span exclusion.

    The scalar winding map is continuous on the closed admissible interval,
    so sign changes of W - k are found on a grid and polished; absence is
    certified by covering the interval with subintervals whose exact value
    spans avoid k.
    """
    from scipy.optimize import brentq

    poly = ctx.polytope()
    (lo,), (hi,) = poly.bounding_box()
    if hi < lo:
        return SolveOutcome(None, "excluded", "empty admissible interval")

    def wfun(a):
        return float(ctx.winding_map(np.array([a]), check=False)[0]) - k

    grid = np.linspace(lo, hi, 4097)
    vals = np.array([wfun(a) for a in grid])
    for i in np.nonzero(np.abs(vals) <= tol)[0]:
        return SolveOutcome(np.array([grid[i]]), "found")
    cross = np.nonzero(vals[:-1] * vals[1:] < 0)[0]
    if cross.size:
        i = int(cross[0])
        root = brentq(wfun, grid[i], grid[i + 1], xtol=1e-16, rtol=8.9e-16)
        if abs(wfun(root)) <= tol:
            return SolveOutcome(np.array([root]), "found")
    # exclusion: exact winding variation over each grid interval
    y_a = ctx.omega_term + np.outer(grid[:-1], ctx.coeff_rows[:, 0])
    y_b = ctx.omega_term + np.outer(grid[1:], ctx.coeff_rows[:, 0])
    span = ctx.branches.arcsin_span(np.minimum(y_a, y_b), np.maximum(y_a, y_b))
    radius = span @ np.abs(ctx.cycle_vectors[0]) / TWO_PI
    clear = np.minimum(np.abs(vals[:-1]), np.abs(vals[1:])) > radius + tol
    if np.all(clear):
        return SolveOutcome(None, "excluded", "interval sweep certified absence")
    return SolveOutcome(None, "failed", "1-d sweep could not separate the value")


def _curve_certificate(ctx: ModelContext, k: np.ndarray, *, tol: float,
                       max_splits: int = 60_000) -> str:
    """Decide membership of k in the two-cycle image by its boundary curve.

    The image boundary is the image of the polytope boundary.  Each facet
    segment is subdivided until the exact arcsin-span tube around the sampled
    curve avoids k; then the winding number of the polyline around k equals
    that of the true curve, settling inside versus outside rigorously.
    Returns "inside", "outside", or "unknown".
    """
    poly = ctx.polytope()
    try:
        segments = poly.polygon()
    except Exception:
        return "unknown"
    absV = np.abs(ctx.cycle_vectors)
    polyline: list[np.ndarray] = []
    splits = 0
    for p, q, _active in segments:
        stack = [(0.0, 1.0)]
        pieces: list[tuple[float, np.ndarray]] = []
        while stack:
            a, b = stack.pop()
            xa = p + a * (q - p)
            xb = p + b * (q - p)
            wa = ctx.winding_map(xa, check=False)
            ya = ctx.edge_sine_values(xa)
            yb = ctx.edge_sine_values(xb)
            span = ctx.branches.arcsin_span(np.minimum(ya, yb), np.maximum(ya, yb))
            radius = float(np.max(absV @ span)) / TWO_PI
            if np.linalg.norm(wa - k, np.inf) > radius + tol:
                pieces.append((a, wa))
                continue
            splits += 1
            if splits > max_splits or (b - a) < 1e-12:
                return "unknown"
            mid = 0.5 * (a + b)
            stack.append((mid, b))
            stack.append((a, mid))
        pieces.sort(key=lambda t: t[0])
        polyline.extend(w for _, w in pieces)
    if len(polyline) < 3:
        return "unknown"
    pts = np.array(polyline)
    rel = pts - k
    angles = np.arctan2(rel[:, 1], rel[:, 0])
    turns = np.diff(np.concatenate([angles, angles[:1]]))
    turns = (turns + np.pi) % (2 * np.pi) - np.pi
    winding_number = float(np.sum(turns)) / TWO_PI
    return "inside" if abs(winding_number) > 0.5 else "outside"


def _boundary_search(ctx: ModelContext, k: np.ndarray, *, tol: float) -> np.ndarray | None:
    """Look for lattice points on the image of the polytope boundary.

    The winding Jacobian diverges there, so interior iterations stall; the
    map itself extends continuously to the closed polytope.  Polytope
    vertices are checked directly and, in two dimensions, each facet segment
    is scanned for componentwise roots of the restricted map.
    """
    from scipy.optimize import brentq

    if ctx.c > 3:
        return None
    poly = ctx.polytope()
    try:
        vertices = poly.vertices_exact()
    except Exception:
        return None
    for v in vertices:
        if np.linalg.norm(ctx.winding_map(v, check=False) - k, np.inf) <= tol:
            return v
    if ctx.c != 2:
        return None
    for p, q, _active in poly.polygon():
        tau = q - p

        def comp(t, i):
            return float(ctx.winding_map(p + t * tau, check=False)[i] - k[i])

        for i in range(2):
            grid = np.linspace(0.0, 1.0, 65)
            vals = np.array([comp(t, i) for t in grid])
            for a, b, fa, fb in zip(grid[:-1], grid[1:], vals[:-1], vals[1:]):
                if fa == 0.0:
                    root = a
                elif fa * fb < 0:
                    root = brentq(comp, a, b, args=(i,), xtol=1e-15)
                else:
                    continue
                x = p + root * tau
                if np.linalg.norm(ctx.winding_map(x, check=False) - k, np.inf) <= tol:
                    return x
    return None


def _project_into(ctx: ModelContext, x: np.ndarray) -> np.ndarray:
    """Nudge a point into the admissible set if it is barely outside."""
    poly = ctx.polytope()
    if poly.max_violation(x) <= 0:
        return x
    cheb = poly.chebyshev_center()
    if cheb is None:
        return x
    center = cheb[0]
    lo_t, hi_t = 0.0, 1.0
    for _ in range(60):
        mid = 0.5 * (lo_t + hi_t)
        if poly.max_violation(center + mid * (x - center)) <= 0:
            lo_t = mid
        else:
            hi_t = mid
    return center + lo_t * (x - center)


def solve_winding(ctx: ModelContext, k, *, tol: float = SOLVER_TOL,
                  exclusion: ExclusionGrid | None = None) -> SolveOutcome:
    """Find the unique admissible coordinates with winding ``k``, or certify absence.

    Strategy: damped interior Newton from the Chebyshev center, deterministic
    low-discrepancy restarts, continuation for boundary targets, then an
    adaptive exclusion sweep whose undecided cells feed final restarts.
    """
    k = np.asarray(k, dtype=float)
    poly = ctx.polytope()
    cheb = poly.chebyshev_center()
    if cheb is None or poly.max_violation(cheb[0]) > BOUNDARY_TOL:
        return SolveOutcome(None, "excluded", "empty admissible set")
    x0 = cheb[0]

    if ctx.c == 1:
        return _solve_1d(ctx, float(k[0]), tol=tol)

    x = _newton(ctx, k, x0, tol=tol)
    if x is None:
        x = _boundary_search(ctx, k, tol=tol)
    if x is None:
        for start in _halton_starts(ctx, 16):
            x = _newton(ctx, k, start, tol=tol)
            if x is not None:
                break
    if x is None:
        x = _continuation(ctx, k, x0, tol=tol)
    if x is not None:
        return SolveOutcome(x, "found")

    if ctx.c == 2:
        verdict = _curve_certificate(ctx, k, tol=tol)
        if verdict == "outside":
            return SolveOutcome(None, "excluded", "boundary-curve certificate")
        if verdict == "inside":
            for start in _halton_starts(ctx, 64):
                x = _newton(ctx, k, start, tol=tol)
                if x is not None:
                    return SolveOutcome(x, "found")

    grid = exclusion if exclusion is not None else ExclusionGrid(ctx)
    return grid.adjudicate(k, newton_tol=tol)


# ---------------------------------------------------------------------------
# reconstruction


def _integer_lift(ctx: ModelContext, k: np.ndarray) -> np.ndarray:
    """Integer edge vector K with <v_i, K> = k_i.

    For a fundamental basis, K is supported on the co-tree: entry k_i times
    the basis row's own sign on its co-tree edge.  Any other valid lift
    differs by an integer flow, which shifts the angles by full turns only.
    """
    V = ctx.cycle_vectors
    k_int = np.array([int(round(x)) for x in np.atleast_1d(k)])
    tree = ctx.basis.tree
    if tree is not None:
        cotree = [e for e in range(ctx.graph.n_edges) if e not in set(tree)]
        K = np.zeros(ctx.graph.n_edges, dtype=int)
        for i, f in enumerate(cotree):
            K[f] = k_int[i] * int(V[i, f])
        if np.array_equal(V @ K, k_int):
            return K
    K = solve_integer(V, k_int)
    if K is None:
        raise EnumerationError("no integer lift exists; basis does not span the lattice")
    return K


def reconstruct_state(ctx: ModelContext, alpha, k, *, residual_tol: float = RESIDUAL_TOL,
                      boundary_tol: float = BOUNDARY_TOL) -> SteadyState:
    """Assemble the gauge-fixed angle vector for a solved lattice point.

    The angle differences are the branch representatives minus full turns
    prescribed by an integer lift; the vertex angles solve that edge system
    in least squares (exact up to the all-ones kernel) and are then reduced
    modulo 2pi with the first vertex pinned to zero.
    """
    alpha = np.atleast_1d(np.asarray(alpha, dtype=float))
    k = np.atleast_1d(np.asarray(k, dtype=float))
    w = ctx.winding_map(alpha, check=True, clamp_tol=10 * boundary_tol)
    if np.max(np.abs(w - k)) > 1e-8:
        raise EnumerationError(f"coordinates do not produce winding {k}: got {w}")

    y = ctx.edge_sine_values(alpha)
    s = ctx.branches.arcsin_vec(y, clamp_tol=10 * boundary_tol)
    K = _integer_lift(ctx, k)
    target = s - TWO_PI * K
    theta = ctx.pinv_incidence_t @ target
    theta = gauge_fix(theta)

    # consistency: the realized differences match the target modulo full turns
    diff = wrap_to_pi(ctx.incidence.T @ theta - target)
    if np.max(np.abs(diff)) > 1e-7:
        raise EnumerationError("angle reconstruction failed the lift consistency check")

    residual = fixed_point_residual(ctx.graph, theta, ctx.omega)
    if residual > residual_tol:
        raise EnumerationError(f"reconstructed state residual {residual:.2e} above tolerance")

    slack = np.minimum(y - ctx.branches.lo_vals, ctx.branches.hi_vals - y)
    boundary = bool(np.min(slack) <= boundary_tol)
    return SteadyState(
        theta=theta,
        alpha=alpha.copy(),
        winding=tuple(int(round(x)) for x in k),
        lift=K,
        boundary=boundary,
        residual=residual,
    )


# ---------------------------------------------------------------------------
# full enumeration


def enumerate_states(
    ctx: ModelContext,
    *,
    cycle_cap: int = DEFAULT_CYCLE_CAP,
    candidate_cap: int = DEFAULT_CANDIDATE_CAP,
    solver_tol: float = SOLVER_TOL,
    threads: int = 1,
) -> EnumerationReport:
    """Enumerate all steady states compatible with the context's branches.

    Deterministic: candidates are visited in lexicographic order and results
    reported sorted by winding vector regardless of thread count.
    """
    t0 = time.perf_counter()
    if ctx.c > cycle_cap:
        raise EnumerationError(f"cycle rank {ctx.c} exceeds cap {cycle_cap}")
    k_lo, k_hi = winding_bounds(ctx)
    n_candidates = int(np.prod((k_hi - k_lo + 1).astype(float)))
    if n_candidates > candidate_cap:
        raise EnumerationError(f"{n_candidates} winding candidates exceed cap {candidate_cap}")

    candidates = list(itertools.product(*[range(k_lo[i], k_hi[i] + 1) for i in range(ctx.c)]))
    grid = ExclusionGrid(ctx)

    def attempt(k):
        return k, solve_winding(ctx, np.array(k, dtype=float), tol=solver_tol, exclusion=grid)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(attempt, candidates))
    else:
        outcomes = [attempt(k) for k in candidates]

    states: list[SteadyState] = []
    failures: list[SolverFailure] = []
    for k, outcome in outcomes:
        if outcome.status == "found":
            states.append(reconstruct_state(ctx, outcome.alpha, np.array(k, dtype=float)))
        elif outcome.status == "failed":
            failures.append(SolverFailure(tuple(k), outcome.detail))

    states.sort(key=lambda s: s.winding)
    return EnumerationReport(
        states=states,
        candidates_tested=len(candidates),
        solver_failures=failures,
        winding_box=(tuple(int(x) for x in k_lo), tuple(int(x) for x in k_hi)),
        timing=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------------------
# independent brute-force oracle


@dataclass(frozen=True)
class OracleState:
    theta: np.ndarray
    winding: tuple


def winding_of_theta(ctx: ModelContext, theta) -> tuple:
    """Winding vector of an angle vector, read off its branch representatives."""
    bt = ctx.incidence.T @ np.asarray(theta, dtype=float)
    y = np.clip(np.sin(bt), ctx.branches.lo_vals, ctx.branches.hi_vals)
    s = ctx.branches.arcsin_vec(y, clamp_tol=np.inf)
    k = (ctx.cycle_vectors @ s) / TWO_PI
    k_round = np.round(k)
    if np.max(np.abs(k - k_round)) > 1e-6:
        raise EnumerationError(f"winding of state is not integral: {k}")
    return tuple(int(x) for x in k_round)


def _branch_membership(ctx: ModelContext, theta, tol: float = 1e-7) -> bool:
    bt = ctx.incidence.T @ np.asarray(theta, dtype=float)
    lo, hi = ctx.branches.lo_vals, ctx.branches.hi_vals
    y = np.sin(bt)
    if np.any(y < lo - 1e-9) or np.any(y > hi + 1e-9):
        return False
    # membership means matching the branch representative modulo full turns
    s = ctx.branches.arcsin_vec(np.clip(y, lo, hi), clamp_tol=np.inf)
    return bool(np.max(np.abs(wrap_to_pi(bt - s))) <= tol)


def _dedupe_thetas(thetas: list[np.ndarray], tol: float = 1e-6) -> list[np.ndarray]:
    kept: list[np.ndarray] = []
    for th in thetas:
        is_new = True
        for ref in kept:
            if np.max(np.abs(wrap_to_pi(th - ref))) <= tol:
                is_new = False
                break
        if is_new:
            kept.append(th)
    return kept


def _is_uniform_ring(g: WeightedGraph) -> list[tuple[int, int]] | None:
    """Traversal [(edge, direction)] if the graph is a single cycle, else None."""
    if g.n_edges != g.n_vertices or np.any(g.degrees() != 2):
        return None
    adj = g.adjacency_lists()
    walk = []
    u, prev_edge = 0, -1
    for _ in range(g.n_edges):
        nxt = [(e, w) for e, w in adj[u] if e != prev_edge]
        if not nxt:
            return None
        e, w = nxt[0]
        direction = 1 if g.vertex_index(g.edges[e].tail) == u else -1
        walk.append((e, direction))
        u, prev_edge = w, e
    return walk if u == 0 else None


def _ring_oracle(ctx: ModelContext) -> list[np.ndarray]:
    """All ring steady states by flow conservation, independent of winding maps.

    Around a single cycle the edge flow weight*sin(angle step) is a constant
    phi; each edge step is either asin(phi/w) or pi - asin(phi/w), and the
    steps must close up to a full-turn multiple.  Scanning every choice
    pattern and every turn count with 1-d root isolation yields every state.
    """
    from scipy.optimize import brentq

    g = ctx.graph
    if ctx.omega.any():
        raise EnumerationError("ring oracle requires zero natural frequencies")
    walk = _is_uniform_ring(g)
    if walk is None:
        raise EnumerationError("not a ring")
    n = g.n_edges
    w = np.array([g.edges[e].weight for e, _ in walk])
    phi_max = float(np.min(np.abs(w)))
    thetas: list[np.ndarray] = []

    def state_from_steps(steps: np.ndarray) -> np.ndarray:
        theta = np.zeros(g.n_vertices)
        u = 0
        angle = 0.0
        for (e, direction), step in zip(walk, steps):
            angle += step
            edge = g.edges[e]
            u = g.vertex_index(edge.head) if direction == 1 else g.vertex_index(edge.tail)
            theta[u] = angle
        return gauge_fix(theta)

    for pattern in itertools.product((0, 1), repeat=n):
        flip = np.array(pattern, dtype=bool)

        def total(phi):
            base = np.arcsin(np.clip(phi / w, -1.0, 1.0))
            steps = np.where(flip, math.pi - base, base)
            return float(np.sum(steps))

        grid = np.linspace(-phi_max, phi_max, 257)
        vals = np.array([total(p) for p in grid])
        lo_q = math.floor(float(np.min(vals)) / TWO_PI) - 1
        hi_q = math.ceil(float(np.max(vals)) / TWO_PI) + 1
        for q in range(lo_q, hi_q + 1):
            target = TWO_PI * q
            roots = []
            h = vals - target
            for i in range(len(grid) - 1):
                if h[i] == 0.0:
                    roots.append(grid[i])
                elif h[i] * h[i + 1] < 0:
                    roots.append(brentq(lambda p: total(p) - target, grid[i], grid[i + 1],
                                        xtol=1e-14))
            if h[-1] == 0.0:
                roots.append(grid[-1])
            for endpoint in (-phi_max, phi_max):
                if abs(total(endpoint) - target) <= 1e-9:
                    roots.append(endpoint)
            for phi in roots:
                base = np.arcsin(np.clip(phi / w, -1.0, 1.0))
                steps = np.where(flip, math.pi - base, base)
                thetas.append(state_from_steps(steps))
    return thetas


def _grid_oracle(ctx: ModelContext, grid_density: int) -> list[np.ndarray]:
    """Dense-grid seek of all steady states: batched residual Newton in angle space."""
    g = ctx.graph
    n = g.n_vertices
    if n > 7:
        raise EnumerationError("grid oracle limited to 7 vertices")
    B = ctx.incidence.astype(float)
    wts = ctx.weights
    omega = ctx.omega

    axes = [np.linspace(0.0, TWO_PI, grid_density, endpoint=False)] * (n - 1)
    starts = np.array(list(itertools.product(*axes)))
    theta = np.hstack([np.zeros((len(starts), 1)), starts])

    def residual(th):
        return omega - (np.sin(th @ B) * wts) @ B.T

    for _ in range(40):
        F = residual(theta)[:, 1:]
        cos_terms = wts * np.cos(theta @ B)
        J = -np.einsum("ve,be,we->bvw", B[1:], cos_terms, B[1:])
        J_reg = J + 1e-12 * np.eye(n - 1)
        try:
            step = np.linalg.solve(J_reg, -F[..., None])[..., 0]
        except np.linalg.LinAlgError:
            step = np.stack([np.linalg.lstsq(J_reg[i], -F[i], rcond=None)[0]
                             for i in range(len(theta))])
        step = np.clip(step, -1.0, 1.0)
        theta[:, 1:] += step
    res = np.max(np.abs(residual(theta)), axis=1)
    good = theta[res <= 1e-10]
    return [gauge_fix(th) for th in good]


def brute_force_oracle(ctx: ModelContext, grid_density: int = 6) -> list[OracleState]:
    """Independent steady-state search without the winding-map solve path.

    Rings are handled by exact flow-conservation enumeration for any size;
    other graphs (up to 7 vertices) by a dense-grid batched Newton seek on the
    fixed-point residual.  Results are filtered to the context's branches,
    deduplicated by gauge-fixed angles, and labeled with winding vectors.
    """
    if _is_uniform_ring(ctx.graph) is not None and not ctx.omega.any():
        raw = _ring_oracle(ctx)
    else:
        raw = _grid_oracle(ctx, grid_density)
    member = [th for th in raw if _branch_membership(ctx, th)]
    unique = _dedupe_thetas(member)
    states = [OracleState(th, winding_of_theta(ctx, th)) for th in unique]
    states.sort(key=lambda s: s.winding)
    return states


# ---------------------------------------------------------------------------
# branch sweep


def sweep_branch_assignments(
    graph: WeightedGraph,
    *,
    basis=None,
    omega=None,
    max_edges: int = 12,
    solver_tol: float = SOLVER_TOL,
) -> dict:
    """Enumerate under every principal/reflected assignment and pool the states.

    Exposes fixed points invisible to any single branch choice.  States are
    deduplicated by gauge-fixed angles across assignments.  Exponential in
    the edge count, hence the hard cap.
    """
    from .winding import PRINCIPAL, REFLECTED

    E = graph.n_edges
    if E > max_edges:
        raise EnumerationError(f"branch sweep limited to {max_edges} edges (got {E})")
    pooled: list[np.ndarray] = []
    per_assignment = []
    for bits in itertools.product((0, 1), repeat=E):
        branches = BranchAssignment([REFLECTED if b else PRINCIPAL for b in bits])
        ctx = ModelContext(graph, basis=basis, branches=branches, omega=omega)
        report = enumerate_states(ctx, solver_tol=solver_tol)
        if report.solver_failures:
            raise EnumerationError(f"solver failures during sweep at {bits}")
        per_assignment.append({"assignment": "".join("R" if b else "P" for b in bits),
                               "count": len(report.states)})
        pooled.extend(s.theta for s in report.states)
    unique = _dedupe_thetas(pooled)
    return {"distinct_states": len(unique), "per_assignment": per_assignment}
