"""Stability classification and time integration of the oscillator network.

The dynamics are  dtheta_i/dt = omega_i - sum_j w_ij sin(theta_i - theta_j).
With zero natural frequencies this is a gradient flow of the coupling energy
-sum_e w_e cos(theta_e), so simulated trajectories descend that energy and
every state relaxes toward some steady state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .angles import gauge_fix, wrap_to_2pi
from .graph_model import WeightedGraph, incidence_matrix

EIG_TOL = 1e-9


@dataclass(frozen=True)
class StabilityVerdict:
    label: str                       # "stable" | "unstable" | "marginal"
    max_nontrivial_eigenvalue: float
    negative_cosine_edges: tuple     # edges with weight*cos(angle difference) < 0
    criterion_used: str              # "spectrum" | "ring_theorem" | "branch_shortcut"


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: np.ndarray               # (n_steps + 1, n_vertices)
    terminal_residual: float


def _edge_arrays(g: WeightedGraph):
    B = incidence_matrix(g).astype(float)
    return B, g.weights()


def fixed_point_residual(g: WeightedGraph, theta, omega=None) -> float:
    """Infinity norm of omega - B D_w sin(B^T theta)."""
    B, w = _edge_arrays(g)
    theta = np.asarray(theta, dtype=float)
    if omega is None:
        omega = np.zeros(g.n_vertices)
    return float(np.max(np.abs(omega - B @ (w * np.sin(B.T @ theta)))))


def coupling_energy(g: WeightedGraph, theta) -> float:
    """-sum_e w_e cos(theta_e); the potential of the zero-frequency flow."""
    B, w = _edge_arrays(g)
    return float(-np.sum(w * np.cos(B.T @ np.asarray(theta, dtype=float))))


def jacobian_at(g: WeightedGraph, theta) -> np.ndarray:
    """Linearization at a state: minus the Laplacian weighted by w_e cos(theta_e).

    Symmetric with zero row sums; the all-ones vector is always a zero mode
    (global rotation invariance).
    """
    B, w = _edge_arrays(g)
    cos_w = w * np.cos(B.T @ np.asarray(theta, dtype=float))
    return -(B * cos_w) @ B.T


def _ones_complement(n: int) -> np.ndarray:
    basis = np.eye(n)
    basis[:, 0] = 1.0
    q, _ = np.linalg.qr(basis)
    return q[:, 1:]


def nontrivial_eigenvalues(J: np.ndarray) -> np.ndarray:
    """Spectrum of the linearization restricted to the rotation-free subspace."""
    Q = _ones_complement(J.shape[0])
    return np.linalg.eigvalsh(Q.T @ J @ Q)


def classify_stability(g: WeightedGraph, state, *, eig_tol: float = EIG_TOL,
                       use_shortcut: bool = True) -> StabilityVerdict:
    """Orbital stability modulo the global rotation mode.

    When every edge has weight*cos(angle difference) strictly positive the
    linearization is a negated positive-semidefinite Laplacian with only the
    rotation zero mode, so the state is stable without looking at the
    spectrum; the shortcut is recorded but the extreme eigenvalue is still
    reported.
    """
    theta = np.asarray(getattr(state, "theta", state), dtype=float)
    B, w = _edge_arrays(g)
    cos_w = w * np.cos(B.T @ theta)
    negative_edges = tuple(int(i) for i in np.nonzero(cos_w < 0)[0])

    eigs = nontrivial_eigenvalues(jacobian_at(g, theta))
    top = float(np.max(eigs)) if eigs.size else 0.0

    if use_shortcut and np.all(cos_w > eig_tol):
        return StabilityVerdict("stable", top, negative_edges, "branch_shortcut")
    if top <= -eig_tol:
        label = "stable"
    elif top >= eig_tol:
        label = "unstable"
    else:
        label = "marginal"
    return StabilityVerdict(label, top, negative_edges, "spectrum")


# ---------------------------------------------------------------------------
# ring instability certificate


def _inv_sine_cos_negative(y: np.ndarray, alpha_sign: int) -> np.ndarray:
    """Inverse sine on the quarter-turn set where the cosine is negative."""
    a = np.arcsin(np.clip(y, -1.0, 1.0))
    return np.where(alpha_sign >= 0, math.pi - a, 2.0 * math.pi + a)


def _inv_sine_cos_positive(y: np.ndarray, alpha_sign: int) -> np.ndarray:
    """Inverse sine on the quarter-turn set where the cosine is positive."""
    a = np.arcsin(np.clip(y, -1.0, 1.0))
    return np.where(alpha_sign >= 0, a, math.pi - a)


def ring_instability_criterion(ctx, state, *, tie_tol: float = 1e-12) -> bool:
    """Sufficient instability certificate for single-cycle graphs.

    The total angle gain around the ring is compared against the extreme gain
    achievable with at most one edge on the cosine-negative quarter turns; a
    strict excess forces at least two such edges, which is unstable.  False
    is inconclusive, not a stability certificate.  Ties within ``tie_tol``
    (including a flow constant at zero, where the quarter-turn inverses meet
    at branch boundaries) report inconclusive.
    """
    from .enumeration import _is_uniform_ring  # local import to avoid a cycle

    g = ctx.graph
    if ctx.omega.any():
        raise ValueError("ring criterion requires zero natural frequencies")
    walk = _is_uniform_ring(g)
    if walk is None:
        raise ValueError("ring criterion requires a single-cycle graph")

    theta = np.asarray(getattr(state, "theta", state), dtype=float)
    B = incidence_matrix(g).astype(float)
    bt = B.T @ theta
    steps = np.array([wrap_to_2pi(direction * bt[e]) for e, direction in walk])
    w = np.array([g.edges[e].weight for e, _ in walk])

    flows = w * np.sin(steps)
    alpha = float(np.mean(flows))
    if np.max(np.abs(flows - alpha)) > 1e-7 * max(1.0, abs(alpha)):
        raise ValueError("state does not conserve flow around the ring; not a steady state")
    if abs(alpha) <= tie_tol:
        return False

    total = float(np.sum(steps))
    y = alpha / w
    if alpha > 0:
        neg = _inv_sine_cos_negative(y, +1)
        pos = _inv_sine_cos_positive(y, +1)
        bound = float(np.max(neg + (np.sum(pos) - pos)))
        return total > bound + tie_tol
    neg = _inv_sine_cos_negative(y, -1)
    pos = _inv_sine_cos_positive(y, -1)
    bound = float(np.min(pos + (np.sum(neg) - neg)))
    return total < bound - tie_tol


# ---------------------------------------------------------------------------
# simulation


def simulate(g: WeightedGraph, theta0, omega=None, dt: float = 1e-2, T: float = 10.0) -> Trajectory:
    """Fixed-step classical 4th-order integration of the oscillator flow.

    The step count is ceil(T/dt); every step is recorded.  Raises on
    non-finite states.
    """
    if dt <= 0 or T < dt:
        raise ValueError("need dt > 0 and T >= dt")
    B, w = _edge_arrays(g)
    theta = np.asarray(theta0, dtype=float).copy()
    if omega is None:
        omega = np.zeros(g.n_vertices)
    omega = np.asarray(omega, dtype=float)

    def f(th):
        return omega - B @ (w * np.sin(B.T @ th))

    n_steps = int(math.ceil(T / dt - 1e-12))
    times = np.arange(n_steps + 1) * dt
    states = np.empty((n_steps + 1, g.n_vertices))
    states[0] = theta
    for i in range(n_steps):
        k1 = f(theta)
        k2 = f(theta + 0.5 * dt * k1)
        k3 = f(theta + 0.5 * dt * k2)
        k4 = f(theta + dt * k3)
        theta = theta + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(theta)):
            raise FloatingPointError(f"non-finite state at step {i}")
        states[i + 1] = theta
    return Trajectory(times, states, fixed_point_residual(g, theta, omega))


def perturbed(theta, bound: float, seed: int) -> np.ndarray:
    """State plus a seeded uniform perturbation with components in [-bound, bound]."""
    rng = np.random.default_rng(seed)
    theta = np.asarray(theta, dtype=float)
    return theta + rng.uniform(-bound, bound, size=theta.shape)
