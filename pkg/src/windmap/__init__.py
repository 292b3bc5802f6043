"""Steady states of coupled-oscillator networks via cycle-space winding maps.

The package enumerates every steady state of the sinusoidally coupled
oscillator flow on a weighted graph by identifying states with the integer
points of a winding map image, reconstructs and classifies each state, and
provides the measure-theoretic machinery (image volumes, tree integrals,
refinement scaling) that governs how the state count grows.
"""

__version__ = "0.1.0"

from .angles import gauge_distance, gauge_fix, wrap_to_2pi, wrap_to_pi
from .enumeration import (
    EnumerationError,
    EnumerationReport,
    OracleState,
    SteadyState,
    brute_force_oracle,
    enumerate_states,
    reconstruct_state,
    solve_winding,
    sweep_branch_assignments,
    winding_bounds,
    winding_of_theta,
)
from .graph_model import (
    CycleBasis,
    Edge,
    GraphValidationError,
    SubdivisionScheme,
    WeightedGraph,
    cycle_basis_lattice_check,
    document_omega,
    find_bridges,
    fundamental_cycle_basis,
    incidence_matrix,
    load_graph,
    read_document,
    smooth_two_valent,
    spanning_tree,
    spanning_trees,
    subdivide,
    validate_graph,
)
from .measure import (
    VolumeEstimate,
    WeylRow,
    bracket_constant,
    bracket_constant_crosscheck,
    cotree_integral,
    maximize_volume_branches,
    tree_sandwich_bounds,
    two_cycle_closed_form,
    weyl_experiment,
    winding_image_volume,
)
from .stability import (
    StabilityVerdict,
    Trajectory,
    classify_stability,
    coupling_energy,
    fixed_point_residual,
    jacobian_at,
    nontrivial_eigenvalues,
    perturbed,
    ring_instability_criterion,
    simulate,
)
from .winding import (
    PRINCIPAL,
    REFLECTED,
    BoundaryError,
    Branch,
    BranchAssignment,
    BranchDomainError,
    ModelContext,
    branch_arcsin,
    coordinate_polytope,
    count_faces,
    det_via_spanning_trees,
)

__all__ = [name for name in dir() if not name.startswith("_")]
