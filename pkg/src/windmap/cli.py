"""Command-line interface: validation, enumeration, stability, simulation,
face counting, volumes, refinement scaling, and branch maximization.

Reports are JSON with a stable field order; CSV companions cover plotting.
Diagnostics go to stderr, data to stdout or files.  Exit codes: 0 success,
1 validation error, 2 numerical failure, 3 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .enumeration import (
    EnumerationError,
    enumerate_states,
    sweep_branch_assignments,
)
from .families import q_twisted_state
from .graph_model import (
    GraphValidationError,
    SubdivisionScheme,
    WeightedGraph,
    document_omega,
    load_graph,
    read_document,
    smooth_two_valent,
)
from .measure import maximize_volume_branches, weyl_experiment, winding_image_volume
from .polytope import PolytopeError
from .stability import classify_stability, fixed_point_residual, perturbed, simulate
from .winding import BranchAssignment, ModelContext, coordinate_polytope, count_faces

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2
EXIT_IO = 3


@dataclass
class RunConfig:
    subcommand: str
    input_path: str | None = None
    output_path: str | None = None
    residual_tol: float = 1e-9
    solver_tol: float = 1e-10
    boundary_tol: float = 1e-9
    seed: int = 0
    threads: int = int(os.environ.get("WINDMAP_THREADS", "1"))
    budget: int = 200_000
    no_timestamp: bool = False
    extra: dict = field(default_factory=dict)

    def validate(self):
        for name in ("residual_tol", "solver_tol", "boundary_tol"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.threads < 1:
            raise ValueError("threads must be at least 1")


def _load_context(config: RunConfig):
    doc = read_document(config.input_path)
    g = load_graph(doc)
    omega = document_omega(doc, g)
    branches = BranchAssignment.from_document(doc, g)
    return doc, g, ModelContext(g, branches=branches, omega=omega)


def _report_header(config: RunConfig) -> dict:
    header = {"tool": "windmap", "version": __version__, "seed": config.seed}
    if not config.no_timestamp:
        header["generated_at"] = time.strftime("%Y-%m-%dT%H:%M:%S")
    return header


def _emit_json(payload: dict, config: RunConfig):
    text = json.dumps(payload, indent=2)
    if config.output_path:
        with open(config.output_path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _state_record(state) -> dict:
    return {
        "winding": list(state.winding),
        "alpha": [float(x) for x in state.alpha],
        "theta": [float(x) for x in state.theta],
        "boundary": bool(state.boundary),
        "residual": float(state.residual),
    }


# ---------------------------------------------------------------------------
# subcommands


def _cmd_graph(config: RunConfig) -> int:
    action = config.extra["action"]
    g = load_graph(config.input_path)
    if action == "check":
        print(f"ok: {g.n_vertices} vertices, {g.n_edges} edges, cycle rank {g.cycle_rank}")
        return EXIT_OK
    smoothed = smooth_two_valent(g)
    print(f"smoothed edges: {smoothed.n_edges}")
    return EXIT_OK


def _cmd_enumerate(config: RunConfig) -> int:
    _, g, ctx = _load_context(config)
    report = enumerate_states(ctx, solver_tol=config.solver_tol, threads=config.threads)
    payload = _report_header(config)
    payload.update({
        "graph": {"vertices": g.n_vertices, "edges": g.n_edges, "cycle_rank": g.cycle_rank},
        "tolerances": {
            "residual": config.residual_tol,
            "solver": config.solver_tol,
            "boundary": config.boundary_tol,
        },
        "winding_box": [list(report.winding_box[0]), list(report.winding_box[1])],
        "candidates_tested": report.candidates_tested,
        "states": [_state_record(s) for s in report.states],
        "solver_failures": [
            {"winding": list(f.winding), "message": f.message} for f in report.solver_failures
        ],
    })
    if not config.no_timestamp:
        payload["timing_seconds"] = report.timing
    _emit_json(payload, config)
    if report.solver_failures:
        print(f"{len(report.solver_failures)} unresolved candidates", file=sys.stderr)
        return EXIT_NUMERICAL
    return EXIT_OK


def _cmd_faces(config: RunConfig) -> int:
    _, g, ctx = _load_context(config)
    faces = count_faces(coordinate_polytope(ctx))
    predicted = 2 * smooth_two_valent(g).n_edges
    print(f"faces={faces} predicted={predicted}")
    return EXIT_OK if faces == predicted else EXIT_NUMERICAL


def _cmd_stability(config: RunConfig) -> int:
    _, g, ctx = _load_context(config)
    with open(config.extra["states"], "r", encoding="utf-8") as fh:
        states_doc = json.load(fh)
    rows = []
    for record in states_doc["states"]:
        theta = np.array(record["theta"], dtype=float)
        residual = fixed_point_residual(g, theta, ctx.omega)
        if residual > config.residual_tol:
            print(f"state {record['winding']} residual {residual:.2e} too large", file=sys.stderr)
            return EXIT_NUMERICAL
        verdict = classify_stability(g, theta)
        rows.append({
            "winding": record["winding"],
            "label": verdict.label,
            "max_nontrivial_eigenvalue": verdict.max_nontrivial_eigenvalue,
            "negative_cosine_edges": list(verdict.negative_cosine_edges),
            "criterion": verdict.criterion_used,
        })
    payload = _report_header(config)
    payload["verdicts"] = rows
    _emit_json(payload, config)
    return EXIT_OK


def _parse_theta0(spec: str, g: WeightedGraph) -> np.ndarray:
    if spec.startswith("twisted:"):
        q = int(spec.split(":", 1)[1])
        return q_twisted_state(g.n_vertices, q)
    if os.path.exists(spec):
        with open(spec, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        if isinstance(data, dict):
            data = data["theta"]
        return np.array(data, dtype=float)
    return np.array([float(x) for x in spec.split(",")], dtype=float)


def _cmd_simulate(config: RunConfig) -> int:
    doc, g, ctx = _load_context(config)
    theta0 = _parse_theta0(config.extra["theta0"], g)
    if theta0.shape != (g.n_vertices,):
        raise ValueError("theta0 length must equal the vertex count")
    if config.extra["perturb"]:
        theta0 = perturbed(theta0, config.extra["perturb"], config.seed)
    traj = simulate(g, theta0, ctx.omega, dt=config.extra["dt"], T=config.extra["T"])
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(["time"] + [f"theta_{v}" for v in g.vertices])
    stride = max(1, config.extra["stride"])
    for i in range(0, len(traj.times), stride):
        writer.writerow([f"{traj.times[i]:.6f}"] + [f"{x:.12f}" for x in traj.states[i]])
    text = out.getvalue()
    if config.output_path:
        with open(config.output_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(f"terminal residual: {traj.terminal_residual:.3e}", file=sys.stderr)
    return EXIT_OK


def _cmd_volume(config: RunConfig) -> int:
    _, _, ctx = _load_context(config)
    est = winding_image_volume(
        ctx, config.extra["method"], budget=config.budget, seed=config.seed
    )
    payload = _report_header(config)
    payload.update({
        "value": est.value,
        "abs_error": est.abs_error,
        "method": est.method,
        "samples_or_cells": est.samples_or_cells,
    })
    _emit_json(payload, config)
    return EXIT_OK


def _cmd_weyl(config: RunConfig) -> int:
    doc, g, ctx = _load_context(config)
    rates = config.extra["rates"]
    if rates is None:
        rates = 1.0
    scheme = SubdivisionScheme(g, rates, 1)
    rows = weyl_experiment(scheme, config.extra["Ms"], branches=ctx.branches,
                           solver_tol=config.solver_tol, budget=config.budget)
    payload = _report_header(config)
    payload["rows"] = [
        {"M": r.M, "lattice_count": r.lattice_count, "ratio": r.ratio, "target": r.target}
        for r in rows
    ]
    _emit_json(payload, config)
    if config.extra["csv"]:
        with open(config.extra["csv"], "w", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["M", "lattice_count", "ratio", "target"])
            for r in rows:
                writer.writerow([r.M, r.lattice_count, f"{r.ratio:.12f}", f"{r.target:.12f}"])
    return EXIT_OK


def _cmd_maximize(config: RunConfig) -> int:
    doc, g, _ = _load_context(config)
    result = maximize_volume_branches(g, seed=config.seed, budget=config.budget)
    payload = _report_header(config)
    payload.update({
        "assignment": result["assignment_string"],
        "volume": result["volume"].value,
        "abs_error": result["volume"].abs_error,
        "is_maximal": result["is_maximal"],
        "table": result["table"],
    })
    _emit_json(payload, config)
    return EXIT_OK if result["is_maximal"] else EXIT_NUMERICAL


def _cmd_sweep(config: RunConfig) -> int:
    doc, g, ctx = _load_context(config)
    summary = sweep_branch_assignments(g, omega=ctx.omega, solver_tol=config.solver_tol)
    payload = _report_header(config)
    payload.update(summary)
    _emit_json(payload, config)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="windmap",
        description="Steady states of coupled-oscillator networks via winding maps",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def common(p, output=True):
        p.add_argument("input", help="graph document (JSON)")
        if output:
            p.add_argument("--report", dest="output", default=None, help="write JSON here")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--threads", type=int, default=int(os.environ.get("WINDMAP_THREADS", "1")))
        p.add_argument("--budget", type=int, default=200_000)
        p.add_argument("--residual-tol", type=float, default=1e-9)
        p.add_argument("--solver-tol", type=float, default=1e-10)
        p.add_argument("--boundary-tol", type=float, default=1e-9)
        p.add_argument("--no-timestamp", action="store_true")

    p = sub.add_parser("graph", help="validate or smooth a graph document")
    p.add_argument("action", choices=["check", "smooth"])
    common(p, output=False)

    common(sub.add_parser("enumerate", help="enumerate all steady states"))
    common(sub.add_parser("faces", help="facet count against the smoothing prediction"), output=False)

    p = sub.add_parser("stability", help="classify states from an enumeration report")
    p.add_argument("--states", required=True, help="enumeration report JSON")
    common(p)

    p = sub.add_parser("simulate", help="integrate the flow and export CSV")
    p.add_argument("--theta0", required=True,
                   help="JSON file, comma-separated angles, or twisted:<q>")
    p.add_argument("--dt", type=float, default=1e-2)
    p.add_argument("-T", "--T", dest="T", type=float, required=True)
    p.add_argument("--perturb", type=float, default=0.0)
    p.add_argument("--stride", type=int, default=1)
    common(p)

    p = sub.add_parser("volume", help="volume of the winding map image")
    p.add_argument("--method", choices=["quad", "quadrature", "mc", "monte_carlo"],
                   default="quadrature")
    common(p)

    p = sub.add_parser("weyl", help="lattice counts under edge refinement")
    p.add_argument("--Ms", required=True, help="comma separated scales, e.g. 10,40,160")
    p.add_argument("--rates", default=None, help="scalar or comma separated per-edge rates")
    p.add_argument("--csv", default=None)
    common(p)

    common(sub.add_parser("maximize", help="branch assignment maximizing the image volume"))
    common(sub.add_parser("sweep-branches", help="pool states over all branch assignments"))
    return parser


def _config_from_args(args) -> RunConfig:
    config = RunConfig(
        subcommand=args.subcommand,
        input_path=getattr(args, "input", None),
        output_path=getattr(args, "output", None),
        seed=args.seed,
        threads=getattr(args, "threads", 1),
        budget=getattr(args, "budget", 200_000),
        residual_tol=getattr(args, "residual_tol", 1e-9),
        solver_tol=getattr(args, "solver_tol", 1e-10),
        boundary_tol=getattr(args, "boundary_tol", 1e-9),
        no_timestamp=getattr(args, "no_timestamp", False),
    )
    if args.subcommand == "graph":
        config.extra["action"] = args.action
    elif args.subcommand == "stability":
        config.extra["states"] = args.states
    elif args.subcommand == "simulate":
        config.extra.update({
            "theta0": args.theta0, "dt": args.dt, "T": args.T,
            "perturb": args.perturb, "stride": args.stride,
        })
    elif args.subcommand == "volume":
        config.extra["method"] = args.method
    elif args.subcommand == "weyl":
        config.extra["Ms"] = [int(x) for x in args.Ms.split(",")]
        rates = args.rates
        if rates is not None:
            parts = [float(x) for x in str(rates).split(",")]
            rates = parts[0] if len(parts) == 1 else tuple(parts)
        config.extra["rates"] = rates
        config.extra["csv"] = args.csv
    config.validate()
    return config


_DISPATCH = {
    "graph": _cmd_graph,
    "enumerate": _cmd_enumerate,
    "faces": _cmd_faces,
    "stability": _cmd_stability,
    "simulate": _cmd_simulate,
    "volume": _cmd_volume,
    "weyl": _cmd_weyl,
    "maximize": _cmd_maximize,
    "sweep-branches": _cmd_sweep,
}


def run(config: RunConfig) -> int:
    """Execute a subcommand, mapping failures to stable exit codes."""
    try:
        return _DISPATCH[config.subcommand](config)
    except (GraphValidationError, ValueError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (EnumerationError, PolytopeError, FloatingPointError, RuntimeError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (OSError, json.JSONDecodeError) as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = _config_from_args(args)
    except ValueError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
