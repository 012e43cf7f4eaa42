"""Command line entry point of the lab.

Every subcommand prints a JSON report (or writes it with ``--json``). Lab
errors exit with status 1, usage and configuration errors with status 2.
"""
import json
import logging
from dataclasses import asdict
from pathlib import Path

import click
import numpy as np

from src.conf.config import settings
from src.conf.logging import setup_logging
from src.schemas.phi import parse_phi
from src.services.cochain import (
    coboundary,
    continuity_bound_check,
    load_cochain,
    random_cochain,
    save_cochain,
    seminorm,
)
from src.services.degree_one import NormBudget, dist_to_coboundaries, f2_budget_sweep, f2_example, is_cocycle
from src.services.exceptions import InvalidYoungFunction, OrliczLabError
from src.services.harmonic import (
    GeneratorStructure,
    conjugate_bound_check,
    dirichlet_norm,
    harmonic_decompose,
    linear_dirichlet_solve,
    load_generator_structure,
    load_vertex_function,
    save_generator_structure,
    save_iteration_log,
    save_vertex_function,
)
from src.services.orlicz import load_weighted_vector, luxemburg_solve, modular
from src.services.repro import REPRODUCTIONS, run_reproduction
from src.services.spaces import (
    build_cayley_ball,
    build_grid,
    build_path,
    enumerate_cayley_ball,
    geometry_stats,
    load_space,
    parse_group,
    save_space,
)
from src.services.transfer import (
    QuasiIsometry,
    ball_kernel,
    homotopy_identity_residual,
    load_point_map,
    quasi_inverse,
    tightest_constants,
)
from src.services.young import (
    besov_summability,
    conjugate_eval,
    derivative,
    doubling_report,
    evaluate,
    n_function_report,
)

logger = logging.getLogger(__name__)


class PhiType(click.ParamType):
    """``--phi`` values such as ``power:2``, ``pop:3`` or ``expinvsq``."""
    name = "phi"

    def convert(self, value, param, ctx):
        if not isinstance(value, str):
            return value
        try:
            return parse_phi(value)
        except InvalidYoungFunction as exc:
            self.fail(str(exc), param, ctx)


PHI = PhiType()


class LabGroup(click.Group):
    """Maps lab errors to exit status 1."""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except OrliczLabError as exc:
            click.echo(f"error: {exc}", err=True)
            ctx.exit(1)


def _emit(ctx: click.Context, command: str, result: dict, config: dict, json_path: str | None, seed: int = 0) -> None:
    """Print or write the report, and store it in the run ledger on ``--record``."""
    report = {
        "command": command,
        "artifact_version": settings.artifact_version,
        "config": {key: getattr(value, "spec", value) for key, value in config.items()},
        "result": result,
    }
    text = json.dumps(report, sort_keys=True, indent=2, default=float)
    if json_path:
        Path(json_path).write_text(text + "\n", encoding="utf-8")
    else:
        click.echo(text)
    if ctx.find_root().obj.get("record"):
        from src.database.connect import SessionLocal
        from src.repository.runs import create_run

        db = SessionLocal()
        try:
            stored = json.loads(text)
            record = create_run(db, command=command, report=stored, config=stored["config"], seed=seed)
            logger.info("recorded run %d", record.id)
        finally:
            db.close()


json_option = click.option("--json", "json_path", type=click.Path(dir_okay=False), help="Write the report here.")
phi_option = click.option("--phi", type=PHI, default="power:2", show_default=True, help="Young function spec.")


@click.group(cls=LabGroup)
@click.option("--log-level", default=None, help="Root log level, defaults to ORLICZ_LOG_LEVEL.")
@click.option("--record", is_flag=True, help="Store the report in the run ledger.")
@click.pass_context
def cli(ctx, log_level, record):
    """L^φ cochains, quasi-isometry transfer and φ-harmonic decompositions."""
    setup_logging(log_level)
    ctx.ensure_object(dict)
    ctx.obj["record"] = record


# young

@cli.group()
def young():
    """Young function calculus."""


@young.command("eval")
@phi_option
@click.option("--t", "points", type=float, multiple=True, required=True)
@json_option
@click.pass_context
def young_eval(ctx, phi, points, json_path):
    """φ(t) and φ′(t)."""
    t = np.asarray(points)
    result = {"t": list(points), "value": evaluate(phi, t).tolist(), "derivative": derivative(phi, t).tolist()}
    _emit(ctx, "young eval", result, {"phi": phi}, json_path)


@young.command("conj")
@phi_option
@click.option("--s", "points", type=float, multiple=True, required=True)
@json_option
@click.pass_context
def young_conj(ctx, phi, points, json_path):
    """Numeric convex conjugate ψ(s)."""
    result = {"s": list(points), "value": np.atleast_1d(conjugate_eval(phi, np.asarray(points))).tolist()}
    _emit(ctx, "young conj", result, {"phi": phi}, json_path)


@young.command("doubling")
@phi_option
@json_option
@click.pass_context
def young_doubling(ctx, phi, json_path):
    """Doubling diagnostic on the default grid, with the N-function check."""
    report = doubling_report(phi)
    nfunc = n_function_report(phi)
    result = {"max_ratio": report.max_ratio, "ratio_argmax": report.ratio_argmax, "verdict": report.verdict.value,
              "constant": report.constant, "is_n_function": nfunc.is_n_function}
    _emit(ctx, "young doubling", result, {"phi": phi}, json_path)


@young.command("besov")
@phi_option
@click.option("--n", type=click.IntRange(min=2), default=3, show_default=True)
@click.option("--m-max", type=click.IntRange(min=100), default=1_000_000, show_default=True)
@json_option
@click.pass_context
def young_besov(ctx, phi, n, m_max, json_path):
    """Summability of Σ φ(1/m)·m^(n−1)."""
    report = besov_summability(phi, n, m_max)
    result = {"verdict": report.verdict.value, "checkpoints": list(report.checkpoints),
              "partial_sums": list(report.partial_sums), "tail_ratios": list(report.tail_ratios)}
    _emit(ctx, "young besov", result, {"phi": phi, "n": n, "m_max": m_max}, json_path)


# orlicz

@cli.group()
def orlicz():
    """Modulars and Luxemburg norms."""


@orlicz.command("norm")
@phi_option
@click.option("--input", "input_path", type=click.Path(exists=True, dir_okay=False), required=True,
              help="CSV of value,weight rows.")
@json_option
@click.pass_context
def orlicz_norm(ctx, phi, input_path, json_path):
    """ρ_φ(f) and ‖f‖_φ of a weighted vector."""
    f = load_weighted_vector(input_path)
    solution = luxemburg_solve(phi, f)
    result = {"modular": modular(phi, f), "norm": solution.norm, "modular_at_norm": solution.modular_at_norm,
              "steps": solution.steps, "size": len(f)}
    _emit(ctx, "orlicz norm", result, {"phi": phi, "input": input_path}, json_path)


# spaces

@cli.group()
def spaces():
    """Finite metric measure spaces."""


@spaces.command("gen")
@click.option("--kind", type=click.Choice(["cayley", "path", "grid"]), default="cayley", show_default=True)
@click.option("--group", default="f2", show_default=True, help="f<rank> or z<rank>.")
@click.option("--radius", type=click.IntRange(min=1), default=2, show_default=True)
@click.option("--n", "n_points", type=click.IntRange(min=2), default=11, show_default=True)
@click.option("--rows", type=click.IntRange(min=1), default=5, show_default=True)
@click.option("--cols", type=click.IntRange(min=1), default=5, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True, help="Space file.")
@click.option("--gs-out", type=click.Path(dir_okay=False), help="Generator structure file.")
@json_option
@click.pass_context
def spaces_gen(ctx, kind, group, radius, n_points, rows, cols, out, gs_out, json_path):
    """Generate a Cayley ball, a path or a grid."""
    if kind == "cayley":
        parsed = parse_group(group)
        space = build_cayley_ball(parsed, radius)
        gs = GeneratorStructure.from_cayley_ball(enumerate_cayley_ball(parsed, radius))
        config = {"kind": kind, "group": group, "radius": radius}
    elif kind == "path":
        space, gs = build_path(n_points), GeneratorStructure.path(n_points)
        config = {"kind": kind, "n": n_points}
    else:
        space, gs = build_grid(rows, cols), GeneratorStructure.grid(rows, cols)
        config = {"kind": kind, "rows": rows, "cols": cols}
    save_space(space, out)
    if gs_out:
        save_generator_structure(gs, gs_out)
    result = {"n_points": space.n_points, "diameter": space.diameter, "boundary_size": int(gs.boundary.size)}
    _emit(ctx, "spaces gen", result, config, json_path)


@spaces.command("stats")
@click.option("--space", "space_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--r", type=float, required=True)
@json_option
@click.pass_context
def spaces_stats(ctx, space_path, r, json_path):
    """Ball measure bounds and the midpoint constant."""
    stats = geometry_stats(load_space(space_path), r)
    result = {"v": stats.v, "V": stats.V, "midpoint_constant": stats.midpoint_constant, "r0": stats.r0}
    _emit(ctx, "spaces stats", result, {"space": space_path, "r": r}, json_path)


# cochain

@cli.group()
def cochain():
    """Alexander-Spanier cochains."""


@cochain.command("d")
@click.option("--space", "space_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--in", "--input", "input_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@json_option
@click.pass_context
def cochain_d(ctx, space_path, input_path, out, json_path):
    """Write the coboundary of a cochain file."""
    space = load_space(space_path)
    u = load_cochain(input_path, space)
    du = coboundary(u)
    save_cochain(du, out)
    _emit(ctx, "cochain d", {"degree": du.degree}, {"space": space_path, "input": input_path}, json_path)


@cochain.command("norm")
@click.option("--space", "space_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--in", "--input", "input_path", type=click.Path(exists=True, dir_okay=False), required=True)
@phi_option
@click.option("--s", type=float, required=True, help="Scale.")
@click.option("--distinct", is_flag=True, help="Only tuples of distinct points.")
@json_option
@click.pass_context
def cochain_norm(ctx, space_path, input_path, phi, s, distinct, json_path):
    """‖u‖_{φ,s} with the continuity bound of d."""
    space = load_space(space_path)
    u = load_cochain(input_path, space)
    lhs, rhs = continuity_bound_check(u, phi, s)
    result = {"degree": u.degree, "seminorm": seminorm(u, phi, s, distinct),
              "coboundary_modular": lhs, "continuity_bound": rhs}
    config = {"space": space_path, "input": input_path, "phi": phi, "s": s, "distinct": distinct}
    _emit(ctx, "cochain norm", result, config, json_path)


# transfer

@cli.group()
def transfer():
    """Quasi-isometry transfer of cochains."""


@transfer.command("verify")
@click.option("--space-x", "--space", "space_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--space-y", "--target", "target_path", type=click.Path(exists=True, dir_okay=False),
              help="Target space, the source by default.")
@click.option("--map", "--forward", "forward_path", type=click.Path(exists=True, dir_okay=False),
              help="Map X → Y, the identity by default.")
@click.option("--backward", "backward_path", type=click.Path(exists=True, dir_okay=False),
              help="Map Y → X, a nearest-point quasi-inverse by default.")
@click.option("--kernel-radius", type=float, default=1.5, show_default=True)
@click.option("--k", "--degree", "degree", type=click.IntRange(0, 2), default=1, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@json_option
@click.pass_context
def transfer_verify(ctx, space_path, target_path, forward_path, backward_path, kernel_radius, degree, seed,
                    json_path):
    """Residual of the homotopy identity on a random cochain."""
    source = load_space(space_path)
    target = load_space(target_path) if target_path else source
    forward = load_point_map(forward_path, source.n_points, target.n_points) if forward_path \
        else np.arange(source.n_points)
    backward = load_point_map(backward_path, target.n_points, source.n_points) if backward_path \
        else quasi_inverse(target, forward)
    F = QuasiIsometry(source, target, forward, *tightest_constants(source, target, forward))
    Fbar = QuasiIsometry(target, source, backward, *tightest_constants(target, source, backward))
    u = random_cochain(source, degree, np.random.default_rng(seed))
    report = homotopy_identity_residual(F, Fbar, ball_kernel(source, kernel_radius), ball_kernel(target, kernel_radius), u)
    result = {"degree": report.degree, "residual": report.residual, "residual_alternative": report.residual_alternative,
              "support_radius": report.support_radius, "lambda": F.lam, "eps": F.eps}
    config = {"space": space_path, "target": target_path, "forward": forward_path, "backward": backward_path,
              "kernel_radius": kernel_radius, "degree": degree, "seed": seed}
    _emit(ctx, "transfer verify", result, config, json_path, seed)


# degree one

@cli.group()
def deg1():
    """Degree-one cohomology."""


@deg1.command("f2")
@click.option("--eps", "epsilon", type=float, default=0.5, show_default=True)
@click.option("--n", type=click.IntRange(min=1), default=4, show_default=True)
@click.option("--radius", type=click.IntRange(min=1), default=None, help="Truncation radius, n+1 by default.")
@click.option("--phi", type=PHI, default="expinvsq", show_default=True)
@click.option("--sweep", is_flag=True, help="Also run the norm-budget distance sweep for 1..n.")
@json_option
@click.pass_context
def deg1_f2(ctx, epsilon, n, radius, phi, sweep, json_path):
    """The free group cocycle ω and its approximating coboundaries."""
    radius = radius or n + 1
    example = f2_example(epsilon, n, radius, phi)
    result = {
        "norm_gap": example.norm_gap,
        "alpha_closed_form": example.alpha_closed_form,
        "omega_norm": example.omega_norm,
        "exact_edge_count": example.exact_edge_count,
        "analytic_edge_count": example.analytic_edge_count,
        "closed_form_edge_count": example.closed_form_edge_count,
        "count_ratio": example.count_ratio,
        "modular_at_gap": example.modular_at_gap,
        "f_n_support": len(example.f_n),
    }
    if sweep:
        result["budget_sweep"] = [asdict(row) for row in f2_budget_sweep(epsilon, range(1, n + 1), radius, phi)]
    config = {"eps": epsilon, "n": n, "radius": radius, "phi": phi, "sweep": sweep}
    _emit(ctx, "deg1 f2", result, config, json_path)


@deg1.command("dist")
@click.option("--space", "space_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--in", "--input", "input_path", type=click.Path(exists=True, dir_okay=False), required=True)
@phi_option
@click.option("--s", type=float, default=1.0, show_default=True)
@click.option("--budget", type=float, default=None, help="Norm budget R; unconstrained when omitted.")
@json_option
@click.pass_context
def deg1_dist(ctx, space_path, input_path, phi, s, budget, json_path):
    """Distance from a 1-cocycle to the coboundaries."""
    space = load_space(space_path)
    u = load_cochain(input_path, space, degree=1)
    check = is_cocycle(u)
    constraint = NormBudget(budget) if budget is not None else None
    distance = dist_to_coboundaries(u, phi, s, constraint, strict=False)
    result = {"is_cocycle": check.ok, "worst_violation": check.worst_violation, "dist": distance.dist,
              "rounds": distance.rounds, "iterations": len(distance.log), "converged": distance.converged}
    config = {"space": space_path, "input": input_path, "phi": phi, "s": s, "budget": budget}
    _emit(ctx, "deg1 dist", result, config, json_path)


# harmonic

@cli.group()
def harmonic():
    """φ-harmonic decompositions."""


def _load_structure(space_path: str | None, gs_path: str) -> GeneratorStructure:
    if space_path is None:
        return load_generator_structure(gs_path)
    space = load_space(space_path)
    return load_generator_structure(gs_path, weights=space.weights, labels=space.labels)


@harmonic.command("decompose")
@click.option("--space", "space_path", type=click.Path(exists=True, dir_okay=False),
              help="Space file for the point measure; unit weights when omitted.")
@click.option("--gen-structure", "gs_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--f", "f_path", type=click.Path(exists=True, dir_okay=False), required=True)
@phi_option
@click.option("--tol", type=float, default=None, help="Residual tolerance, defaults to ORLICZ_HARMONIC_TOL.")
@click.option("--max-iter", type=click.IntRange(min=1), default=None)
@click.option("--h-out", type=click.Path(dir_okay=False), help="Write h here.")
@click.option("--log-csv", type=click.Path(dir_okay=False), help="Write the iteration log here.")
@json_option
@click.pass_context
def harmonic_decompose_cmd(ctx, space_path, gs_path, f_path, phi, tol, max_iter, h_out, log_csv, json_path):
    """Split f into a part vanishing on the boundary and a φ-harmonic part."""
    gs = _load_structure(space_path, gs_path)
    f = load_vertex_function(f_path)
    result = harmonic_decompose(phi, f, gs, tol=tol, max_iter=max_iter)
    if h_out:
        save_vertex_function(result.h.values, h_out)
    if log_csv:
        save_iteration_log(result.iterations, log_csv)
    report = {
        "energy": result.energy,
        "harmonic_residual": result.harmonic_residual,
        "converged": result.converged,
        "iterations": len(result.iterations) - 1,
        "h": result.h.values.tolist(),
        "u_modular": result.u.modular,
        "h_modular": result.h.modular,
        "h_norm": dirichlet_norm(phi, result.h.values, gs),
    }
    try:
        lhs, rhs = conjugate_bound_check(phi, result.h.values, gs)
        report["conjugate_bound"] = {"lhs": lhs, "rhs": rhs}
    except OrliczLabError:
        report["conjugate_bound"] = None
    config = {"space": space_path, "gen_structure": gs_path, "f": f_path, "phi": phi,
              "tol": tol if tol is not None else settings.harmonic_tol}
    _emit(ctx, "harmonic decompose", report, config, json_path)


@harmonic.command("solve-linear")
@click.option("--space", "space_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--gen-structure", "gs_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--f", "f_path", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--h-out", type=click.Path(dir_okay=False), help="Write h here.")
@json_option
@click.pass_context
def harmonic_solve_linear(ctx, space_path, gs_path, f_path, h_out, json_path):
    """Direct solve of the quadratic Dirichlet problem."""
    gs = _load_structure(space_path, gs_path)
    h = linear_dirichlet_solve(gs, load_vertex_function(f_path))
    if h_out:
        save_vertex_function(h, h_out)
    _emit(ctx, "harmonic solve-linear", {"h": h.tolist()},
          {"space": space_path, "gen_structure": gs_path, "f": f_path}, json_path)


# worked examples

@cli.group()
def paper():
    """Worked examples."""


@paper.command("repro")
@click.argument("name", type=click.Choice(sorted(REPRODUCTIONS)))
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--phi", type=PHI, default=None, help="Young function for besov and z-harmonic.")
@click.option("--n", type=click.IntRange(min=1), default=None, help="Dimension (besov) or path length (z-harmonic).")
@json_option
@click.pass_context
def paper_repro(ctx, name, seed, phi, n, json_path):
    """Reproduce one worked example."""
    params = {}
    if phi is not None:
        if name not in ("besov", "z-harmonic"):
            raise click.BadParameter(f"--phi does not apply to {name}", param_hint="--phi")
        params["phi"] = phi
    if n is not None:
        if name not in ("besov", "z-harmonic"):
            raise click.BadParameter(f"--n does not apply to {name}", param_hint="--n")
        params["n"] = n
    report = run_reproduction(name, seed=seed, **params)
    _emit(ctx, f"paper repro {name}", report["result"], report["config"], json_path, seed)


if __name__ == "__main__":
    cli(obj={})
