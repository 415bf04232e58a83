"""Command-line entry points for the experiment harness.

Every experiment subcommand accepts an optional YAML config file plus flag
overrides; flags win over the file, the file wins over defaults.  ``recover``
and ``certify`` run one fully-reported instance each, for quick inspection.
"""

from __future__ import annotations

import dataclasses

import click
import numpy as np

from .certify import (
    DualCertificate,
    GolfingParams,
    certify_optimality,
    format_construction_log,
    golfing_construct,
    injectivity_spectrum,
    verify_certificate,
)
from .diffraction import MeasurementFrame, measure, sample_masks, ternary_mask_distribution
from .experiments import (
    ExperimentConfig,
    derive_seed,
    random_unit_signal,
    run_golfing_rate,
    run_isotropy_audit,
    run_lower_bound_experiment,
    run_phase_transition,
)
from .hermitian import phase_aligned_distance
from .solver import SolverConfig, extract_signal, solve_phaselift, verify_feasibility

__all__ = ["main"]


def _int_list(_ctx, _param, value):
    if value is None:
        return None
    try:
        return tuple(int(v) for v in value.split(","))
    except ValueError as exc:
        raise click.BadParameter(f"expected a comma-separated integer list: {exc}")


def _build_config(experiment, config, **overrides) -> ExperimentConfig:
    base = ExperimentConfig.from_yaml(config) if config else ExperimentConfig()
    fields = {"experiment": experiment}
    for key, value in overrides.items():
        if value is not None:
            fields[key] = value
    return dataclasses.replace(base, **fields)


_SHARED = [
    click.option("--config", type=click.Path(exists=True, dir_okay=False),
                 default=None, help="YAML config file (flat keys)."),
    click.option("--seed", "base_seed", type=int, default=None, help="Base RNG seed."),
    click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None,
                 help="Output directory for CSV files."),
    click.option("--trials", type=int, default=None, help="Trials per grid cell."),
    click.option("--d", "d_grid", callback=_int_list, default=None,
                 help="Comma-separated dimensions, e.g. 3,5,15."),
    click.option("--L", "L_grid", callback=_int_list, default=None,
                 help="Comma-separated mask counts, e.g. 2,5,10."),
]


def _with_shared(fn):
    for opt in reversed(_SHARED):
        fn = opt(fn)
    return fn


def _report(result):
    click.echo(f"per-trial CSV : {result.trial_path}")
    if result.aggregate_path != result.trial_path:
        click.echo(f"aggregate CSV : {result.aggregate_path}")
    for row in result.aggregate_rows:
        click.echo("  " + " ".join(str(v) for v in row))


@click.group()
def main():
    """Coded-diffraction phase retrieval: recovery and certification experiments."""


@main.command("phase-transition")
@_with_shared
def phase_transition_cmd(config, **overrides):
    """Recovery success rates over a (d, L) grid."""
    _report(run_phase_transition(_build_config("phase_transition", config, **overrides)))


@main.command("golfing-rate")
@_with_shared
def golfing_rate_cmd(config, **overrides):
    """Dual-certificate construction success rates."""
    _report(run_golfing_rate(_build_config("golfing_rate", config, **overrides)))


@main.command("lower-bound")
@_with_shared
def lower_bound_cmd(config, **overrides):
    """Mask-collision (indistinguishability) rates over a (d, L) grid."""
    _report(run_lower_bound_experiment(_build_config("lower_bound", config, **overrides)))


@main.command("isotropy-audit")
@_with_shared
def isotropy_audit_cmd(config, **overrides):
    """Exact near-isotropy and 2-design deviations over a dimension grid."""
    overrides.pop("trials", None)
    overrides.pop("L_grid", None)
    _report(run_isotropy_audit(_build_config("isotropy_audit", config, **overrides)))


@main.command("recover")
@click.option("--d", type=int, default=15, show_default=True)
@click.option("--L", "L", type=int, default=30, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--mode", type=click.Choice(["feasibility", "trace_min"]),
              default="feasibility", show_default=True)
@click.option("--max-iterations", type=int, default=800, show_default=True)
def recover_cmd(d, L, seed, mode, max_iterations):
    """Recover one random signal from one sampled mask realization."""
    dist = ternary_mask_distribution()
    rng = np.random.default_rng(seed)
    x = random_unit_signal(d, rng)
    masks = sample_masks(dist, d, L, derive_seed(seed, d, L, "recover"))
    frame = MeasurementFrame(masks)
    y = measure(x, masks)
    cfg = SolverConfig(
        mode=mode,
        max_iterations=max_iterations,
        trace_target=y.y0 if mode == "feasibility" else None,
    )
    result = solve_phaselift(frame, y, cfg)
    x_hat, gap = extract_signal(result.X_hat)
    err = phase_aligned_distance(x, x_hat)
    report = verify_feasibility(frame, y, result.X_hat, y0=y.y0)
    click.echo(f"d={d} L={L} seed={seed} mode={mode}")
    click.echo(f"converged={result.converged} iterations={result.iterations_used}")
    click.echo(f"phase-aligned error = {err:.3e}   rank-1 gap = {gap:.3e}")
    click.echo(
        f"constraint violation = {report.max_violation:.3e}   "
        f"min eigenvalue = {report.min_eigenvalue:.3e}"
    )
    if err > 1e-3:
        raise SystemExit(1)


@main.command("certify")
@click.option("--d", type=int, default=15, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--injectivity-L", "inj_L", type=int, default=200, show_default=True)
@click.option("--log/--no-log", "show_log", default=False,
              help="Print the golfing construction log.")
def certify_cmd(d, seed, inj_L, show_log):
    """Construct and verify a dual certificate for one random signal."""
    dist = ternary_mask_distribution()
    rng = np.random.default_rng(seed)
    x = random_unit_signal(d, rng)
    cert = golfing_construct(x, dist, GolfingParams(), seed=derive_seed(seed, d, 0, "golf"))
    if not isinstance(cert, DualCertificate):
        click.echo(f"construction failed: {cert.reason}")
        if show_log:
            click.echo(format_construction_log(cert.construction_log))
        raise SystemExit(1)
    check = verify_certificate(cert, x)
    inj_masks = sample_masks(dist, d, inj_L, derive_seed(seed, d, inj_L, "inj"))
    inj = injectivity_spectrum(MeasurementFrame(inj_masks), x, seed=seed)
    verdict = certify_optimality(x, MeasurementFrame(cert.masks), cert, inj)
    click.echo(f"d={d} seed={seed} masks used={cert.masks.L}")
    click.echo(
        f"tangent residual = {check.tangent_residual:.3e} (bound {check.tangent_bound:.3e})"
    )
    click.echo(
        f"complement norm  = {check.complement_norm:.3e} (bound {check.complement_bound})"
    )
    click.echo(f"injectivity 1+lambda_min = {1 + inj.lambda_min_restricted:.4f} (> 0.25)")
    click.echo(f"certified optimal: {verdict.certified}")
    if verdict.failing_hypotheses:
        for h in verdict.failing_hypotheses:
            click.echo(f"  failing: {h}")
    if show_log:
        click.echo(format_construction_log(cert.construction_log))
    if not verdict.certified:
        raise SystemExit(1)


if __name__ == "__main__":
    main()
