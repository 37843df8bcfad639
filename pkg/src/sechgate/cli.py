"""
Sechgate command line

Commands:
- derive: resolved pulse parameters for a family over an angle grid
- sweep-angle: derive, simulate and refine every angle, one CSV row each
- sweep-coupling: the angle sweep repeated over a coupling grid
- sq-xrot: square-pulse single-qubit X rotations over an angle grid
- selfcheck: analytic-versus-numeric oracle suite
"""

import click

from sechgate.decorators import handle_errors
from sechgate.models import Branch, ProtocolFamily
from sechgate.reports import write_csv, write_gnuplot
from sechgate.selfcheck import run_selfcheck
from sechgate.sweeps import (
    COUPLING_COLUMNS,
    DERIVE_COLUMNS,
    SWEEP_COLUMNS,
    XROT_COLUMNS,
    RunConfig,
    derive_protocols,
    sweep_angle,
    sweep_coupling,
    sweep_x_rotation,
)

LAMBDA_CHOICES = {"1": 1, "2": -1}


def _shared_options(f):
    """Device, output and execution flags every batch command takes."""
    options = [
        click.option("--config", "device_config", type=click.Path(dir_okay=False), default=None,
                     help="Device key/value file"),
        click.option("--theta-grid", default=None, help="Angles A:B:N in units of pi"),
        click.option("--out", default=None, help="CSV output path (stdout when omitted)"),
        click.option("--gnuplot", default=None, help="Also write a gnuplot data block here"),
        click.option("--seed", type=int, default=None, help="Seed for stochastic restarts"),
        click.option("--workers", type=int, default=None, help="Parallel row workers"),
        click.option("--transmon-levels", type=int, default=None, help="Override transmon truncation"),
        click.option("--cavity-levels", type=int, default=None, help="Override cavity truncation"),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def _protocol_options(f):
    options = [
        click.option("--family", type=click.Choice([m.value for m in ProtocolFamily]),
                     default=ProtocolFamily.IQSS_2PI_RES.value, show_default=True),
        click.option("--lambda", "lam", type=click.Choice(sorted(LAMBDA_CHOICES)), default=None,
                     help="Target transition: 1 = other qubit in |0>, 2 = in |1> (default both)"),
        click.option("--branch", type=click.Choice([b.value for b in Branch]), default=Branch.PLUS.value,
                     show_default=True),
        click.option("--sigma-mhz", type=float, default=None, help="Bandwidth for the off-resonant family"),
        click.option("--max-gate-time-ns", type=float, default=None, help="Skip rows with longer gates"),
    ]
    for option in reversed(options):
        f = option(f)
    return f


def _run_config(config, **options) -> RunConfig:
    if options.get("family") is not None:
        options["family"] = ProtocolFamily(options["family"])
    if options.get("branch") is not None:
        options["branch"] = Branch(options["branch"])
    if options.get("lam") is not None:
        options["lam"] = LAMBDA_CHOICES[options["lam"]]
    return RunConfig.from_config(config, **options)


def _emit(cfg: RunConfig, rows: list, columns, group_by=None):
    count = write_csv(cfg.out, rows, columns)
    if cfg.gnuplot:
        write_gnuplot(cfg.gnuplot, rows, columns, group_by=group_by)
    if cfg.out:
        click.echo(f"📊 {count} rows written to {cfg.out}", err=True)
    failed = sum(1 for row in rows if row.get("error"))
    if failed:
        click.echo(f"⚠️  {failed} row(s) carry an error", err=True)


def register_cli_commands(cli):
    """Register the sechgate commands on ``cli``."""

    # ===========================================
    # Protocol design
    # ===========================================

    @cli.command("derive")
    @_shared_options
    @_protocol_options
    @click.pass_obj
    @handle_errors
    def derive(config, **options):
        """Resolve pulse parameters for a family over the angle grid."""
        cfg = _run_config(config, **options)
        rows = derive_protocols(cfg)
        _emit(cfg, rows, DERIVE_COLUMNS, group_by="lambda")

    # ===========================================
    # Simulation sweeps
    # ===========================================

    @cli.command("sweep-angle")
    @_shared_options
    @_protocol_options
    @click.option("--no-refine", is_flag=True, help="Report the analytic protocol without refinement")
    @click.option("--budget", type=int, default=None, help="Refinement evaluations per row")
    @click.pass_obj
    @handle_errors
    def sweep_angle_command(config, no_refine, budget, **options):
        """Derive, simulate and refine each angle."""
        cfg = _run_config(config, refine=False if no_refine else None, refine_budget=budget, **options)
        rows = sweep_angle(cfg)
        _emit(cfg, rows, SWEEP_COLUMNS, group_by="lambda")

    @cli.command("sweep-coupling")
    @_shared_options
    @_protocol_options
    @click.option("--coupling-grid", default=None, help="Couplings A:B:N in MHz, within [30, 180]")
    @click.option("--no-refine", is_flag=True, help="Report the analytic protocol without refinement")
    @click.option("--budget", type=int, default=None, help="Refinement evaluations per row")
    @click.pass_obj
    @handle_errors
    def sweep_coupling_command(config, no_refine, budget, **options):
        """Angle sweep at each coupling of the grid."""
        cfg = _run_config(config, refine=False if no_refine else None, refine_budget=budget, **options)
        rows = sweep_coupling(cfg)
        _emit(cfg, rows, COUPLING_COLUMNS, group_by="coupling_mhz")

    # ===========================================
    # Single-qubit rotations
    # ===========================================

    @cli.command("sq-xrot")
    @_shared_options
    @click.option("--pulses", type=click.IntRange(1, 6), default=None, help="Square pulses per sequence")
    @click.pass_obj
    @handle_errors
    def sq_xrot(config, **options):
        """Design square-pulse X rotations over the angle grid."""
        cfg = _run_config(config, **options)
        rows = sweep_x_rotation(cfg)
        _emit(cfg, rows, XROT_COLUMNS)

    # ===========================================
    # Checks
    # ===========================================

    @cli.command("selfcheck")
    @click.pass_context
    @handle_errors
    def selfcheck(ctx):
        """Run the analytic-versus-numeric oracle suite."""
        results = run_selfcheck()
        for result in results:
            glyph = "✅" if result["status"] == "ok" else "❌"
            click.echo(f"{glyph} {result['check']}: {result['detail']}")
        failed = [r for r in results if r["status"] != "ok"]
        if failed:
            click.echo(f"❌ {len(failed)} of {len(results)} checks failed")
            ctx.exit(4)
        click.echo(f"✅ All {len(results)} checks passed")
