"""approx-sweep and copy-task."""
import logging

import click

from wavessm.approx import sweep
from wavessm.commands import (
    common_options, frame_spec, measure_from, morlet_modulation_option, parse_ints, parse_words, start_run,
    wavessm_command,
)
from wavessm.frames import make_frame
from wavessm.models import MEASURES, valid_family
from wavessm.tasks import DEFAULT_D, DEFAULT_T, SUMMARY_COLUMNS, compare_frames
from wavessm.writers import write_rows

log = logging.getLogger(__name__)

APPROX_COLUMNS = ("method", "family", "N", "error", "slope", "signal")


@wavessm_command("approx-sweep")
@click.option("--signals", default="one_step,two_step", callback=parse_words, show_default=True)
@click.option("--methods", default="legendre,db6,omp:mexh", callback=parse_words, show_default=True)
@click.option("--budgets", default="32,64,128,256", callback=parse_ints, show_default=True)
@click.option("--L", "L", type=int, default=2048, show_default=True)
@click.option("--levels", type=int, default=6, show_default=True, help="DWT depth.")
@click.option("--K", "K", type=int, default=2048, show_default=True, help="Legendre truncation ceiling.")
@click.option("--n-scales", type=int, default=32, show_default=True, help="CWT dictionary scales.")
@click.option("--n-shifts", type=int, default=512, show_default=True, help="CWT dictionary shifts.")
@click.option("--a-max", type=float, default=0.15, show_default=True)
@click.option("--ridge", type=float, default=1e-7, show_default=True)
@common_options
@click.pass_context
def approx_sweep_command(ctx, signals, methods, budgets, L, **_):
    """Best-N-term errors and rate slopes per method and signal."""
    run = start_run(ctx, "approx-sweep")
    p = run.params
    rows = sweep(
        signals, methods, budgets, L=L, workers=p["workers"],
        K=p["K"], levels=p["levels"], n_scales=p["n_scales"], n_shifts=p["n_shifts"],
        a_max=p["a_max"], ridge=p["ridge"],
    )
    path = run.path("approx.csv")
    write_rows(path, APPROX_COLUMNS, rows)
    slopes = sorted({(r["signal"], r["method"], r["family"], str(r["slope"])) for r in rows})
    for signal, method, family, slope in slopes:
        log.info("%s %s/%s slope %s", signal, method, family, slope)
    click.echo(f"{len(rows)} rows over {len(slopes)} (signal, method) cells -> {path}")


@wavessm_command("copy-task")
@click.option("--T", "T", type=int, default=DEFAULT_T, show_default=True)
@click.option("--W", "W", default="5,10,15", callback=parse_ints, show_default=True, help="Window counts.")
@click.option("--D", "D", type=int, default=DEFAULT_D, show_default=True, help="Window length.")
@click.option("--N", "N", type=int, default=128, show_default=True)
@click.option("--families", default="morlet,gauss_deriv,mexhat,dpss,db6,legendre",
              callback=parse_words, show_default=True)
@click.option("--measure", type=click.Choice(MEASURES), default="translated", show_default=True)
@click.option("--theta", type=float, default=1.0, show_default=True)
@click.option("--delta", type=float, default=None, help="Step size (default 1/(T-1)).")
@click.option("--seeds", default="0,1,2,3,4", callback=parse_ints, show_default=True)
@morlet_modulation_option
@common_options
@click.pass_context
def copy_task_command(ctx, T, W, D, N, families, delta, seeds, **_):
    """Window copying with a linear decode of the final state."""
    run = start_run(ctx, "copy-task")
    for family in families:
        if not valid_family(family):
            raise click.BadParameter(f"unknown family {family!r}", param_hint="--families")
    frames = [make_frame(frame_spec(run.params, run.rng_seed, family=f, N=N, L=T)) for f in families]
    rows = compare_frames(
        frames, W, seeds, D=D, delta=delta, measure=measure_from(run.params), workers=run.params["workers"],
    )
    path = run.path("copy_task.csv")
    write_rows(path, SUMMARY_COLUMNS, rows)
    divergent = sum(r["divergent"] for r in rows)
    click.echo(f"linear decode-from-final-state evaluation: {len(rows)} rows, {divergent} divergent cells -> {path}")


COMMANDS = (approx_sweep_command, copy_task_command)
