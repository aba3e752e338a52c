"""build-frame and diagnostics."""
import logging
from concurrent.futures import ThreadPoolExecutor

import click

from wavessm.bundles import save_bundle
from wavessm.commands import (
    common_options, frame_options, frame_spec, morlet_modulation_option, parse_ints, parse_words, start_run,
    wavessm_command,
)
from wavessm.frames import build_frame, frame_diagnostics, make_frame, tighten
from wavessm.models import FAMILIES, valid_family
from wavessm.writers import write_rows

log = logging.getLogger(__name__)

DIAGNOSTIC_COLUMNS = ("family", "N", "L", "state", "lambda_min", "lambda_max", "kappa")
TIGHTEN_STATES = {"raw": ("raw",), "tightened": ("tightened",), "both": ("raw", "tightened")}


@wavessm_command("build-frame")
@frame_options
@click.option("--bundle", default="frame", show_default=True, help="Bundle directory name under --out.")
@common_options
@click.pass_context
def build_frame_command(ctx, bundle, **_):
    """Build a frame and save it as a bundle."""
    run = start_run(ctx, "build-frame")
    frame = make_frame(frame_spec(run.params, run.rng_seed))
    report = frame_diagnostics(frame)
    path = save_bundle(frame, run.path(bundle), seed=run.rng_seed)
    click.echo(f"{frame.family} frame N={frame.N} L={frame.L} kappa={report.condition_number:.6g} -> {path}")


@wavessm_command("diagnostics")
@click.option("--family", "families", default="morlet", callback=parse_words,
              help=f"Comma-separated families from {', '.join(FAMILIES)}.")
@click.option("--N", "N", default="16,32,64,128", callback=parse_ints, show_default=True)
@click.option("--L", "L", type=int, default=2048, show_default=True)
@click.option("--f-min", type=float, default=4.0, show_default=True)
@click.option("--f-max", type=float, default=64.0, show_default=True)
@click.option("--n-scales", type=int, default=4, show_default=True)
@click.option("--tighten", "states", type=click.Choice(tuple(TIGHTEN_STATES)), default="both", show_default=True)
@morlet_modulation_option
@common_options
@click.pass_context
def diagnostics_command(ctx, families, N, states, **_):
    """Condition number of the frame operator S, raw and tightened, over N."""
    run = start_run(ctx, "diagnostics")
    for family in families:
        if not valid_family(family):
            raise click.BadParameter(f"unknown family {family!r}", param_hint="--family")
    cells = [(family, n) for family in families for n in N]

    def evaluate(cell):
        family, n = cell
        raw = build_frame(frame_spec(run.params, run.rng_seed, family=family, N=n, tighten=False))
        rows = []
        for state in TIGHTEN_STATES[states]:
            report = frame_diagnostics(raw if state == "raw" else tighten(raw))
            rows.append({
                "family": family, "N": n, "L": raw.L, "state": state,
                "lambda_min": report.lambda_min, "lambda_max": report.lambda_max,
                "kappa": report.condition_number,
            })
        return rows

    with ThreadPoolExecutor(max_workers=max(run.params["workers"], 1)) as pool:
        rows = [row for chunk in pool.map(evaluate, cells) for row in chunk]
    path = run.path("diagnostics.csv")
    write_rows(path, DIAGNOSTIC_COLUMNS, rows)
    worst = max(rows, key=lambda r: r["kappa"])
    click.echo(f"{len(rows)} rows, worst kappa={worst['kappa']:.6g} ({worst['family']} N={worst['N']} {worst['state']}) -> {path}")


COMMANDS = (build_frame_command, diagnostics_command)
