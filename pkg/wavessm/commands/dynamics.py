"""derive-ssm, kernel and jacobian."""
import logging

import click
import numpy as np

from wavessm.bundles import load_bundle, save_bundle
from wavessm.commands import (
    common_options, frame_options, frame_spec, measure_from, measure_options, start_run, wavessm_command,
)
from wavessm.frames import make_frame
from wavessm.models import FrameMatrix, MODES, SsmPair
from wavessm.numerics import spectral_norm
from wavessm.safari import derive
from wavessm.ssm import bilinear_discretize, check_bounded, jacobian, kernel, locality_profile
from wavessm.writers import write_matrix, write_rows

log = logging.getLogger(__name__)


def _frame(run):
    if run.params.get("frame"):
        frame = load_bundle(run.params["frame"])
        if not isinstance(frame, FrameMatrix):
            raise click.BadParameter("bundle does not hold a frame", param_hint="--frame")
        return frame
    return make_frame(frame_spec(run.params, run.rng_seed))


def _pair(run):
    if run.params.get("ssm"):
        pair = load_bundle(run.params["ssm"])
        if not isinstance(pair, SsmPair):
            raise click.BadParameter("bundle does not hold an SSM", param_hint="--ssm")
        return pair
    return derive(_frame(run), measure_from(run.params))


def _discretize(run, pair):
    mode = run.params["mode"]
    return bilinear_discretize(pair, run.params["delta"], mode=mode, seed=run.rng_seed)


def dynamics_options(fn):
    fn = click.option("--ssm", type=click.Path(exists=True, file_okay=False), default=None,
                      help="SSM bundle; skips frame construction.")(fn)
    fn = click.option("--frame", type=click.Path(exists=True, file_okay=False), default=None,
                      help="Frame bundle; overrides the frame flags.")(fn)
    fn = measure_options(fn)
    return frame_options(fn)


def stepping_options(fn):
    fn = click.option("--mode", type=click.Choice(MODES), default="lti", show_default=True)(fn)
    fn = click.option("--T", "T", type=int, default=1024, show_default=True)(fn)
    return click.option("--delta", type=float, default=None,
                        help="Step size; log-uniform in [1e-3, 1e-1] from --seed when omitted.")(fn)


@wavessm_command("derive-ssm")
@dynamics_options
@click.option("--bundle", default="ssm", show_default=True)
@common_options
@click.pass_context
def derive_ssm_command(ctx, bundle, **_):
    """Derive (A, B) from a frame and save it as a bundle."""
    run = start_run(ctx, "derive-ssm")
    run.params.pop("ssm", None)
    pair = derive(_frame(run), measure_from(run.params))
    path = save_bundle(pair, run.path(bundle), seed=run.rng_seed)
    click.echo(f"{pair.measure.kind} SSM N={pair.N} |A|_2={spectral_norm(pair.A):.6g} -> {path}")


@wavessm_command("kernel")
@dynamics_options
@stepping_options
@common_options
@click.pass_context
def kernel_command(ctx, T, **_):
    """Convolution kernel K[l] = Abar^l Bbar (C = I)."""
    run = start_run(ctx, "kernel")
    ssm = _discretize(run, _pair(run))
    K = check_bounded(kernel(ssm, T).K)
    path = run.path("kernel.csv")
    write_matrix(path, K)
    click.echo(f"kernel T={T} N={ssm.N} delta={ssm.delta:.6g} rho={ssm.spectral_radius:.6g} -> {path}")


@wavessm_command("jacobian")
@dynamics_options
@stepping_options
@common_options
@click.pass_context
def jacobian_command(ctx, T, **_):
    """Final-state Jacobian G and its per-state locality widths."""
    run = start_run(ctx, "jacobian")
    ssm = _discretize(run, _pair(run))
    G = jacobian(ssm, T)
    # columns run right to left from the latest input
    check_bounded(G.G.T[::-1])
    widths, mean = locality_profile(G)
    path = run.path("jacobian.csv")
    write_matrix(path, G.G)
    write_rows(
        run.path("locality.csv"),
        ("state", "width", "peak"),
        [{"state": n, "width": int(w), "peak": int(np.argmax(np.abs(G.G[n])))} for n, w in enumerate(widths)],
    )
    click.echo(f"jacobian N={ssm.N} T={T} mean 90% width={mean:.6g} -> {path}")


COMMANDS = (derive_ssm_command, kernel_command, jacobian_command)
