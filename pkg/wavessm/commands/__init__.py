"""Command groups, one module per concern, registered on the top-level CLI."""
import functools

import click

from config import Config
from wavessm.errors import WaveSSMError
from wavessm.models import FAMILIES, FrameSpec, MEASURES, MORLET_MODULATIONS, Measure
from wavessm.settings import RunConfig, load_config_file


class CommandFailed(click.ClickException):
    """Carries a library error out of click with its exit status."""

    def __init__(self, error):
        super().__init__(str(error))
        self.exit_code = getattr(error, "exit_code", 2)

    def format_message(self):
        return self.message


def parse_ints(ctx, param, value):
    if value is None or isinstance(value, (list, tuple)):
        return value
    try:
        return [int(v) for v in str(value).split(",") if v.strip()]
    except ValueError:
        raise click.BadParameter(f"expected comma-separated integers, got {value!r}")


def parse_words(ctx, param, value):
    if value is None or isinstance(value, (list, tuple)):
        return value
    return [v.strip() for v in str(value).split(",") if v.strip()]


def _flatten(value):
    if isinstance(value, (list, tuple)):
        return ",".join(str(v) for v in value)
    return value


def _load_config(ctx, param, value):
    if value is None:
        return None
    allowed = {p.name for p in ctx.command.params if p.name != "config"}
    allowed |= {name.replace("_", "-") for name in allowed}
    try:
        doc = load_config_file(value, allowed)
    except WaveSSMError as exc:
        raise CommandFailed(exc) from exc
    ctx.default_map = {**(ctx.default_map or {}), **{k: _flatten(v) for k, v in doc.items()}}
    return value


def common_options(fn):
    options = [
        click.option("--config", type=click.Path(exists=True, dir_okay=False), is_eager=True,
                     expose_value=False, callback=_load_config, help="Flat JSON file of option values."),
        click.option("--out", "out", default=None, help="Output directory (default $WAVESSM_OUT)."),
        click.option("--seed", "seed", type=int, default=None, help="RNG seed (default $WAVESSM_SEED)."),
        click.option("--workers", "workers", type=int, default=None, help="Sweep worker threads."),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


morlet_modulation_option = click.option(
    "--morlet-modulation", type=click.Choice(MORLET_MODULATIONS), default=Config.MORLET_MODULATION,
    show_default=True, help="angular: omega = 2 pi f; grid: omega = pi f L / (L - 1).",
)


def frame_options(fn):
    options = [
        click.option("--family", default="morlet", type=click.Choice(FAMILIES)),
        click.option("--N", "N", type=int, default=64, show_default=True),
        click.option("--L", "L", type=int, default=2048, show_default=True),
        click.option("--f-min", type=float, default=4.0, show_default=True),
        click.option("--f-max", type=float, default=64.0, show_default=True),
        click.option("--n-scales", type=int, default=4, show_default=True),
        click.option("--hop-factor", type=float, default=0.75, show_default=True),
        click.option("--order", type=int, default=1, show_default=True, help="Gaussian derivative order P."),
        morlet_modulation_option,
        click.option("--tighten/--no-tighten", default=True, show_default=True),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def measure_options(fn):
    fn = click.option("--theta", type=float, default=1.0, show_default=True)(fn)
    return click.option("--measure", type=click.Choice(MEASURES), default="scaled", show_default=True)(fn)


def frame_spec(params, seed=0, **overrides):
    keys = ("family", "N", "L", "f_min", "f_max", "n_scales", "hop_factor", "order", "morlet_modulation", "tighten")
    fields = {k: params[k] for k in keys if k in params}
    fields.update(overrides)
    return FrameSpec(rng_seed=seed, **fields)


def measure_from(params):
    if params["measure"] == "translated":
        return Measure.translated(params["theta"])
    return Measure.scaled()


def start_run(ctx, name):
    """RunConfig from the environment Config, overridden by this command's flags."""
    params = dict(ctx.params)
    out = params.pop("out", None)
    seed = params.pop("seed", None)
    obj = ctx.obj or Config
    run = RunConfig.from_object(obj, name, params)
    run.update({}, seed=seed, output_dir=out)
    if run.params.get("workers") is None:
        run.params["workers"] = int(getattr(obj, "WORKERS", 1))
    run.write()
    return run


def wavessm_command(name, **kwargs):
    """click.command that maps library errors onto exit statuses 2 and 3."""
    def decorator(fn):
        @functools.wraps(fn)
        def wrapper(*args, **kw):
            try:
                return fn(*args, **kw)
            except (WaveSSMError, ValueError) as exc:
                raise CommandFailed(exc) from exc
        return click.command(name, **kwargs)(wrapper)
    return decorator


def register_commands(group):
    from wavessm.commands import dynamics, frames, sweeps

    for module in (frames, dynamics, sweeps):
        for command in module.COMMANDS:
            group.add_command(command)
