import logging
import sys

import click

from config import Config
from wavessm import create_cli

LOG_FORMAT = "%(levelname)s %(name)s: %(message)s"

log = logging.getLogger("wavessm")


class ClickHandler(logging.Handler):
    """Routes records through click so they follow whatever stderr is current."""

    def emit(self, record):
        try:
            click.echo(self.format(record), err=True)
        except Exception:
            self.handleError(record)


def configure_logging(level=Config.LOG_LEVEL):
    """One stderr handler on the package logger; safe to call repeatedly."""
    for handler in list(log.handlers):
        log.removeHandler(handler)
    handler = ClickHandler()
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    log.addHandler(handler)
    log.setLevel(level.upper())
    log.propagate = False


@click.group(invoke_without_command=True)
@click.option("--log-level", default=Config.LOG_LEVEL, show_default=True,
              type=click.Choice(["DEBUG", "INFO", "WARNING", "ERROR"], case_sensitive=False))
@click.pass_context
def cli(ctx, log_level):
    """Wavelet-frame state-space models: build, derive, run and measure."""
    configure_logging(log_level)
    ctx.obj = Config
    if ctx.invoked_subcommand is None:
        click.echo(ctx.get_help())
        ctx.exit(2)


def main(argv=None):
    """Run the CLI and return its exit status instead of exiting."""
    try:
        create_cli().main(args=argv, prog_name="wavessm")
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 0
    return 0


cli_dispatch = main

if __name__ == "__main__":
    sys.exit(main())
