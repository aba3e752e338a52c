def create_cli():
    """Construct the command-line application."""
    from wavessm.app import cli
    from wavessm.commands import register_commands

    register_commands(cli)
    return cli
