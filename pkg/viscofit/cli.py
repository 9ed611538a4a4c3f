"""Shared CLI functionality for viscofit."""

from __future__ import annotations

import typer

from .config import check_config_keys, load_config
from .core.errors import ConfigError
from .core.utils import console

app = typer.Typer(
    name="viscofit",
    help="Identify finite-strain viscoplastic hardening parameters and quantify their sensitivity to measurement noise.",
    add_completion=True,
)

# Options that only make sense on the command line.
_CLI_ONLY = frozenset({"config_file", "print_args"})


@app.callback(invoke_without_command=True)
def main(
    ctx: typer.Context,
) -> None:
    """Viscoplastic parameter identification and noise sensitivity."""
    if ctx.invoked_subcommand is None:
        console.print("[bold red]No command specified.[/bold red]")
        console.print("[bold yellow]Running --help for your convenience.[/bold yellow]")
        console.print(ctx.get_help())
        raise typer.Exit
    import dotenv  # noqa: PLC0415

    dotenv.load_dotenv()


def _known_options(ctx: typer.Context) -> dict[str, list[str]]:
    root = ctx.find_root().command
    commands = getattr(root, "commands", {}) or {ctx.command.name: ctx.command}
    return {
        name: [p.name for p in command.params if p.name and p.name not in _CLI_ONLY]
        for name, command in commands.items()
    }


def set_config_defaults(ctx: typer.Context, config_file: str | None) -> None:
    """Set the default values for the CLI based on the config file.

    Unknown sections and keys are rejected before any computation starts.
    """
    try:
        config = load_config(config_file)
        check_config_keys(config, _known_options(ctx))
    except ConfigError as e:
        raise typer.BadParameter(str(e)) from e
    wildcard_config = config.get("defaults", {})
    # This function is executed inside the subcommand, so the command is the sub command.
    subcommand = ctx.command.name
    if not subcommand:
        ctx.default_map = wildcard_config
        return
    known = set(_known_options(ctx).get(subcommand, []))
    # [defaults] may carry options of other commands; keep only this command's.
    defaults = {k: v for k, v in wildcard_config.items() if k in known}
    defaults.update(config.get(subcommand, {}))
    ctx.default_map = defaults


# Import commands from other modules to register them
from .commands import distance, identify, montecarlo, simulate  # noqa: E402, F401
